"""End-to-end smoke tests for the python bindings and the CLI binary."""

import json
import os
import pathlib
import subprocess

import pytest

import skillmc

MODELS = pathlib.Path(os.environ["SKILLMC_MODELS"])
CLI = os.environ["SKILLMC_CLI"]

QUIESCENCE = "F G !(goto @ Running)"
CONDITIONAL = "F G (battery @ Critical) -> F G !(goto @ Running)"


@pytest.fixture(scope="module")
def source():
    return (MODELS / "listing1.skl").read_text()


@pytest.fixture(scope="module")
def compiled(source):
    return skillmc.compile(source)


def test_compile_and_inspect(compiled):
    assert compiled.name == "custom_robot"
    assert compiled.skills == ["goto"]
    assert compiled.resources == ["motion", "battery"]
    manifest = json.loads(compiled.manifest_json())
    assert manifest["skillset"] == "custom_robot"
    assert manifest["skills"][0]["decision_interface"] == ["request_goto", "interrupt_goto"]


def test_parse_helpers(source):
    check = skillmc.parse_check(source)
    assert check["ok"] and check["name"] == "custom_robot"
    bad = skillmc.parse_check("skillset {")
    assert not bad["ok"] and "error" in bad["diagnostics"]

    canonical = skillmc.format_source(source)
    assert skillmc.format_source(canonical) == canonical

    prop = skillmc.parse_property(QUIESCENCE)
    assert prop["ok"] and prop["canonical"] == "F G !goto @ Running"
    assert not skillmc.parse_property("G (")["ok"]


def test_round_trip_through_formatter(compiled):
    again = skillmc.compile(compiled.format())
    assert again.manifest_json() == compiled.manifest_json()


def test_verdicts_match_the_bundled_analysis(compiled):
    permissive = compiled.verify(QUIESCENCE)
    assert permissive["verdict"] == "violated"
    cycle_states = [step["state"] for step in permissive["lasso"]["cycle"]]
    assert any(s["goto"] == "Running" for s in cycle_states)

    assert compiled.verify(CONDITIONAL)["verdict"] == "holds"

    refined = compiled.verify(QUIESCENCE, refined_goto=(6, 2))
    assert refined["verdict"] == "holds"

    for engine in ("ndfs", "scc"):
        assert compiled.verify(QUIESCENCE, engine=engine)["verdict"] == "violated"
    with pytest.raises(ValueError):
        compiled.verify(QUIESCENCE, engine="quantum")


def test_explore_and_components(compiled):
    stats = compiled.explore()
    assert (stats["states"], stats["transitions"], stats["deadlocks"]) == (22, 75, 0)
    assert compiled.components() == ["goto", "motion", "battery", "F_goto", "D"]

    refined = compiled.explore(refined_goto=(6, 2))
    assert refined["states"] == 353
    # A tight bound truncates the exploration instead of failing.
    capped = compiled.explore(max_states=5)
    assert capped["truncated"] and capped["states"] == 5


def test_layer_model_from_text(compiled):
    handsoff = (
        "model handsoff for decision goto {\n"
        "  loc idle initial\n"
        "  edge idle -> idle on request_goto\n"
        "  edge idle -> idle on interrupt_goto\n"
        "}\n"
    )
    names = compiled.components(layers=[handsoff])
    assert names == ["goto", "motion", "battery", "handsoff", "F_goto"]
    verdict = compiled.verify(QUIESCENCE, layers=[handsoff])
    assert verdict["verdict"] == "violated"
    # Without auto-synthesis the functional side is uncovered.
    with pytest.raises(ValueError, match="not covered"):
        compiled.verify(QUIESCENCE, layers=[handsoff], auto_abstract=False)


def test_errors_are_raised(compiled):
    with pytest.raises(ValueError):
        skillmc.compile("skillset {")
    with pytest.raises(ValueError, match="unknown component"):
        compiled.verify("G nosuch @ x")


def test_cli_agrees_with_the_bindings(compiled, tmp_path):
    listing = str(MODELS / "listing1.skl")
    run = subprocess.run(
        [CLI, "verify", "--auto-abstract", "--format", "json", "--prop", QUIESCENCE, listing],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 3
    verdict = json.loads(run.stdout)
    assert verdict["verdict"] == "violated"
    assert verdict["states_explored"] == compiled.verify(QUIESCENCE)["states_explored"]

    holds = subprocess.run(
        [CLI, "verify", "--auto-abstract", "--prop", CONDITIONAL, listing],
        capture_output=True,
        text=True,
    )
    assert holds.returncode == 0
    assert holds.stdout.startswith("HOLDS")
