// Python bindings: a thin, mostly-string-based facade over the library.
// Structured results cross the boundary as plain dicts/lists so Python-side
// consumers need no knowledge of the C++ types.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillmc/check.hpp"
#include "skillmc/compile.hpp"
#include "skillmc/layer.hpp"
#include "skillmc/ltl.hpp"
#include "skillmc/lts.hpp"
#include "skillmc/skillset.hpp"

namespace py = pybind11;
using namespace skillmc;

namespace {

std::string render_diags(const Diagnostics& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += to_string(d);
  }
  return out;
}

void throw_on_errors(const Diagnostics& diags) {
  if (has_errors(diags)) throw std::invalid_argument(render_diags(diags));
}

/// Parsed + compiled skillset, the handle every other operation starts from.
struct Compiled {
  SkillsetAst ast;
  CompiledSkillset cs;
};

std::shared_ptr<Compiled> compile_text(const std::string& text) {
  auto parsed = parse_skillset(text);
  throw_on_errors(parsed.diagnostics);
  auto compiled = compile_skillset(*parsed.ast);
  throw_on_errors(compiled.diagnostics);
  return std::make_shared<Compiled>(Compiled{std::move(*parsed.ast), std::move(*compiled.compiled)});
}

/// Assembles the closed network for one verification/exploration call.
ClosedNetwork closed_for(const Compiled& c, const std::vector<std::string>& layer_texts,
                         py::object refined, bool auto_abstract) {
  std::vector<GuardedTs> models;
  for (const auto& text : layer_texts) {
    auto parsed = parse_layer_model(text);
    throw_on_errors(parsed.diagnostics);
    models.push_back(std::move(*parsed.model));
  }
  if (!refined.is_none()) {
    auto pair = refined.cast<std::pair<int, int>>();
    models.push_back(builtin_refined_goto(pair.first, pair.second));
  }
  AttachOptions opts;
  opts.auto_abstract = auto_abstract;
  auto res = close_network(c.cs, models, opts);
  throw_on_errors(res.diagnostics);
  return std::move(*res.closed);
}

py::dict state_dict(const Network& net, const GlobalState& g) {
  py::dict d;
  for (size_t i = 0; i < net.components().size(); ++i) {
    const Lts& comp = net.component(static_cast<int>(i));
    d[py::str(comp.name())] = comp.state_name(g[i]);
  }
  return d;
}

py::list steps_list(const Network& net, const std::vector<LassoStep>& steps) {
  py::list out;
  for (const auto& s : steps) {
    py::dict d;
    d["event"] = s.event;
    d["state"] = state_dict(net, s.state);
    out.append(d);
  }
  return out;
}

py::dict verdict_dict(const Network& net, const Verdict& v) {
  py::dict d;
  d["verdict"] = v.holds ? "holds" : "violated";
  d["states_explored"] = v.states_explored;
  if (v.lasso) {
    py::dict lasso;
    lasso["prefix"] = steps_list(net, v.lasso->prefix);
    lasso["cycle"] = steps_list(net, v.lasso->cycle);
    d["lasso"] = lasso;
  }
  return d;
}

Engine engine_of(const std::string& name) {
  if (name == "ndfs") return Engine::Ndfs;
  if (name == "scc") return Engine::Scc;
  throw std::invalid_argument("unknown engine '" + name + "' (expected ndfs or scc)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Skillset compiler and LTL model checker";

  py::class_<Compiled, std::shared_ptr<Compiled>>(m, "CompiledSkillset")
      .def_property_readonly("name", [](const Compiled& c) { return c.cs.name; })
      .def_property_readonly("skills",
                             [](const Compiled& c) {
                               std::vector<std::string> out;
                               for (const auto& s : c.cs.skills) out.push_back(s.skill);
                               return out;
                             })
      .def_property_readonly("resources",
                             [](const Compiled& c) {
                               std::vector<std::string> out;
                               for (const auto& r : c.cs.resources) out.push_back(r.name);
                               return out;
                             })
      .def("manifest_json", [](const Compiled& c) { return manifest_json(c.cs); },
           "Deterministic JSON description of the compiled automata")
      .def("format", [](const Compiled& c) { return format_skillset(c.ast); },
           "Canonical source form of the skillset")
      .def(
          "verify",
          [](const Compiled& c, const std::string& property,
             const std::vector<std::string>& layers, py::object refined_goto,
             bool auto_abstract, const std::string& engine, uint64_t max_states) {
            auto parsed = parse_ltl(property);
            throw_on_errors(parsed.diagnostics);
            ClosedNetwork closed = closed_for(c, layers, refined_goto, auto_abstract);
            Verdict v = model_check(closed.network, *parsed.formula, engine_of(engine),
                                    max_states);
            return verdict_dict(closed.network, v);
          },
          py::arg("property"), py::kw_only(), py::arg("layers") = std::vector<std::string>{},
          py::arg("refined_goto") = py::none(), py::arg("auto_abstract") = true,
          py::arg("engine") = "ndfs", py::arg("max_states") = 1'000'000,
          "Model-check an LTL property against the closed network; returns a dict "
          "with the verdict, the exploration size, and a counterexample lasso when "
          "the property is violated")
      .def(
          "explore",
          [](const Compiled& c, const std::vector<std::string>& layers,
             py::object refined_goto, bool auto_abstract, uint64_t max_states) {
            ClosedNetwork closed = closed_for(c, layers, refined_goto, auto_abstract);
            ReachStats st = closed.network.reachable(max_states);
            py::dict d;
            d["states"] = st.states;
            d["transitions"] = st.transitions;
            d["deadlocks"] = st.deadlocks;
            d["truncated"] = st.truncated;
            return d;
          },
          py::kw_only(), py::arg("layers") = std::vector<std::string>{},
          py::arg("refined_goto") = py::none(), py::arg("auto_abstract") = true,
          py::arg("max_states") = 1'000'000,
          "Reachability statistics of the closed network")
      .def(
          "components",
          [](const Compiled& c, const std::vector<std::string>& layers,
             py::object refined_goto, bool auto_abstract) {
            ClosedNetwork closed = closed_for(c, layers, refined_goto, auto_abstract);
            std::vector<std::string> out;
            for (const auto& comp : closed.network.components()) out.push_back(comp.name());
            return out;
          },
          py::kw_only(), py::arg("layers") = std::vector<std::string>{},
          py::arg("refined_goto") = py::none(), py::arg("auto_abstract") = true,
          "Component names of the closed network, in composition order");

  m.def("compile", &compile_text, py::arg("text"),
        "Parse and compile skillset source text");
  m.def(
      "parse_check",
      [](const std::string& text) {
        auto parsed = parse_skillset(text);
        py::dict d;
        d["ok"] = parsed.ok();
        d["diagnostics"] = render_diags(parsed.diagnostics);
        if (parsed.ok()) d["name"] = parsed.ast->name;
        return d;
      },
      py::arg("text"), "Parse-only entry point: returns ok/diagnostics without compiling");
  m.def(
      "format_source",
      [](const std::string& text) {
        auto parsed = parse_skillset(text);
        throw_on_errors(parsed.diagnostics);
        return format_skillset(*parsed.ast);
      },
      py::arg("text"), "Canonical reformatting of skillset source text");
  m.def(
      "parse_property",
      [](const std::string& text) {
        auto parsed = parse_ltl(text);
        py::dict d;
        d["ok"] = parsed.formula.has_value();
        d["diagnostics"] = render_diags(parsed.diagnostics);
        if (parsed.formula) d["canonical"] = to_string(*parsed.formula);
        return d;
      },
      py::arg("text"), "Parse an LTL property; returns ok/diagnostics/canonical form");
}
