// Layer models: grammar, guarded expansion, builtins, network closing.
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "skillmc/compile.hpp"
#include "skillmc/layer.hpp"
#include "skillmc/skillset.hpp"
#include "support/oracles.hpp"

using namespace skillmc;

namespace {

GuardedTs parse_model_ok(const std::string& text) {
  auto res = parse_layer_model(text);
  for (const auto& d : res.diagnostics) INFO(to_string(d));
  REQUIRE(res.ok());
  return std::move(*res.model);
}

CompiledSkillset compiled_listing1() {
  std::ifstream in(std::string(SKILLMC_MODELS_DIR) + "/listing1.skl", std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto parsed = parse_skillset(ss.str());
  REQUIRE(parsed.ok());
  auto compiled = compile_skillset(*parsed.ast);
  REQUIRE(compiled.ok());
  return std::move(*compiled.compiled);
}

const char* kTicker = R"(model ticker {
  var n in [0, 3] init 0
  loc run initial
  edge run -> run on tick internal when n < 3 do n := n + 1
  edge run -> run on reset when n == 3 do n := 0
})";

bool any_error_contains(const Diagnostics& ds, const std::string& needle) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error && d.message.find(needle) != std::string::npos) return true;
  return false;
}

bool any_warning_contains(const Diagnostics& ds, const std::string& needle) {
  for (const auto& d : ds)
    if (d.severity == Severity::Warning && d.message.find(needle) != std::string::npos)
      return true;
  return false;
}

}  // namespace

TEST_CASE("layer model grammar") {
  GuardedTs g = parse_model_ok(kTicker);
  CHECK(g.name == "ticker");
  CHECK(g.bind == BindKind::None);
  REQUIRE(g.variables.size() == 1);
  CHECK(g.variables[0].lo == 0);
  CHECK(g.variables[0].hi == 3);
  CHECK_FALSE(g.variables[0].init_any);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].internal);
  CHECK_FALSE(g.edges[1].internal);
  REQUIRE(g.edges[0].updates.size() == 1);
  CHECK(g.edges[0].updates[0].expr.constant == 1);

  GuardedTs bound = parse_model_ok(R"(model nav for functional goto {
    loc idle initial
    loc busy
    edge idle -> busy on start_hook
    edge busy -> idle on success
  })");
  CHECK(bound.bind == BindKind::Functional);
  CHECK(bound.bind_skill == "goto");

  GuardedTs planner = parse_model_ok(R"(model plan for decision goto {
    loc p initial
    edge p -> p on request
  })");
  CHECK(planner.bind == BindKind::Decision);

  // Negative bounds, any-init, multiple simultaneous updates, affine forms.
  GuardedTs neg = parse_model_ok(R"(model m {
    var x in [-2, 2] init any
    var y in [0, 1] init 0
    loc a initial
    edge a -> a on swap do x := 2 * y - 1 y := 0
  })");
  CHECK(neg.variables[0].lo == -2);
  CHECK(neg.variables[0].init_any);
  REQUIRE(neg.edges[0].updates.size() == 2);
  CHECK(neg.edges[0].updates[0].expr.terms == std::vector<std::pair<int, std::string>>{{2, "y"}});
  CHECK(neg.edges[0].updates[0].expr.constant == -1);
}

TEST_CASE("layer model validation") {
  auto diags_of = [](const std::string& text) {
    auto res = parse_layer_model(text);
    CHECK_FALSE(res.ok());
    return res.diagnostics;
  };
  CHECK(any_error_contains(diags_of("model m { var x in [3, 1] init 0 loc a initial }"),
                           "empty domain"));
  CHECK(any_error_contains(diags_of("model m { var x in [0, 3] init 7 loc a initial }"),
                           "outside"));
  CHECK(any_error_contains(diags_of("model m { loc a initial loc a }"), "duplicate"));
  CHECK(any_error_contains(diags_of("model m { loc a loc b }"), "initial"));
  CHECK(any_error_contains(diags_of("model m { loc a initial loc b initial }"), "initial"));
  CHECK(any_error_contains(diags_of("model m { loc a initial edge a -> zz on e }"),
                           "unknown location"));
  CHECK(any_error_contains(
      diags_of("model m { loc a initial edge a -> a on e when q == 0 }"), "unknown variable"));
  CHECK(any_error_contains(
      diags_of("model m { var x in [0,1] init 0 loc a initial edge a -> a on e do x := 1 x := 0 }"),
      "assigned twice"));
  CHECK(any_error_contains(
      diags_of("model m { loc a initial edge a -> a on e internal edge a -> a on e }"),
      "internal"));
  // Keywords and reserved names are rejected as identifiers.
  CHECK_FALSE(parse_layer_model("model var { loc a initial }").ok());
  CHECK_FALSE(parse_layer_model("model m { loc __x initial }").ok());
}

TEST_CASE("expansion of the ticker is the 4-state counter") {
  Lts l = expand(parse_model_ok(kTicker));
  CHECK(l.num_states() == 4);
  CHECK(l.state_name(l.initial()) == "run(n=0)");
  CHECK(l.transitions().size() == 4);  // three ticks, one reset
  auto has = [&](const char* s, const char* e, const char* d) {
    return l.has_transition(l.state_index(s), l.event_index(e), l.state_index(d));
  };
  CHECK(has("run(n=0)", "tick", "run(n=1)"));
  CHECK(has("run(n=2)", "tick", "run(n=3)"));
  CHECK_FALSE(has("run(n=3)", "tick", "run(n=3)"));
  CHECK(has("run(n=3)", "reset", "run(n=0)"));

  // Agreement with the brute-force expansion.
  CHECK(oracle::raw_of(l) == []{
    return oracle::raw_expand(parse_model_ok(kTicker));
  }());
}

TEST_CASE("expansion semantics: simultaneity, domain drops, any-init, blocking") {
  // Simultaneous swap reads the pre-state of both variables.
  GuardedTs swap = parse_model_ok(R"(model m {
    var x in [0, 1] init 0
    var y in [0, 1] init 1
    loc a initial
    edge a -> a on swap do x := y y := x
  })");
  Lts l = expand(swap);
  CHECK(l.has_transition(l.state_index("a(x=0,y=1)"), l.event_index("swap"),
                         l.state_index("a(x=1,y=0)")));
  CHECK(oracle::raw_of(l) == oracle::raw_expand(swap));

  // Updates leaving the domain drop the instance (no clamping).
  GuardedTs inc = parse_model_ok(R"(model m {
    var n in [0, 2] init 0
    loc a initial
    edge a -> a on up do n := n + 1
  })");
  Lts li = expand(inc);
  CHECK(li.transitions().size() == 2);
  CHECK(li.targets(li.state_index("a(n=2)"), li.event_index("up")).empty());
  CHECK(oracle::raw_of(li) == oracle::raw_expand(inc));

  // An event whose guard never fires still blocks (stays in the alphabet).
  CHECK(li.event_index("up") >= 0);
  GuardedTs never = parse_model_ok(R"(model m {
    var n in [0, 2] init 0
    loc a initial
    edge a -> a on impossible when n > 5
  })");
  Lts ln = expand(never);
  CHECK(ln.event_index("impossible") >= 0);
  CHECK(ln.transitions().empty());
  CHECK(oracle::raw_of(ln) == oracle::raw_expand(never));

  // init any produces the __init fan-out on a private event.
  GuardedTs any = parse_model_ok(R"(model chooser {
    var k in [1, 3] init any
    var f in [0, 1] init 0
    loc a initial
    edge a -> a on step when k > 1 do k := k - 1
  })");
  Lts la = expand(any);
  CHECK(la.state_name(la.initial()) == "__init");
  CHECK(la.num_states() == 1 + 3 * 2);
  int fanout = 0;
  for (const auto& t : la.transitions())
    if (la.alphabet()[static_cast<size_t>(t.event)] == "auto_init_chooser") {
      ++fanout;
      CHECK(t.src == la.initial());
    }
  CHECK(fanout == 3);  // k free, f pinned to its init
  CHECK(oracle::raw_of(la) == oracle::raw_expand(any));

  // Bound enforcement.
  GuardedTs big = parse_model_ok(R"(model m {
    var a in [0, 99] init 0
    var b in [0, 99] init 0
    loc l initial
  })");
  CHECK_THROWS_AS(expand(big, 1000), BoundExceeded);
}

TEST_CASE("randomized guarded models agree with the brute-force expansion") {
  oracle::Rng rng(0xB0B0);
  const char* locs[] = {"p", "q", "r"};
  const char* events[] = {"e0", "e1", "e2", "e3"};
  for (int round = 0; round < 200; ++round) {
    GuardedTs g;
    g.name = "m";
    int nv = rng.below(3);  // 0..2 variables
    for (int v = 0; v < nv; ++v) {
      LayerVar var;
      var.name = std::string(1, static_cast<char>('x' + v));
      var.lo = rng.below(3) - 1;
      var.hi = var.lo + rng.below(4);
      var.init_any = rng.below(4) == 0;
      var.init = var.lo + rng.below(var.hi - var.lo + 1);
      g.variables.push_back(var);
    }
    int nl = 1 + rng.below(3);
    for (int i = 0; i < nl; ++i) g.locations.push_back({locs[i], i == 0, {}});
    int ne = rng.below(7);
    for (int i = 0; i < ne; ++i) {
      LayerEdge e;
      e.src = locs[rng.below(nl)];
      e.dst = locs[rng.below(nl)];
      e.event = events[rng.below(4)];
      if (nv > 0 && rng.flip()) {
        const LayerVar& var = g.variables[static_cast<size_t>(rng.below(nv))];
        auto op = static_cast<VarGuard::Op>(rng.below(6));
        if (nv == 2 && rng.below(3) == 0)
          e.guard = VarGuard::make_cmp_var(var.name, op, g.variables[0].name);
        else
          e.guard = VarGuard::make_cmp_const(var.name, op, var.lo + rng.below(3));
        if (rng.below(3) == 0) e.guard = VarGuard::make_not(e.guard);
      }
      if (nv > 0 && rng.flip()) {
        const LayerVar& var = g.variables[static_cast<size_t>(rng.below(nv))];
        AffineExpr ae;
        ae.constant = rng.below(3) - 1;
        if (rng.flip()) ae.terms.emplace_back(rng.below(3) - 1, var.name);
        e.updates.push_back({var.name, ae, {}});
      }
      g.edges.push_back(std::move(e));
    }
    CAPTURE(round);
    Lts got = expand(g);
    oracle::RawLts want = oracle::raw_expand(g);
    CHECK(oracle::raw_of(got) == want);
  }
}

TEST_CASE("abstract builtin models accept exactly the interface") {
  CompiledSkillset cs = compiled_listing1();
  Lts f = builtin_abstract_functional(cs.skills[0]);
  CHECK(f.name() == "F_goto");
  CHECK(f.num_states() == 1);
  CHECK(f.transitions().size() == 6);
  for (const auto& e : cs.skills[0].functional_interface())
    CHECK(f.has_transition(0, f.event_index(e), 0));

  Lts d = builtin_abstract_decision({cs.skills[0]});
  CHECK(d.name() == "D");
  CHECK(d.transitions().size() == 2);
  CHECK(d.has_transition(0, d.event_index("request_goto"), 0));
  CHECK(d.has_transition(0, d.event_index("interrupt_goto"), 0));
}

TEST_CASE("refined navigation builtin equals its narrative description") {
  for (auto [bmax, dmax] : {std::pair{2, 1}, {3, 1}, {6, 2}, {5, 3}}) {
    CAPTURE(bmax);
    CAPTURE(dmax);
    GuardedTs g = builtin_refined_goto(bmax, dmax);
    CHECK(oracle::raw_of(expand(g)) == oracle::raw_refined_goto(bmax, dmax));
    CHECK(g.event_map.at("battery_critical_sync") == "auto_battery_Normal_Critical");
    CHECK(g.removed_events == std::vector<std::string>{"auto_battery_Critical_Normal"});
  }
  CHECK_THROWS_AS(builtin_refined_goto(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(builtin_refined_goto(6, 0), std::invalid_argument);
}

TEST_CASE("closing the network with the abstract models") {
  CompiledSkillset cs = compiled_listing1();

  // Uncovered interfaces are an error unless auto-abstract fills them in.
  auto bare = close_network(cs, {});
  CHECK_FALSE(bare.ok());
  CHECK(any_error_contains(bare.diagnostics, "functional interface of skill goto"));
  CHECK(any_error_contains(bare.diagnostics, "decision interface of skill goto"));

  AttachOptions opts;
  opts.auto_abstract = true;
  auto res = close_network(cs, {}, opts);
  REQUIRE(res.ok());
  const ClosedNetwork& closed = *res.closed;
  REQUIRE(closed.network.components().size() == 5);
  CHECK(closed.network.components()[0].name() == "goto");
  CHECK(closed.network.components()[1].name() == "motion");
  CHECK(closed.network.components()[2].name() == "battery");
  CHECK(closed.network.components()[3].name() == "F_goto");
  CHECK(closed.network.components()[4].name() == "D");
  CHECK(closed.model_components == std::vector<std::string>{"F_goto", "D"});
  CHECK(closed.internal_events.empty());

  ReachStats stats = closed.network.reachable(100000);
  CHECK(stats.states == 22);
  CHECK(stats.deadlocks == 0);
}

TEST_CASE("closing the network with a hand-written functional model") {
  CompiledSkillset cs = compiled_listing1();
  GuardedTs nav = parse_model_ok(R"(model nav for functional goto {
    loc idle initial
    loc busy
    edge idle -> idle on validate_success
    edge idle -> idle on validate_failure
    edge idle -> busy on start_hook
    edge busy -> idle on success
    edge busy -> idle on failure
    edge busy -> idle on interrupted
  })");
  AttachOptions opts;
  opts.auto_abstract = true;
  auto res = close_network(cs, {nav}, opts);
  REQUIRE(res.ok());
  // Short names were resolved against the bound skill's interface.
  const Lts* navc = nullptr;
  for (const auto& c : res.closed->network.components())
    if (c.name() == "nav") navc = &c;
  REQUIRE(navc != nullptr);
  CHECK(navc->event_index("success_goto_arrived") >= 0);
  CHECK(navc->event_index("success") < 0);
  // Only the decision side was synthesized.
  CHECK(res.closed->model_components == std::vector<std::string>{"nav", "D"});

  // Covering the same interface twice is rejected.
  GuardedTs nav2 = nav;
  nav2.name = "nav2";
  auto dup = close_network(cs, {nav, nav2}, opts);
  CHECK_FALSE(dup.ok());
  CHECK(any_error_contains(dup.diagnostics, "covered by both"));

  // Ignoring part of the interface is a warning, not an error.
  GuardedTs partial = parse_model_ok(R"(model partial for functional goto {
    loc idle initial
    loc busy
    edge idle -> idle on validate_success
    edge idle -> idle on validate_failure
    edge idle -> busy on start_hook
    edge busy -> idle on success
    edge busy -> idle on interrupted
  })");
  auto part = close_network(cs, {partial}, opts);
  REQUIRE(part.ok());
  CHECK(any_warning_contains(part.diagnostics, "failure_goto_blocked"));
}

TEST_CASE("conformance and collision rules when closing") {
  CompiledSkillset cs = compiled_listing1();
  AttachOptions opts;
  opts.auto_abstract = true;

  // A bound model may not synchronize outside its interface.
  GuardedTs wrong = parse_model_ok(R"(model wrong for decision goto {
    loc p initial
    edge p -> p on start_hook
  })");
  auto res = close_network(cs, {wrong}, opts);
  CHECK_FALSE(res.ok());
  CHECK(any_error_contains(res.diagnostics, "event start_hook of model wrong"));

  // An unbound model may watch autonomous events but not skill events.
  GuardedTs watcher = parse_model_ok(R"(model watcher {
    loc w initial
    edge w -> w on auto_motion_Off_On
  })");
  CHECK(close_network(cs, {watcher}, opts).ok());
  GuardedTs spy = parse_model_ok(R"(model spy {
    loc w initial
    edge w -> w on request_goto
  })");
  auto spy_res = close_network(cs, {spy}, opts);
  CHECK_FALSE(spy_res.ok());
  CHECK(any_error_contains(spy_res.diagnostics, "autonomous resource event"));

  // Internal events must not collide with network events or other models.
  GuardedTs clash = parse_model_ok(R"(model clash {
    loc w initial
    edge w -> w on request_goto internal
  })");
  auto clash_res = close_network(cs, {clash}, opts);
  CHECK_FALSE(clash_res.ok());
  CHECK(any_error_contains(clash_res.diagnostics, "collides with a network event"));

  GuardedTs priv1 = parse_model_ok(R"(model priv1 {
    loc w initial
    edge w -> w on shared_private internal
  })");
  GuardedTs priv2 = parse_model_ok(R"(model priv2 {
    loc w initial
    edge w -> w on shared_private internal
  })");
  auto priv_res = close_network(cs, {priv1, priv2}, opts);
  CHECK_FALSE(priv_res.ok());
  CHECK(any_error_contains(priv_res.diagnostics, "declared by both"));

  // Component name collisions.
  GuardedTs named = parse_model_ok(R"(model battery {
    loc w initial
  })");
  auto named_res = close_network(cs, {named}, opts);
  CHECK_FALSE(named_res.ok());
  CHECK(any_error_contains(named_res.diagnostics, "collides with another component"));
}

TEST_CASE("closing with the refined builtin applies the coupling surgery") {
  CompiledSkillset cs = compiled_listing1();
  AttachOptions opts;
  opts.auto_abstract = true;
  auto res = close_network(cs, {builtin_refined_goto(6, 2)}, opts);
  REQUIRE(res.ok());
  const Network& net = *&res.closed->network;

  // The recharge event is gone from the whole network.
  CHECK(net.event_index("auto_battery_Critical_Normal") < 0);
  // The coupling event was renamed onto the battery's own flip event.
  const Lts* refined = nullptr;
  for (const auto& c : net.components())
    if (c.name() == "refined_goto") refined = &c;
  REQUIRE(refined != nullptr);
  CHECK(refined->event_index("auto_battery_Normal_Critical") >= 0);
  CHECK(refined->event_index("battery_critical_sync") < 0);
  // The stride counter stays private.
  std::set<std::string> internals(res.closed->internal_events.begin(),
                                  res.closed->internal_events.end());
  CHECK(internals == std::set<std::string>{"auto_init_refined_goto", "move"});

  // Removing an event that does not exist is only a warning.
  GuardedTs odd = builtin_refined_goto(6, 2);
  odd.removed_events.push_back("no_such_event");
  auto odd_res = close_network(cs, {odd}, opts);
  REQUIRE(odd_res.ok());
  CHECK(any_warning_contains(odd_res.diagnostics, "no_such_event"));
}

TEST_CASE("guard and affine evaluation reject unknown variables") {
  CHECK_THROWS_AS(eval_var_guard(VarGuard::make_cmp_const("zz", VarGuard::Op::Eq, 0), {}),
                  std::invalid_argument);
  AffineExpr e;
  e.terms.emplace_back(1, "zz");
  CHECK_THROWS_AS(eval_affine(e, {}), std::invalid_argument);
}
