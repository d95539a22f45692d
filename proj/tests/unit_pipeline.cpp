// End-to-end library runs on the bundled navigation skillset: compile, close
// with layer models, verify the shipped properties, and compare behaviors
// across abstraction levels.
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "skillmc/check.hpp"
#include "skillmc/compile.hpp"
#include "skillmc/layer.hpp"
#include "skillmc/skillset.hpp"
#include "support/oracles.hpp"
#include "support/trace_inclusion.hpp"

using namespace skillmc;

namespace {

std::string listing1_text() {
  std::ifstream in(std::string(SKILLMC_MODELS_DIR) + "/listing1.skl", std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CompiledSkillset compile_listing1() {
  auto parsed = parse_skillset(listing1_text());
  REQUIRE(parsed.ok());
  auto compiled = compile_skillset(*parsed.ast);
  REQUIRE(compiled.ok());
  return std::move(*compiled.compiled);
}

ClosedNetwork close_abstract(const CompiledSkillset& cs) {
  AttachOptions opts;
  opts.auto_abstract = true;
  auto res = close_network(cs, {}, opts);
  for (const auto& d : res.diagnostics) INFO(to_string(d));
  REQUIRE(res.ok());
  return std::move(*res.closed);
}

ClosedNetwork close_refined(const CompiledSkillset& cs, int bmax, int dmax) {
  AttachOptions opts;
  opts.auto_abstract = true;  // the decision layer stays abstract
  auto res = close_network(cs, {builtin_refined_goto(bmax, dmax)}, opts);
  for (const auto& d : res.diagnostics) INFO(to_string(d));
  REQUIRE(res.ok());
  return std::move(*res.closed);
}

LtlPtr parse_ok(const std::string& text) {
  auto res = parse_ltl(text);
  REQUIRE(res.formula.has_value());
  return *res.formula;
}

std::vector<oracle::RawLts> raw_components(const Network& net) {
  std::vector<oracle::RawLts> out;
  for (const auto& c : net.components()) out.push_back(oracle::raw_of(c));
  return out;
}

/// True iff some step of the lasso's cycle has `comp` in local state `state`.
bool cycle_visits(const Network& net, const Lasso& lasso, const std::string& comp,
                  const std::string& state) {
  int c = net.component_index(comp);
  REQUIRE(c >= 0);
  int s = net.component(c).state_index(state);
  REQUIRE(s >= 0);
  return std::any_of(lasso.cycle.begin(), lasso.cycle.end(), [&](const LassoStep& st) {
    return st.state[static_cast<size_t>(c)] == s;
  });
}

/// Longest count of `event` along any path of `product` from its initial
/// state. Requires the event to lie on no cycle (checked via convergence).
int max_event_count(const Lts& product, const std::string& event) {
  const int n = product.num_states();
  const int ev = product.event_index(event);
  REQUIRE(ev >= 0);
  std::vector<int> best(static_cast<size_t>(n), -1);
  best[static_cast<size_t>(product.initial())] = 0;
  bool changed = true;
  int rounds = 0;
  while (changed) {
    changed = false;
    REQUIRE(++rounds <= n + 1);  // would diverge if the event sat on a cycle
    for (const auto& t : product.transitions()) {
      if (best[static_cast<size_t>(t.src)] < 0) continue;
      int cand = best[static_cast<size_t>(t.src)] + (t.event == ev ? 1 : 0);
      if (cand > best[static_cast<size_t>(t.dst)]) {
        best[static_cast<size_t>(t.dst)] = cand;
        changed = true;
      }
    }
  }
  return *std::max_element(best.begin(), best.end());
}

}  // namespace

TEST_CASE("closing the bundled skillset with permissive models") {
  CompiledSkillset cs = compile_listing1();
  ClosedNetwork closed = close_abstract(cs);

  std::vector<std::string> names;
  for (const auto& c : closed.network.components()) names.push_back(c.name());
  CHECK(names == std::vector<std::string>{"goto", "motion", "battery", "F_goto", "D"});
  CHECK(closed.model_components == std::vector<std::string>{"F_goto", "D"});
  CHECK(closed.internal_events.empty());

  ReachStats stats = closed.network.reachable(1'000'000);
  CHECK(stats.states == 22);
  CHECK(stats.transitions == 75);
  CHECK(stats.deadlocks == 0);
  CHECK_FALSE(stats.truncated);

  // The same numbers from the definitional breadth-first exploration.
  oracle::RawReach raw = oracle::raw_reachable(raw_components(closed.network));
  CHECK(raw.states.size() == stats.states);
  CHECK(raw.transitions == stats.transitions);
  CHECK(raw.deadlocks == stats.deadlocks);
}

TEST_CASE("bundled property verdicts at the permissive level") {
  CompiledSkillset cs = compile_listing1();
  Network net = close_abstract(cs).network;

  LtlPtr quiescence = parse_ok("F G !(goto @ Running)");
  LtlPtr conditional = parse_ok("F G (battery @ Critical) -> F G !(goto @ Running)");
  LtlPtr never_runs = parse_ok("G !(goto @ Running)");

  for (Engine eng : {Engine::Ndfs, Engine::Scc}) {
    CAPTURE(eng == Engine::Ndfs ? "ndfs" : "scc");

    // With a fully permissive environment the skill can run forever.
    Verdict v1 = model_check(net, quiescence, eng);
    REQUIRE_FALSE(v1.holds);
    REQUIRE(v1.lasso.has_value());
    CHECK(cycle_visits(net, *v1.lasso, "goto", "Running"));
    LassoWord w = lasso_word(net.stutter_close(), *v1.lasso);
    CHECK(eval_word(negate(quiescence), w));

    // But if the battery stays critical, requests stop being granted.
    CHECK(model_check(net, conditional, eng).holds);

    // Executability: the skill does reach Running on some run.
    Verdict v3 = model_check(net, never_runs, eng);
    REQUIRE_FALSE(v3.holds);
    bool running_seen = cycle_visits(net, *v3.lasso, "goto", "Running");
    for (const auto& st : v3.lasso->prefix) {
      int c = net.component_index("goto");
      if (st.state[static_cast<size_t>(c)] == net.component(c).state_index("Running"))
        running_seen = true;
    }
    CHECK(running_seen);
  }
}

TEST_CASE("the bounded-battery navigation model changes the verdict") {
  CompiledSkillset cs = compile_listing1();
  ClosedNetwork closed = close_refined(cs, 6, 2);

  std::vector<std::string> names;
  for (const auto& c : closed.network.components()) names.push_back(c.name());
  CHECK(names == std::vector<std::string>{"goto", "motion", "battery", "refined_goto", "D"});
  CHECK(std::set<std::string>(closed.internal_events.begin(), closed.internal_events.end()) ==
        std::set<std::string>{"auto_init_refined_goto", "move"});
  // The recharge transition is surgically removed by the coupling model.
  CHECK(closed.network.event_index("auto_battery_Critical_Normal") < 0);

  ReachStats stats = closed.network.reachable(1'000'000);
  CHECK(stats.states == 353);
  CHECK(stats.transitions == 909);
  CHECK(stats.deadlocks == 0);

  LtlPtr quiescence = parse_ok("F G !(goto @ Running)");
  for (Engine eng : {Engine::Ndfs, Engine::Scc}) {
    CHECK(model_check(closed.network, quiescence, eng).holds);
    CHECK(model_check(closed.network,
                      parse_ok("F G (battery @ Critical) -> F G !(goto @ Running)"), eng)
              .holds);
    // The skill still runs at least once: executability is preserved.
    CHECK_FALSE(model_check(closed.network, parse_ok("G !(goto @ Running)"), eng).holds);
  }
}

TEST_CASE("mission capacity equals half the initial battery budget") {
  CompiledSkillset cs = compile_listing1();
  // Every unit of distance costs two battery units and the battery never
  // recharges, so a battery of B allows floor(B/2) distance-1 missions.
  struct Case {
    int bmax, dmax, missions;
  };
  for (const Case& c : {Case{2, 1, 1}, Case{3, 1, 1}, Case{5, 2, 2}, Case{6, 2, 3}}) {
    CAPTURE(c.bmax);
    CAPTURE(c.dmax);
    ClosedNetwork closed = close_refined(cs, c.bmax, c.dmax);
    Lts product = closed.network.product_explicit(1'000'000);
    CHECK(max_event_count(product, "success_goto_arrived") == c.missions);
  }
}

TEST_CASE("oracle and engine agree on a small refined closure") {
  CompiledSkillset cs = compile_listing1();
  ClosedNetwork closed = close_refined(cs, 2, 1);
  ReachStats stats = closed.network.reachable(1'000'000);
  CHECK(stats.states == 77);
  CHECK(stats.transitions == 206);
  CHECK(stats.deadlocks == 0);
  oracle::RawReach raw = oracle::raw_reachable(raw_components(closed.network));
  CHECK(raw.states.size() == stats.states);
  CHECK(raw.transitions == stats.transitions);
  CHECK(raw.deadlocks == stats.deadlocks);
}

TEST_CASE("visible refined behavior is contained in the permissive closure") {
  CompiledSkillset cs = compile_listing1();
  ClosedNetwork abstract = close_abstract(cs);
  ClosedNetwork refined = close_refined(cs, 2, 1);

  std::set<std::string> refined_internal(refined.internal_events.begin(),
                                         refined.internal_events.end());
  std::set<std::string> abstract_internal(abstract.internal_events.begin(),
                                          abstract.internal_events.end());

  trace::InclusionResult fwd = trace::visible_inclusion(
      refined.network, refined_internal, abstract.network, abstract_internal, 10);
  if (!fwd.included) {
    std::string seq;
    for (const auto& e : fwd.witness) seq += e + " ";
    CAPTURE(seq);
  }
  CHECK(fwd.included);

  // The converse fails. The shortest divergence is the recharge transition,
  // which the coupling model removes outright.
  trace::InclusionResult rev = trace::visible_inclusion(
      abstract.network, abstract_internal, refined.network, refined_internal, 10);
  REQUIRE_FALSE(rev.included);
  CHECK(rev.witness ==
        std::vector<std::string>{"auto_battery_Normal_Critical", "auto_battery_Critical_Normal"});

  // Even granting the recharge difference, the permissive functional model
  // may validate a request right after the battery goes critical, which the
  // budget-coupled model rules out (critical implies a budget below the
  // validation threshold).
  Network abstract_no_recharge = abstract.network.without_event("auto_battery_Critical_Normal");
  trace::InclusionResult rev2 = trace::visible_inclusion(
      abstract_no_recharge, abstract_internal, refined.network, refined_internal, 10);
  REQUIRE_FALSE(rev2.included);
  CHECK(rev2.witness ==
        std::vector<std::string>{"request_goto", "precond_success_goto",
                                 "auto_battery_Normal_Critical", "validate_success_goto"});
}

TEST_CASE("formatting and recompiling reproduces the build description") {
  auto parsed = parse_skillset(listing1_text());
  REQUIRE(parsed.ok());
  auto first = compile_skillset(*parsed.ast);
  REQUIRE(first.ok());

  auto reparsed = parse_skillset(format_skillset(*parsed.ast));
  REQUIRE(reparsed.ok());
  auto second = compile_skillset(*reparsed.ast);
  REQUIRE(second.ok());

  CHECK(manifest_json(*first.compiled) == manifest_json(*second.compiled));
  CHECK(manifest_json(*first.compiled) == manifest_json(*first.compiled));
}
