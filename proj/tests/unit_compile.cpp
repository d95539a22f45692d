// Skillset compilation: lifecycle automata, resource automata, event scheme,
// precondition normalization, invariant monitoring, manifest output.
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "skillmc/compile.hpp"
#include "skillmc/skillset.hpp"

using namespace skillmc;

namespace {

SkillsetAst parse_ok(const std::string& text) {
  auto res = parse_skillset(text);
  REQUIRE(res.ok());
  return *res.ast;
}

CompiledSkillset compile_ok(const std::string& text) {
  auto res = compile_skillset(parse_ok(text));
  for (const auto& d : res.diagnostics) INFO(to_string(d));
  REQUIRE(res.ok());
  return std::move(*res.compiled);
}

std::string listing1_text() {
  std::ifstream in(std::string(SKILLMC_MODELS_DIR) + "/listing1.skl", std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> alphabet_of(const Lts& l) {
  return {l.alphabet().begin(), l.alphabet().end()};
}

int count_event(const Lts& l, const std::string& ev) {
  int n = 0;
  for (const auto& t : l.transitions())
    if (l.alphabet()[static_cast<size_t>(t.event)] == ev) ++n;
  return n;
}

GuardAtom atom(std::string r, bool eq, std::string s) { return {std::move(r), eq, std::move(s), {}, {}}; }

}  // namespace

TEST_CASE("guard DNF conversion") {
  // (a == X || b == Y) && c == Z  ->  two disjuncts, each ending with c == Z.
  GuardExpr g = GuardExpr::make_and(
      GuardExpr::make_or(GuardExpr::make_atom(atom("a", true, "X")),
                         GuardExpr::make_atom(atom("b", true, "Y"))),
      GuardExpr::make_atom(atom("c", true, "Z")));
  auto dnf = guard_to_dnf(g, 64);
  REQUIRE(dnf.has_value());
  REQUIRE(dnf->size() == 2);
  CHECK((*dnf)[0] == DnfDisjunct{atom("a", true, "X"), atom("c", true, "Z")});
  CHECK((*dnf)[1] == DnfDisjunct{atom("b", true, "Y"), atom("c", true, "Z")});

  // Negation flips atoms: !(a == X && b == Y) == a != X || b != Y.
  GuardExpr n = GuardExpr::make_not(
      GuardExpr::make_and(GuardExpr::make_atom(atom("a", true, "X")),
                          GuardExpr::make_atom(atom("b", true, "Y"))));
  auto ndnf = guard_to_dnf(n, 64);
  REQUIRE(ndnf.has_value());
  REQUIRE(ndnf->size() == 2);
  CHECK((*ndnf)[0] == DnfDisjunct{atom("a", false, "X")});
  CHECK((*ndnf)[1] == DnfDisjunct{atom("b", false, "Y")});

  // True has one empty disjunct.
  auto t = guard_to_dnf(GuardExpr::make_true(), 64);
  REQUIRE(t.has_value());
  REQUIRE(t->size() == 1);
  CHECK((*t)[0].empty());

  // Distribution blow-up beyond the bound is reported as nullopt.
  GuardExpr big = GuardExpr::make_atom(atom("r0", true, "S"));
  for (int i = 1; i < 8; ++i)
    big = GuardExpr::make_and(
        big, GuardExpr::make_or(GuardExpr::make_atom(atom("p" + std::to_string(i), true, "A")),
                                GuardExpr::make_atom(atom("q" + std::to_string(i), true, "B"))));
  CHECK_FALSE(guard_to_dnf(big, 64).has_value());
}

TEST_CASE("eval_guard matches the four-state truth table of the bundled precondition") {
  auto ast = parse_ok(listing1_text());
  const GuardExpr& pre = ast.skills[0].precondition;
  auto val = [&](const std::string& motion, const std::string& battery) {
    return eval_guard(pre, {{"motion", motion}, {"battery", battery}});
  };
  CHECK(val("Off", "Normal"));
  CHECK_FALSE(val("Off", "Critical"));
  CHECK_FALSE(val("On", "Normal"));
  CHECK_FALSE(val("On", "Critical"));
}

TEST_CASE("lifecycle automaton of the bundled skill") {
  auto ast = parse_ok(listing1_text());
  Lts lc = lifecycle_automaton(ast, ast.skills[0]);
  CHECK(lc.name() == "goto");
  REQUIRE(lc.num_states() == 6);
  CHECK(lc.states() == std::vector<std::string>{"Ready", "Checking", "Validating", "Starting",
                                                "Running", "Interrupting"});
  CHECK(lc.state_name(lc.initial()) == "Ready");
  CHECK(lc.transitions().size() == 12);

  auto has = [&](const char* s, const char* e, const char* d) {
    return lc.has_transition(lc.state_index(s), lc.event_index(e), lc.state_index(d));
  };
  CHECK(has("Ready", "request_goto", "Checking"));
  CHECK(has("Checking", "precond_success_goto", "Validating"));
  CHECK(has("Checking", "precond_failure_goto_motion", "Ready"));
  CHECK(has("Checking", "precond_failure_goto_battery", "Ready"));
  CHECK(has("Validating", "validate_success_goto", "Starting"));
  CHECK(has("Validating", "validate_failure_goto", "Ready"));
  CHECK(has("Starting", "start_hook_goto", "Running"));
  CHECK(has("Running", "success_goto_arrived", "Ready"));
  CHECK(has("Running", "failure_goto_blocked", "Ready"));
  CHECK(has("Running", "interrupt_goto", "Interrupting"));
  CHECK(has("Interrupting", "interrupted_goto", "Ready"));
  CHECK(has("Running", "inv_violation_goto_in_movement_motion", "Ready"));
}

TEST_CASE("compiled network of the bundled skillset") {
  CompiledSkillset cs = compile_ok(listing1_text());
  CHECK(cs.name == "custom_robot");
  REQUIRE(cs.network.components().size() == 3);  // goto lifecycle, motion, battery

  // The compiled lifecycle gains one blocking self-loop per non-Running state
  // for the autonomous flip that would silently falsify the invariant.
  const Lts& lc = cs.network.components()[0];
  CHECK(lc.name() == "goto");
  CHECK(lc.transitions().size() == 17);  // 12 core + 5 blocking loops
  CHECK(count_event(lc, "auto_motion_On_Off") == 5);
  int running = lc.state_index("Running");
  CHECK_FALSE(lc.has_transition(running, lc.event_index("auto_motion_On_Off"), running));

  const Lts& motion = cs.network.components()[1];
  CHECK(motion.name() == "motion");
  CHECK(motion.num_states() == 2);
  CHECK(motion.transitions().size() == 14);
  CHECK(alphabet_of(motion).size() == 9);
  auto mhas = [&](const char* s, const char* e, const char* d) {
    return motion.has_transition(motion.state_index(s), motion.event_index(e),
                                 motion.state_index(d));
  };
  CHECK(mhas("On", "auto_motion_On_Off", "Off"));
  CHECK(mhas("Off", "auto_motion_Off_On", "On"));
  CHECK(mhas("Off", "precond_success_goto", "Off"));         // satisfies motion == Off
  CHECK_FALSE(mhas("On", "precond_success_goto", "On"));
  CHECK(mhas("On", "precond_failure_goto_motion", "On"));    // violates motion == Off
  CHECK(mhas("Off", "start_hook_goto", "On"));               // effect from every state
  CHECK(mhas("On", "start_hook_goto", "On"));
  CHECK(mhas("On", "success_goto_arrived", "Off"));
  CHECK(mhas("Off", "success_goto_arrived", "Off"));
  CHECK(mhas("On", "interrupted_goto", "Off"));
  // The interrupt effect covers motion, so the violation event applies it.
  CHECK(mhas("On", "inv_violation_goto_in_movement_motion", "Off"));
  CHECK(mhas("Off", "inv_violation_goto_in_movement_motion", "Off"));

  const Lts& battery = cs.network.components()[2];
  CHECK(battery.transitions().size() == 4);
  CHECK(alphabet_of(battery).size() == 4);
  auto bhas = [&](const char* s, const char* e, const char* d) {
    return battery.has_transition(battery.state_index(s), battery.event_index(e),
                                  battery.state_index(d));
  };
  CHECK(bhas("Normal", "precond_success_goto", "Normal"));   // battery != Critical
  CHECK(bhas("Critical", "precond_failure_goto_battery", "Critical"));

  // Interface summaries.
  REQUIRE(cs.skills.size() == 1);
  const SkillEvents& ev = cs.skills[0];
  CHECK(ev.functional_interface() ==
        std::vector<std::string>{"validate_success_goto", "validate_failure_goto",
                                 "start_hook_goto", "success_goto_arrived",
                                 "failure_goto_blocked", "interrupted_goto"});
  CHECK(ev.decision_interface() == std::vector<std::string>{"request_goto", "interrupt_goto"});
  CHECK(ev.short_names().at("success") == "success_goto_arrived");
  CHECK(ev.short_names().at("request") == "request_goto");
  CHECK(cs.is_autonomous_event("auto_battery_Normal_Critical"));
  CHECK_FALSE(cs.is_autonomous_event("request_goto"));
  CHECK(cs.find_skill("goto") == &cs.skills[0]);
  CHECK(cs.find_resource("battery") == &cs.resources[1]);
}

TEST_CASE("invariant on a resource the interrupt does not cover gets capture transitions") {
  CompiledSkillset cs = compile_ok(R"(skillset plant {
    resource { power { state { Ok Low } initial Ok transition all } }
    skill watch {
      precondition { power == Ok }
      invariant { live { guard power == Ok } }
      success { done { } }
    }
  })");
  const Lts& lc = cs.network.components()[0];
  const Lts& power = cs.network.components()[1];

  // Resource side: the autonomous flip out of the invariant is relabeled as
  // the violation event, and violating states witness it with a self-loop.
  auto phas = [&](const char* s, const char* e, const char* d) {
    return power.has_transition(power.state_index(s), power.event_index(e),
                                power.state_index(d));
  };
  CHECK(phas("Ok", "inv_violation_watch_live_power", "Low"));
  CHECK(phas("Low", "inv_violation_watch_live_power", "Low"));

  // Lifecycle side: the plain flip is blocked only while Running.
  int ev = lc.event_index("auto_power_Ok_Low");
  REQUIRE(ev >= 0);
  for (const char* st : {"Ready", "Checking", "Validating", "Starting", "Interrupting"})
    CHECK(lc.has_transition(lc.state_index(st), ev, lc.state_index(st)));
  CHECK(lc.targets(lc.state_index("Running"), ev).empty());
  CHECK(lc.has_transition(lc.state_index("Running"),
                          lc.event_index("inv_violation_watch_live_power"),
                          lc.state_index("Ready")));

  // A skill without an interrupt block still has the full lifecycle shape.
  CHECK(lc.has_transition(lc.state_index("Running"), lc.event_index("interrupt_watch"),
                          lc.state_index("Interrupting")));
}

TEST_CASE("multi-disjunct preconditions produce one success event per disjunct") {
  CompiledSkillset cs = compile_ok(R"(skillset s {
    resource {
      a { state { X Y } initial X transition all }
      b { state { P Q } initial P transition all }
    }
    skill k {
      precondition { a == X || b == Q }
      success { ok { } }
    }
  })");
  const SkillEvents& ev = cs.skills[0];
  CHECK(ev.precond_success == std::vector<std::string>{"precond_success_k_1",
                                                       "precond_success_k_2"});
  // One failure event per choice of violated conjunct across disjuncts; both
  // disjuncts are singletons here, so exactly one choice function exists.
  REQUIRE(ev.precond_failure.size() == 1);

  const Lts& lc = cs.network.components()[0];
  CHECK(lc.has_transition(lc.state_index("Checking"), lc.event_index("precond_success_k_1"),
                          lc.state_index("Validating")));
  CHECK(lc.has_transition(lc.state_index("Checking"), lc.event_index("precond_success_k_2"),
                          lc.state_index("Validating")));
  CHECK(lc.has_transition(lc.state_index("Checking"), lc.event_index(ev.precond_failure[0]),
                          lc.state_index("Ready")));

  // The failure event self-loops exactly where its picked conjuncts fail.
  const Lts& a = cs.network.components()[1];
  const Lts& b = cs.network.components()[2];
  CHECK(a.has_transition(a.state_index("Y"), a.event_index(ev.precond_failure[0]),
                         a.state_index("Y")));
  CHECK(a.targets(a.state_index("X"), a.event_index(ev.precond_failure[0])).empty());
  CHECK(b.has_transition(b.state_index("P"), b.event_index(ev.precond_failure[0]),
                         b.state_index("P")));
}

TEST_CASE("a skill without a precondition checks trivially") {
  CompiledSkillset cs = compile_ok(R"(skillset s {
    resource { r { state { A } initial A transition all } }
    skill k { success { ok { } } }
  })");
  const SkillEvents& ev = cs.skills[0];
  CHECK(ev.precond_success == std::vector<std::string>{"precond_success_k"});
  CHECK(ev.precond_failure.empty());
  const Lts& lc = cs.network.components()[0];
  // Checking has exactly one outgoing transition: the trivial success.
  int checking = lc.state_index("Checking");
  int outgoing = 0;
  for (const auto& t : lc.transitions()) outgoing += t.src == checking;
  CHECK(outgoing == 1);
  // No resource participates in the trivial check.
  const Lts& r = cs.network.components()[1];
  CHECK(r.event_index("precond_success_k") < 0);
}

TEST_CASE("generated event names may not collide") {
  // failure case "Off" of skill "motion_On" forges "failure_motion_On_Off",
  // which is also the autonomous flip event of resource motion_On... spelled
  // differently here: auto_<r>_<from>_<to> for r=motion, from=On, to=Off is
  // "auto_motion_On_Off"; the skill "motion" with failure case "On_Off" forges
  // "failure_motion_On_Off" while skill "motion_On" with case "Off" forges the
  // same string.
  auto res = compile_skillset(parse_ok(R"(skillset s {
    resource { r { state { A B } initial A transition all } }
    skill motion { failure { On_Off { } } }
    skill motion_On { failure { Off { } } }
  })"));
  CHECK_FALSE(res.ok());
  bool found = false;
  for (const auto& d : res.diagnostics)
    found |= d.message.find("event name collision: failure_motion_On_Off") != std::string::npos;
  CHECK(found);
}

TEST_CASE("explicit transition lists restrict the autonomous events") {
  CompiledSkillset cs = compile_ok(R"(skillset s {
    resource { door { state { Open Shut Locked } initial Shut
                      transition { Open -> Shut Shut -> Open Shut -> Locked } } }
    skill noop { success { ok { } } }
  })");
  const ResourceInfo* door = cs.find_resource("door");
  REQUIRE(door != nullptr);
  CHECK(door->autonomous_events ==
        std::vector<std::string>{"auto_door_Open_Shut", "auto_door_Shut_Open",
                                 "auto_door_Shut_Locked"});
  const Lts& d = cs.network.components()[1];
  CHECK(d.event_index("auto_door_Locked_Open") < 0);
  CHECK(d.event_index("auto_door_Locked_Shut") < 0);
}

TEST_CASE("manifest JSON is deterministic and structured as documented") {
  CompiledSkillset cs = compile_ok(listing1_text());
  std::string m1 = manifest_json(cs);
  std::string m2 = manifest_json(cs);
  CHECK(m1 == m2);
  CHECK(m1.back() == '\n');

  auto j = nlohmann::json::parse(m1);
  CHECK(j.at("skillset") == "custom_robot");
  REQUIRE(j.at("skills").size() == 1);
  CHECK(j["skills"][0].at("name") == "goto");
  CHECK(j["skills"][0].at("functional_interface").size() == 6);
  CHECK(j["skills"][0].at("decision_interface") ==
        nlohmann::json::array({"request_goto", "interrupt_goto"}));
  REQUIRE(j.at("resources").size() == 2);
  CHECK(j["resources"][1].at("initial") == "Normal");
  CHECK(j["resources"][0].at("autonomous_events").size() == 2);
}

TEST_CASE("dot rendering of the compiled network includes the interface legend") {
  CompiledSkillset cs = compile_ok(listing1_text());
  std::string dot = compiled_dot(cs);
  CHECK(dot.find("// skillset custom_robot") != std::string::npos);
  CHECK(dot.find("// skill goto functional interface:") != std::string::npos);
  CHECK(dot.find("digraph \"motion\"") != std::string::npos);
  CHECK(dot.find("digraph \"goto\"") != std::string::npos);
}
