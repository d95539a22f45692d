#include "skillmc/compile.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace skillmc {

namespace {

/// Negation-normal form with negations absorbed into atoms (== flips to !=).
GuardExpr guard_nnf(const GuardExpr& g, bool neg) {
  switch (g.kind) {
    case GuardExpr::Kind::True:
      if (!neg) return GuardExpr::make_true();
      // A negated True is unsatisfiable; callers turn it into zero disjuncts.
      return GuardExpr::make_not(GuardExpr::make_true());
    case GuardExpr::Kind::Atom: {
      GuardAtom a = g.atom;
      if (neg) a.equal = !a.equal;
      return GuardExpr::make_atom(std::move(a));
    }
    case GuardExpr::Kind::Not:
      return guard_nnf(g.kids[0], !neg);
    case GuardExpr::Kind::And: {
      GuardExpr l = guard_nnf(g.kids[0], neg);
      GuardExpr r = guard_nnf(g.kids[1], neg);
      return neg ? GuardExpr::make_or(std::move(l), std::move(r))
                 : GuardExpr::make_and(std::move(l), std::move(r));
    }
    case GuardExpr::Kind::Or: {
      GuardExpr l = guard_nnf(g.kids[0], neg);
      GuardExpr r = guard_nnf(g.kids[1], neg);
      return neg ? GuardExpr::make_and(std::move(l), std::move(r))
                 : GuardExpr::make_or(std::move(l), std::move(r));
    }
  }
  return GuardExpr::make_true();
}

void push_atom(DnfDisjunct& d, const GuardAtom& a) {
  for (const auto& x : d)
    if (x == a) return;
  d.push_back(a);
}

// DNF of an NNF guard; empty result = unsatisfiable.
bool dnf_of_nnf(const GuardExpr& g, size_t bound, std::vector<DnfDisjunct>& out) {
  switch (g.kind) {
    case GuardExpr::Kind::True:
      out.push_back({});
      return out.size() <= bound;
    case GuardExpr::Kind::Atom:
      out.push_back({g.atom});
      return out.size() <= bound;
    case GuardExpr::Kind::Not:  // only !true survives NNF
      return true;
    case GuardExpr::Kind::Or: {
      if (!dnf_of_nnf(g.kids[0], bound, out)) return false;
      return dnf_of_nnf(g.kids[1], bound, out);
    }
    case GuardExpr::Kind::And: {
      std::vector<DnfDisjunct> left, right;
      if (!dnf_of_nnf(g.kids[0], bound, left)) return false;
      if (!dnf_of_nnf(g.kids[1], bound, right)) return false;
      for (const auto& l : left) {
        for (const auto& r : right) {
          DnfDisjunct d = l;
          for (const auto& a : r) push_atom(d, a);
          out.push_back(std::move(d));
          if (out.size() > bound) return false;
        }
      }
      return true;
    }
  }
  return true;
}

bool atom_holds(const GuardAtom& a, const std::string& state) {
  return a.equal ? state == a.state : state != a.state;
}

std::string auto_event(const std::string& resource, const std::string& from,
                       const std::string& to) {
  return "auto_" + resource + "_" + from + "_" + to;
}

/// Allowed autonomous (from, to) pairs of a resource, in deterministic order.
std::vector<std::pair<std::string, std::string>> auto_pairs(const ResourceDecl& r) {
  std::vector<std::pair<std::string, std::string>> out;
  if (r.transitions.all) {
    for (const auto& from : r.states)
      for (const auto& to : r.states)
        if (from != to) out.emplace_back(from, to);
  } else {
    for (const auto& p : r.transitions.pairs)
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

/// Resources referenced by a disjunct, in first-appearance order.
std::vector<std::string> disjunct_resources(const DnfDisjunct& d) {
  std::vector<std::string> out;
  for (const auto& a : d)
    if (std::find(out.begin(), out.end(), a.resource) == out.end()) out.push_back(a.resource);
  return out;
}

/// States of `r` satisfying every atom of `d` that mentions `r`.
std::vector<std::string> sat_states(const ResourceDecl& r, const DnfDisjunct& d) {
  std::vector<std::string> out;
  for (const auto& s : r.states) {
    bool ok = true;
    for (const auto& a : d)
      if (a.resource == r.name && !atom_holds(a, s)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(s);
  }
  return out;
}

struct PrecondPlan {
  bool trivially_true = false;
  std::vector<DnfDisjunct> disjuncts;
  std::vector<std::string> success_events;  // parallel to disjuncts
  struct FailureEvent {
    std::string name;
    // (resource, disjunct index): the event requires the resource to violate
    // its conjunct in that disjunct.
    std::vector<std::pair<std::string, int>> picks;
  };
  std::vector<FailureEvent> failures;
};

struct InvariantPlan {
  std::string name;
  // per referenced resource (appearance order): conjunct atoms and event name
  std::vector<std::string> resources;
  std::vector<std::vector<GuardAtom>> atoms;
  std::vector<std::string> events;
};

struct SkillPlan {
  const SkillDecl* decl = nullptr;
  SkillEvents ev;
  PrecondPlan precond;
  std::vector<InvariantPlan> invariants;
  // effect-carrying events in deterministic order
  std::vector<std::pair<std::string, const std::vector<EffectStmt>*>> effect_events;
};

constexpr size_t kDnfBound = 64;

std::optional<SkillPlan> build_skill_plan(const SkillDecl& s, Diagnostics* diags) {
  SkillPlan plan;
  plan.decl = &s;
  plan.ev.skill = s.name;
  plan.ev.request = "request_" + s.name;
  plan.ev.validate_success = "validate_success_" + s.name;
  plan.ev.validate_failure = "validate_failure_" + s.name;
  plan.ev.start_hook = "start_hook_" + s.name;
  plan.ev.interrupt = "interrupt_" + s.name;
  plan.ev.interrupted = "interrupted_" + s.name;
  for (const auto& c : s.success_cases)
    plan.ev.success.emplace_back(c.name, "success_" + s.name + "_" + c.name);
  for (const auto& c : s.failure_cases)
    plan.ev.failure.emplace_back(c.name, "failure_" + s.name + "_" + c.name);

  // Precondition: success per DNF disjunct, failure per violation choice.
  auto dnf = guard_to_dnf(s.precondition, kDnfBound);
  if (!dnf) {
    if (diags)
      diags->push_back(Diagnostic::error(
          "precondition of skill " + s.name + " exceeds " + std::to_string(kDnfBound) +
              " disjuncts in disjunctive normal form",
          s.pos));
    return std::nullopt;
  }
  plan.precond.disjuncts = std::move(*dnf);
  plan.precond.trivially_true =
      plan.precond.disjuncts.size() == 1 && plan.precond.disjuncts[0].empty();
  if (plan.precond.disjuncts.size() == 1) {
    plan.precond.success_events.push_back("precond_success_" + s.name);
  } else {
    for (size_t k = 0; k < plan.precond.disjuncts.size(); ++k)
      plan.precond.success_events.push_back("precond_success_" + s.name + "_" +
                                            std::to_string(k + 1));
  }
  if (!plan.precond.trivially_true) {
    std::vector<std::vector<std::string>> res_lists;
    for (const auto& d : plan.precond.disjuncts) res_lists.push_back(disjunct_resources(d));
    if (plan.precond.disjuncts.size() == 1) {
      for (const auto& r : res_lists[0])
        plan.precond.failures.push_back(
            {"precond_failure_" + s.name + "_" + r, {{r, 0}}});
    } else {
      // One failure event per choice of a violated conjunct in every disjunct.
      size_t combos = 1;
      for (const auto& rl : res_lists) {
        combos *= rl.size();
        if (combos > kDnfBound) break;
      }
      if (combos > kDnfBound) {
        if (diags)
          diags->push_back(Diagnostic::error(
              "precondition of skill " + s.name + " requires more than " +
                  std::to_string(kDnfBound) + " failure synchronization events",
              s.pos));
        return std::nullopt;
      }
      std::vector<size_t> idx(res_lists.size(), 0);
      int counter = 0;
      while (true) {
        PrecondPlan::FailureEvent fe;
        fe.name = "precond_failure_" + s.name + "_" + std::to_string(++counter);
        for (size_t k = 0; k < res_lists.size(); ++k)
          fe.picks.emplace_back(res_lists[k][idx[k]], static_cast<int>(k));
        plan.precond.failures.push_back(std::move(fe));
        size_t k = res_lists.size();
        bool done = true;
        while (k > 0) {
          --k;
          if (++idx[k] < res_lists[k].size()) {
            done = false;
            break;
          }
          idx[k] = 0;
        }
        if (done) break;
      }
    }
  }
  plan.ev.precond_success = plan.precond.success_events;
  for (const auto& f : plan.precond.failures) plan.ev.precond_failure.push_back(f.name);

  // Invariants: conjunctive guards, one violation event per guarded resource.
  for (const auto& inv : s.invariants) {
    InvariantPlan ip;
    ip.name = inv.name;
    GuardExpr nnf = guard_nnf(inv.guard, false);
    std::vector<DnfDisjunct> idnf;
    dnf_of_nnf(nnf, kDnfBound, idnf);
    if (idnf.size() != 1) continue;  // validated earlier; defensive
    for (const auto& a : idnf[0]) {
      auto it = std::find(ip.resources.begin(), ip.resources.end(), a.resource);
      if (it == ip.resources.end()) {
        ip.resources.push_back(a.resource);
        ip.atoms.emplace_back();
        ip.events.push_back("inv_violation_" + s.name + "_" + inv.name + "_" + a.resource);
        ip.atoms.back().push_back(a);
      } else {
        ip.atoms[static_cast<size_t>(it - ip.resources.begin())].push_back(a);
      }
    }
    for (const auto& e : ip.events) plan.ev.inv_violation.push_back(e);
    plan.invariants.push_back(std::move(ip));
  }

  // Effect-carrying events.
  plan.effect_events.emplace_back(plan.ev.start_hook, &s.start_effects);
  for (size_t i = 0; i < s.success_cases.size(); ++i)
    plan.effect_events.emplace_back(plan.ev.success[i].second, &s.success_cases[i].effects);
  for (size_t i = 0; i < s.failure_cases.size(); ++i)
    plan.effect_events.emplace_back(plan.ev.failure[i].second, &s.failure_cases[i].effects);
  plan.effect_events.emplace_back(plan.ev.interrupted, &s.interrupt_effects);
  for (const auto& iv : plan.ev.inv_violation)
    plan.effect_events.emplace_back(iv, &s.interrupt_effects);
  return plan;
}

const char* kLifecycleStates[] = {"Ready",   "Checking", "Validating",
                                  "Starting", "Running",  "Interrupting"};

Lts lifecycle_from_plan(const SkillPlan& plan) {
  Lts lts(plan.decl->name);
  for (const char* st : kLifecycleStates) lts.add_state(st);
  lts.set_initial("Ready");
  lts.add_transition("Ready", plan.ev.request, "Checking");
  for (const auto& e : plan.precond.success_events)
    lts.add_transition("Checking", e, "Validating");
  for (const auto& f : plan.precond.failures) lts.add_transition("Checking", f.name, "Ready");
  lts.add_transition("Validating", plan.ev.validate_success, "Starting");
  lts.add_transition("Validating", plan.ev.validate_failure, "Ready");
  lts.add_transition("Starting", plan.ev.start_hook, "Running");
  for (const auto& [c, e] : plan.ev.success) lts.add_transition("Running", e, "Ready");
  for (const auto& [c, e] : plan.ev.failure) lts.add_transition("Running", e, "Ready");
  lts.add_transition("Running", plan.ev.interrupt, "Interrupting");
  lts.add_transition("Interrupting", plan.ev.interrupted, "Ready");
  for (const auto& iv : plan.ev.inv_violation) lts.add_transition("Running", iv, "Ready");
  return lts;
}

std::vector<std::string> violating_states(const ResourceDecl& r,
                                          const std::vector<GuardAtom>& conjunct) {
  std::vector<std::string> out;
  for (const auto& s : r.states) {
    for (const auto& a : conjunct) {
      if (!atom_holds(a, s)) {
        out.push_back(s);
        break;
      }
    }
  }
  return out;
}

Lts resource_from_plans(const ResourceDecl& r, const std::vector<SkillPlan>& plans) {
  Lts lts(r.name);
  for (const auto& s : r.states) lts.add_state(s);
  lts.set_initial(r.initial);
  for (const auto& [from, to] : auto_pairs(r))
    lts.add_transition(from, auto_event(r.name, from, to), to);

  for (const auto& plan : plans) {
    // Precondition synchronization: the success event of a disjunct self-loops
    // at the states satisfying this resource's conjunct; a failure event
    // self-loops at the states violating every conjunct it picked here.
    for (size_t k = 0; k < plan.precond.disjuncts.size(); ++k) {
      const auto& d = plan.precond.disjuncts[k];
      auto res = disjunct_resources(d);
      if (std::find(res.begin(), res.end(), r.name) == res.end()) continue;
      for (const auto& s : sat_states(r, d))
        lts.add_transition(s, plan.precond.success_events[k], s);
    }
    for (const auto& f : plan.precond.failures) {
      std::vector<int> mine;
      for (const auto& [res, k] : f.picks)
        if (res == r.name) mine.push_back(k);
      if (mine.empty()) continue;
      for (const auto& s : r.states) {
        bool violates_all = true;
        for (int k : mine) {
          bool sat = true;
          for (const auto& a : plan.precond.disjuncts[static_cast<size_t>(k)])
            if (a.resource == r.name && !atom_holds(a, s)) {
              sat = false;
              break;
            }
          if (sat) {
            violates_all = false;
            break;
          }
        }
        if (violates_all) lts.add_transition(s, f.name, s);
      }
    }

    // Effects: `r -> q` on event e adds (p, e, q) from every state p.
    for (const auto& [event, effects] : plan.effect_events) {
      for (const auto& eff : *effects)
        if (eff.resource == r.name)
          for (const auto& p : r.states) lts.add_transition(p, event, eff.state);
    }

    // Invariant violation events witnessed by this resource. When the skill's
    // interrupt effects already target r the effect wiring above covers every
    // state; otherwise the event self-loops at violating states and labels
    // each autonomous flip that leaves the conjunct (so the flip cannot happen
    // silently while the skill is Running).
    for (const auto& ip : plan.invariants) {
      for (size_t i = 0; i < ip.resources.size(); ++i) {
        if (ip.resources[i] != r.name) continue;
        const std::string& event = ip.events[i];
        bool effect_covered = false;
        for (const auto& eff : *plan.effect_events.back().second)  // interrupt effects
          if (eff.resource == r.name) effect_covered = true;
        if (effect_covered) continue;
        auto viol = violating_states(r, ip.atoms[i]);
        for (const auto& v : viol) lts.add_transition(v, event, v);
        for (const auto& [from, to] : auto_pairs(r)) {
          bool from_sat =
              std::find(viol.begin(), viol.end(), from) == viol.end();
          bool to_viol = std::find(viol.begin(), viol.end(), to) != viol.end();
          if (from_sat && to_viol) lts.add_transition(from, event, to);
        }
      }
    }
  }
  return lts;
}

std::vector<SkillPlan> build_plans(const SkillsetAst& ast, Diagnostics* diags) {
  std::vector<SkillPlan> plans;
  for (const auto& s : ast.skills) {
    auto p = build_skill_plan(s, diags);
    if (p) plans.push_back(std::move(*p));
  }
  return plans;
}

}  // namespace

std::optional<std::vector<DnfDisjunct>> guard_to_dnf(const GuardExpr& guard,
                                                     size_t max_disjuncts) {
  std::vector<DnfDisjunct> out;
  if (!dnf_of_nnf(guard_nnf(guard, false), max_disjuncts, out)) return std::nullopt;
  return out;
}

bool eval_guard(const GuardExpr& guard,
                const std::map<std::string, std::string>& resource_states) {
  switch (guard.kind) {
    case GuardExpr::Kind::True: return true;
    case GuardExpr::Kind::Atom: {
      auto it = resource_states.find(guard.atom.resource);
      if (it == resource_states.end())
        throw std::invalid_argument("eval_guard: no state for resource " + guard.atom.resource);
      return atom_holds(guard.atom, it->second);
    }
    case GuardExpr::Kind::Not: return !eval_guard(guard.kids[0], resource_states);
    case GuardExpr::Kind::And:
      return eval_guard(guard.kids[0], resource_states) &&
             eval_guard(guard.kids[1], resource_states);
    case GuardExpr::Kind::Or:
      return eval_guard(guard.kids[0], resource_states) ||
             eval_guard(guard.kids[1], resource_states);
  }
  return true;
}

std::vector<std::string> SkillEvents::functional_interface() const {
  std::vector<std::string> out{validate_success, validate_failure, start_hook};
  for (const auto& [c, e] : success) out.push_back(e);
  for (const auto& [c, e] : failure) out.push_back(e);
  out.push_back(interrupted);
  return out;
}

std::vector<std::string> SkillEvents::decision_interface() const {
  return {request, interrupt};
}

std::map<std::string, std::string> SkillEvents::short_names() const {
  std::map<std::string, std::string> m;
  m.emplace("validate_success", validate_success);
  m.emplace("validate_failure", validate_failure);
  m.emplace("start_hook", start_hook);
  m.emplace("interrupted", interrupted);
  for (const auto& [c, e] : success) m.emplace("success_" + c, e);
  for (const auto& [c, e] : failure) m.emplace("failure_" + c, e);
  // single-outcome skills may use the bare name
  if (success.size() == 1) m.emplace("success", success.front().second);
  if (failure.size() == 1) m.emplace("failure", failure.front().second);
  m.emplace("request", request);
  m.emplace("interrupt", interrupt);
  return m;
}

const SkillEvents* CompiledSkillset::find_skill(std::string_view name) const {
  for (const auto& s : skills)
    if (s.skill == name) return &s;
  return nullptr;
}

const ResourceInfo* CompiledSkillset::find_resource(std::string_view name) const {
  for (const auto& r : resources)
    if (r.name == name) return &r;
  return nullptr;
}

bool CompiledSkillset::is_autonomous_event(std::string_view name) const {
  for (const auto& r : resources)
    for (const auto& e : r.autonomous_events)
      if (e == name) return true;
  return false;
}

Lts lifecycle_automaton(const SkillsetAst& ast, const SkillDecl& skill) {
  (void)ast;
  auto plan = build_skill_plan(skill, nullptr);
  if (!plan) throw std::invalid_argument("skill " + skill.name + " has an unrepresentable guard");
  return lifecycle_from_plan(*plan);
}

Lts resource_automaton(const SkillsetAst& ast, const ResourceDecl& resource) {
  Diagnostics diags;
  return resource_from_plans(resource, build_plans(ast, &diags));
}

CompileResult compile_skillset(const SkillsetAst& ast) {
  CompileResult res;
  res.diagnostics = validate_skillset(ast);
  if (has_errors(res.diagnostics)) return res;

  auto plans = build_plans(ast, &res.diagnostics);
  if (has_errors(res.diagnostics)) return res;

  // Generated event names must be globally unique.
  std::set<std::string> all_events;
  auto claim = [&](const std::string& e, SourcePos pos) {
    if (!all_events.insert(e).second)
      res.diagnostics.push_back(Diagnostic::error("event name collision: " + e, pos));
  };
  for (const auto& plan : plans) {
    SourcePos pos = plan.decl->pos;
    claim(plan.ev.request, pos);
    for (const auto& e : plan.precond.success_events) claim(e, pos);
    for (const auto& f : plan.precond.failures) claim(f.name, pos);
    claim(plan.ev.validate_success, pos);
    claim(plan.ev.validate_failure, pos);
    claim(plan.ev.start_hook, pos);
    for (const auto& [c, e] : plan.ev.success) claim(e, pos);
    for (const auto& [c, e] : plan.ev.failure) claim(e, pos);
    claim(plan.ev.interrupt, pos);
    claim(plan.ev.interrupted, pos);
    for (const auto& e : plan.ev.inv_violation) claim(e, pos);
  }
  for (const auto& r : ast.resources)
    for (const auto& [from, to] : auto_pairs(r)) claim(auto_event(r.name, from, to), r.pos);
  if (has_errors(res.diagnostics)) return res;

  CompiledSkillset cs;
  cs.name = ast.name;
  std::vector<Lts> comps;
  for (const auto& plan : plans) {
    Lts lc = lifecycle_from_plan(plan);
    // Monitored invariants: an autonomous flip that would falsify an invariant
    // conjunct may not happen silently while the skill is Running; the change
    // is only expressible as the violation event there.
    for (const auto& ip : plan.invariants) {
      for (size_t i = 0; i < ip.resources.size(); ++i) {
        const ResourceDecl* r = ast.find_resource(ip.resources[i]);
        if (!r) continue;
        auto viol = violating_states(*r, ip.atoms[i]);
        for (const auto& [from, to] : auto_pairs(*r)) {
          bool from_sat = std::find(viol.begin(), viol.end(), from) == viol.end();
          bool to_viol = std::find(viol.begin(), viol.end(), to) != viol.end();
          if (!(from_sat && to_viol)) continue;
          const std::string ev = auto_event(r->name, from, to);
          for (const char* st : kLifecycleStates)
            if (std::string_view(st) != "Running") lc.add_transition(st, ev, st);
        }
      }
    }
    comps.push_back(std::move(lc));
    cs.skills.push_back(plan.ev);
  }
  for (const auto& r : ast.resources) {
    comps.push_back(resource_from_plans(r, plans));
    ResourceInfo info;
    info.name = r.name;
    info.states = r.states;
    info.initial = r.initial;
    for (const auto& [from, to] : auto_pairs(r))
      info.autonomous_events.push_back(auto_event(r.name, from, to));
    cs.resources.push_back(std::move(info));
  }
  cs.network = Network(std::move(comps));
  res.compiled = std::move(cs);
  return res;
}

std::string manifest_json(const CompiledSkillset& cs) {
  nlohmann::ordered_json j;
  j["skillset"] = cs.name;
  j["skills"] = nlohmann::ordered_json::array();
  for (const auto& s : cs.skills) {
    nlohmann::ordered_json sj;
    sj["name"] = s.skill;
    sj["functional_interface"] = s.functional_interface();
    sj["decision_interface"] = s.decision_interface();
    j["skills"].push_back(std::move(sj));
  }
  j["resources"] = nlohmann::ordered_json::array();
  for (const auto& r : cs.resources) {
    nlohmann::ordered_json rj;
    rj["name"] = r.name;
    rj["states"] = r.states;
    rj["initial"] = r.initial;
    rj["autonomous_events"] = r.autonomous_events;
    j["resources"].push_back(std::move(rj));
  }
  return j.dump(2) + "\n";
}

std::string compiled_dot(const CompiledSkillset& cs) {
  std::string out;
  out += "// skillset " + cs.name + "\n";
  for (const auto& s : cs.skills) {
    out += "// skill " + s.skill + " functional interface:";
    for (const auto& e : s.functional_interface()) out += " " + e;
    out += "\n// skill " + s.skill + " decision interface:";
    for (const auto& e : s.decision_interface()) out += " " + e;
    out += "\n";
  }
  out += export_dot(cs.network);
  return out;
}

}  // namespace skillmc
