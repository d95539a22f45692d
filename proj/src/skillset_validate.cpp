#include <set>
#include <string>

#include "skillmc/skillset.hpp"

namespace skillmc {

namespace {

struct Validator {
  const SkillsetAst& ast;
  Diagnostics diags;

  void error(std::string msg, SourcePos pos) {
    diags.push_back(Diagnostic::error(std::move(msg), pos));
  }

  void check_atom(const GuardAtom& a) {
    const ResourceDecl* r = ast.find_resource(a.resource);
    if (!r) {
      error("unknown resource " + a.resource, a.pos);
      return;
    }
    if (std::find(r->states.begin(), r->states.end(), a.state) == r->states.end())
      error("unknown state " + a.state + " of resource " + a.resource, a.state_pos);
  }

  void check_guard(const GuardExpr& g) {
    if (g.kind == GuardExpr::Kind::Atom) check_atom(g.atom);
    for (const auto& k : g.kids) check_guard(k);
  }

  /// Invariant guards must be conjunctions of (possibly negated) atoms: the
  /// per-resource violation events cannot express disjunctive violation.
  bool is_conjunctive(const GuardExpr& g) {
    switch (g.kind) {
      case GuardExpr::Kind::True:
      case GuardExpr::Kind::Atom: return true;
      case GuardExpr::Kind::Not: return g.kids[0].kind == GuardExpr::Kind::Atom;
      case GuardExpr::Kind::And: return is_conjunctive(g.kids[0]) && is_conjunctive(g.kids[1]);
      case GuardExpr::Kind::Or: return false;
    }
    return false;
  }

  void check_effects(const std::vector<EffectStmt>& effects, const std::string& context) {
    std::set<std::string> seen;
    for (const auto& e : effects) {
      const ResourceDecl* r = ast.find_resource(e.resource);
      if (!r) {
        error("unknown resource " + e.resource, e.pos);
        continue;
      }
      if (std::find(r->states.begin(), r->states.end(), e.state) == r->states.end())
        error("unknown state " + e.state + " of resource " + e.resource, e.state_pos);
      if (!seen.insert(e.resource).second)
        error("duplicate effect on resource " + e.resource + " in " + context, e.pos);
    }
  }

  void check_resource(const ResourceDecl& r) {
    std::set<std::string> states;
    for (size_t i = 0; i < r.states.size(); ++i) {
      if (!states.insert(r.states[i]).second)
        error("duplicate state " + r.states[i] + " in resource " + r.name, r.state_pos[i]);
    }
    if (!states.count(r.initial))
      error("initial state " + r.initial + " not declared", r.initial_pos);
    if (!r.transitions.all) {
      for (size_t i = 0; i < r.transitions.pairs.size(); ++i) {
        const auto& [from, to] = r.transitions.pairs[i];
        SourcePos p = r.transitions.pair_pos[i];
        if (!states.count(from)) error("unknown state " + from + " of resource " + r.name, p);
        if (!states.count(to)) error("unknown state " + to + " of resource " + r.name, p);
      }
    }
  }

  void check_skill(const SkillDecl& s) {
    std::set<std::string> io;
    for (const auto& d : s.inputs)
      if (!io.insert(d.name).second)
        error("duplicate input " + d.name + " in skill " + s.name, d.pos);
    io.clear();
    for (const auto& d : s.outputs)
      if (!io.insert(d.name).second)
        error("duplicate output " + d.name + " in skill " + s.name, d.pos);

    check_guard(s.precondition);
    check_effects(s.start_effects, "start effects of skill " + s.name);

    std::set<std::string> invs;
    for (const auto& inv : s.invariants) {
      if (!invs.insert(inv.name).second)
        error("duplicate invariant " + inv.name + " in skill " + s.name, inv.pos);
      check_guard(inv.guard);
      if (!is_conjunctive(inv.guard))
        error("invariant " + inv.name + " of skill " + s.name +
                  " must be a conjunction of atoms",
              inv.pos);
    }

    check_effects(s.interrupt_effects, "interrupt effects of skill " + s.name);

    std::set<std::string> cases;
    for (const auto& c : s.success_cases) {
      if (!cases.insert(c.name).second)
        error("duplicate success case " + c.name + " in skill " + s.name, c.pos);
      check_effects(c.effects, "success case " + c.name + " of skill " + s.name);
    }
    cases.clear();
    for (const auto& c : s.failure_cases) {
      if (!cases.insert(c.name).second)
        error("duplicate failure case " + c.name + " in skill " + s.name, c.pos);
      check_effects(c.effects, "failure case " + c.name + " of skill " + s.name);
    }
  }

  void run() {
    std::set<std::string> resource_names;
    for (const auto& r : ast.resources) {
      if (!resource_names.insert(r.name).second)
        error("duplicate resource name " + r.name, r.pos);
      check_resource(r);
    }
    std::set<std::string> skill_names;
    for (const auto& s : ast.skills) {
      if (!skill_names.insert(s.name).second) error("duplicate skill name " + s.name, s.pos);
      if (resource_names.count(s.name))
        error("skill name " + s.name + " collides with a resource name", s.pos);
      check_skill(s);
    }
  }
};

}  // namespace

Diagnostics validate_skillset(const SkillsetAst& ast) {
  Validator v{ast, {}};
  v.run();
  return v.diags;
}

}  // namespace skillmc
