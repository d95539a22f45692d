#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillmc/lts.hpp"
#include "skillmc/skillset.hpp"

namespace skillmc {

/// A precondition in disjunctive normal form: a (possibly empty) list of
/// disjuncts, each a conjunction of atoms. The empty list of disjuncts never
/// occurs; a True guard yields one empty disjunct.
using DnfDisjunct = std::vector<GuardAtom>;

/// Converts a guard to DNF (negations are absorbed into atoms by flipping
/// ==/!=). Returns nullopt when the disjunct count would exceed `max_disjuncts`.
std::optional<std::vector<DnfDisjunct>> guard_to_dnf(const GuardExpr& guard,
                                                     size_t max_disjuncts);

/// Evaluates a guard under a resource-state assignment.
bool eval_guard(const GuardExpr& guard,
                const std::map<std::string, std::string>& resource_states);

/// Compiled event vocabulary of one skill.
struct SkillEvents {
  std::string skill;
  std::string request;
  std::vector<std::string> precond_success;  // one per DNF disjunct
  std::vector<std::string> precond_failure;  // one per violation choice
  std::string validate_success;
  std::string validate_failure;
  std::string start_hook;
  std::vector<std::pair<std::string, std::string>> success;  // (case, event)
  std::vector<std::pair<std::string, std::string>> failure;  // (case, event)
  std::string interrupt;
  std::string interrupted;
  std::vector<std::string> inv_violation;  // (invariant × guarded resource) order

  /// Events a functional-layer model synchronizes on, in manifest order.
  std::vector<std::string> functional_interface() const;
  /// Events a decision-layer model synchronizes on, in manifest order.
  std::vector<std::string> decision_interface() const;
  /// Model-local shorthand -> compiled event name (e.g. "validate_success",
  /// "success_<case>", "request").
  std::map<std::string, std::string> short_names() const;
};

struct ResourceInfo {
  std::string name;
  std::vector<std::string> states;
  std::string initial;
  std::vector<std::string> autonomous_events;
};

struct CompiledSkillset {
  std::string name;
  /// Open network: one lifecycle component per skill (named after the skill,
  /// in declaration order) followed by one component per resource.
  Network network;
  std::vector<SkillEvents> skills;
  std::vector<ResourceInfo> resources;

  const SkillEvents* find_skill(std::string_view name) const;
  const ResourceInfo* find_resource(std::string_view name) const;
  bool is_autonomous_event(std::string_view name) const;
};

struct CompileResult {
  std::optional<CompiledSkillset> compiled;
  Diagnostics diagnostics;
  bool ok() const { return compiled.has_value(); }
};

/// Compiles a validated skillset into its synchronized network.
CompileResult compile_skillset(const SkillsetAst& ast);

/// The six-state executive automaton of one skill (Ready, Checking,
/// Validating, Starting, Running, Interrupting), without the autonomous-flip
/// blocking loops added by compile_skillset.
Lts lifecycle_automaton(const SkillsetAst& ast, const SkillDecl& skill);

/// The automaton of one resource: autonomous transitions plus guard/effect
/// synchronization loops for every skill that references it.
Lts resource_automaton(const SkillsetAst& ast, const ResourceDecl& resource);

/// Interface manifest as JSON text (two-space indent, stable key order).
std::string manifest_json(const CompiledSkillset& cs);

/// DOT rendering of every component, with an interface-legend comment block.
std::string compiled_dot(const CompiledSkillset& cs);

}  // namespace skillmc
