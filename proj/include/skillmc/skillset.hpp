#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skillmc/diag.hpp"

namespace skillmc {

/// `resource == state` / `resource != state`. Equality ignores positions.
struct GuardAtom {
  std::string resource;
  bool equal = true;
  std::string state;
  SourcePos pos;        // position of the resource identifier
  SourcePos state_pos;  // position of the state identifier

  friend bool operator==(const GuardAtom& a, const GuardAtom& b) {
    return a.resource == b.resource && a.equal == b.equal && a.state == b.state;
  }
};

/// Boolean guard over resource states. And/Or are binary; Not is unary.
/// True is the guard of an absent precondition block.
struct GuardExpr {
  enum class Kind { True, Atom, Not, And, Or };

  Kind kind = Kind::True;
  GuardAtom atom;                // Kind::Atom
  std::vector<GuardExpr> kids;   // Not: 1 child; And/Or: 2 children

  static GuardExpr make_true() { return {}; }
  static GuardExpr make_atom(GuardAtom a) {
    GuardExpr g;
    g.kind = Kind::Atom;
    g.atom = std::move(a);
    return g;
  }
  static GuardExpr make_not(GuardExpr c) {
    GuardExpr g;
    g.kind = Kind::Not;
    g.kids.push_back(std::move(c));
    return g;
  }
  static GuardExpr make_and(GuardExpr a, GuardExpr b) {
    GuardExpr g;
    g.kind = Kind::And;
    g.kids.push_back(std::move(a));
    g.kids.push_back(std::move(b));
    return g;
  }
  static GuardExpr make_or(GuardExpr a, GuardExpr b) {
    GuardExpr g;
    g.kind = Kind::Or;
    g.kids.push_back(std::move(a));
    g.kids.push_back(std::move(b));
    return g;
  }

  bool is_true() const { return kind == Kind::True; }

  friend bool operator==(const GuardExpr& a, const GuardExpr& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Atom) return a.atom == b.atom;
    return a.kids == b.kids;
  }
};

/// `resource -> state` effect statement.
struct EffectStmt {
  std::string resource;
  std::string state;
  SourcePos pos;
  SourcePos state_pos;

  friend bool operator==(const EffectStmt& a, const EffectStmt& b) {
    return a.resource == b.resource && a.state == b.state;
  }
};

struct IoDecl {
  std::string name;
  std::string type;
  SourcePos pos;

  friend bool operator==(const IoDecl& a, const IoDecl& b) {
    return a.name == b.name && a.type == b.type;
  }
};

struct InvariantDecl {
  std::string name;
  GuardExpr guard;
  SourcePos pos;

  friend bool operator==(const InvariantDecl& a, const InvariantDecl& b) {
    return a.name == b.name && a.guard == b.guard;
  }
};

/// Named success/failure case with its effects.
struct CaseDecl {
  std::string name;
  std::vector<EffectStmt> effects;
  SourcePos pos;

  friend bool operator==(const CaseDecl& a, const CaseDecl& b) {
    return a.name == b.name && a.effects == b.effects;
  }
};

/// `transition all` or an explicit list of `from -> to` pairs.
struct TransitionSpec {
  bool all = false;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<SourcePos> pair_pos;  // parallel to pairs

  friend bool operator==(const TransitionSpec& a, const TransitionSpec& b) {
    return a.all == b.all && a.pairs == b.pairs;
  }
};

struct ResourceDecl {
  std::string name;
  std::vector<std::string> states;
  std::string initial;
  TransitionSpec transitions;
  SourcePos pos;
  std::vector<SourcePos> state_pos;  // parallel to states
  SourcePos initial_pos;

  friend bool operator==(const ResourceDecl& a, const ResourceDecl& b) {
    return a.name == b.name && a.states == b.states && a.initial == b.initial &&
           a.transitions == b.transitions;
  }
};

struct SkillDecl {
  std::string name;
  std::vector<IoDecl> inputs;
  std::vector<IoDecl> outputs;
  GuardExpr precondition;  // True when absent
  std::vector<EffectStmt> start_effects;
  std::vector<InvariantDecl> invariants;
  std::vector<EffectStmt> interrupt_effects;
  std::vector<CaseDecl> success_cases;
  std::vector<CaseDecl> failure_cases;
  SourcePos pos;

  friend bool operator==(const SkillDecl& a, const SkillDecl& b) {
    return a.name == b.name && a.inputs == b.inputs && a.outputs == b.outputs &&
           a.precondition == b.precondition && a.start_effects == b.start_effects &&
           a.invariants == b.invariants && a.interrupt_effects == b.interrupt_effects &&
           a.success_cases == b.success_cases && a.failure_cases == b.failure_cases;
  }
};

struct SkillsetAst {
  std::string name;
  std::vector<ResourceDecl> resources;
  std::vector<SkillDecl> skills;

  const ResourceDecl* find_resource(std::string_view n) const;
  const SkillDecl* find_skill(std::string_view n) const;

  friend bool operator==(const SkillsetAst& a, const SkillsetAst& b) {
    return a.name == b.name && a.resources == b.resources && a.skills == b.skills;
  }
};

struct ParseResult {
  std::optional<SkillsetAst> ast;  // present iff no error diagnostics
  Diagnostics diagnostics;

  bool ok() const { return ast.has_value(); }
};

/// Parses and validates a skillset file. Total on arbitrary input: on failure
/// the result carries at least one error diagnostic and no AST.
ParseResult parse_skillset(std::string_view text);

/// Semantic checks (name uniqueness, reference resolution, effect/guard
/// well-formedness). parse_skillset already runs this.
Diagnostics validate_skillset(const SkillsetAst& ast);

/// Canonical pretty-printer; parse(format(ast)) reproduces the AST.
std::string format_skillset(const SkillsetAst& ast);

/// Renders a guard in source syntax (used by the formatter and DOT export).
std::string format_guard(const GuardExpr& g);

}  // namespace skillmc
