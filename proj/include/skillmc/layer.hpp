#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillmc/compile.hpp"
#include "skillmc/diag.hpp"
#include "skillmc/lts.hpp"

namespace skillmc {

/// Bounded integer variable of a guarded transition system.
struct LayerVar {
  std::string name;
  int lo = 0;
  int hi = 0;
  bool init_any = false;
  int init = 0;  // ignored when init_any
  SourcePos pos;
};

struct LayerLoc {
  std::string name;
  bool initial = false;
  SourcePos pos;
};

/// Comparison/boolean guard over the model's variables.
struct VarGuard {
  enum class Kind { True, Cmp, Not, And, Or };
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge };
  Kind kind = Kind::True;
  // Cmp payload: <lhs var> <op> (<constant> | <rhs var>)
  Op op = Op::Eq;
  std::string lhs;
  bool rhs_is_var = false;
  std::string rhs_var;
  int rhs_const = 0;
  std::vector<VarGuard> kids;  // Not: 1, And/Or: 2

  static VarGuard make_true();
  static VarGuard make_cmp_const(std::string lhs, Op op, int rhs);
  static VarGuard make_cmp_var(std::string lhs, Op op, std::string rhs);
  static VarGuard make_not(VarGuard g);
  static VarGuard make_and(VarGuard a, VarGuard b);
  static VarGuard make_or(VarGuard a, VarGuard b);
};

/// Affine integer expression: constant + sum of coefficient*variable terms.
struct AffineExpr {
  int constant = 0;
  std::vector<std::pair<int, std::string>> terms;
};

struct UpdateStmt {
  std::string var;
  AffineExpr expr;
  SourcePos pos;
};

struct LayerEdge {
  std::string src;
  std::string dst;
  std::string event;
  bool internal = false;
  VarGuard guard;  // True when absent
  std::vector<UpdateStmt> updates;
  SourcePos pos;
};

enum class BindKind { None, Functional, Decision };

/// A functional- or decision-layer model: a guarded transition system over
/// bounded integers (a bare LTS when it has no variables), optionally bound
/// to one skill's synchronization interface.
struct GuardedTs {
  std::string name;
  BindKind bind = BindKind::None;
  std::string bind_skill;  // set when bind != None
  std::vector<LayerVar> variables;
  std::vector<LayerLoc> locations;
  std::vector<LayerEdge> edges;
  /// Programmatic event renaming applied at attach time (used by builtins):
  /// model-local event name -> network event name. File models use network
  /// names directly and leave this empty.
  std::map<std::string, std::string> event_map;
  /// Network events deleted when this model is attached (resource coupling
  /// surgery, e.g. removing a recharge transition the model contradicts).
  std::vector<std::string> removed_events;
  SourcePos pos;

  const LayerVar* find_var(std::string_view name) const;
  const LayerLoc* find_loc(std::string_view name) const;
  const std::string* initial_loc() const;
};

struct LayerParseResult {
  std::optional<GuardedTs> model;
  Diagnostics diagnostics;
  bool ok() const { return model.has_value(); }
};

/// Parses one layer-model file ("model NAME [for functional|decision SKILL]
/// { var... loc... edge... }"). Returns a model only when there are no
/// errors; the result carries all diagnostics either way.
LayerParseResult parse_layer_model(std::string_view text);

/// Structural checks shared by parse_layer_model and programmatic models.
Diagnostics validate_layer_model(const GuardedTs& g);

/// Evaluates a guard under a valuation (variable name -> value).
bool eval_var_guard(const VarGuard& g, const std::map<std::string, int>& vals);

/// Evaluates an affine expression under a valuation.
int eval_affine(const AffineExpr& e, const std::map<std::string, int>& vals);

/// Expands a guarded transition system to its explicit Lts. States are
/// "loc(v1=...,v2=...)" pairs over the full variable grid (just "loc" for
/// zero-variable models). When any variable is initialized `any`, a "__init"
/// pseudo-state precedes the grid with one `auto_init_<model>` transition per
/// admissible initial valuation. An edge contributes a transition per
/// valuation satisfying its guard; updates are simultaneous, and instances
/// whose update leaves a variable's domain are dropped. Throws BoundExceeded
/// when the state count would exceed `max_states`.
Lts expand(const GuardedTs& g, uint64_t max_states = 1'000'000);

/// Single-state model with one self-loop per event of `skill`'s functional
/// interface; accepts any interface behavior. Component name "F_<skill>".
Lts builtin_abstract_functional(const SkillEvents& skill);

/// Single-state model with self-loops on request/interrupt of the given
/// skills; accepts any decision behavior. Component name "D".
Lts builtin_abstract_decision(const std::vector<SkillEvents>& skills);

/// A battery-budget refinement of a navigation skill: battery level `blevel` in
/// [0, Bmax] chosen once at initialization, per-request distance `d` in
/// [1, Dmax] chosen at each validate, movement consuming two battery units
/// per distance unit (also on interrupt while moving), plus a coupling event
/// that lets the battery resource fall to its critical state exactly when
/// blevel < 2 (and removes the recharge event from the network). Local event
/// names are bound to `skill`'s interface at attach time; `battery_resource`
/// names the coupled resource (must have exactly the two states
/// normal/critical given here). Throws std::invalid_argument on bad
/// parameters.
GuardedTs builtin_refined_goto(int bmax, int dmax, const std::string& skill = "goto",
                               const std::string& battery_resource = "battery",
                               const std::string& normal_state = "Normal",
                               const std::string& critical_state = "Critical");

struct AttachOptions {
  /// Synthesize abstract models for interfaces no attached model covers.
  bool auto_abstract = false;
  /// State bound for expanding each guarded model.
  uint64_t expand_bound = 1'000'000;
};

/// The compiled executive network closed with layer models.
struct ClosedNetwork {
  Network network;
  /// Component names of the attached models, in attachment order.
  std::vector<std::string> model_components;
  /// Events private to models (declared `internal` plus auto_init_*); these
  /// are erased when comparing visible event sequences across closures.
  std::vector<std::string> internal_events;
};

struct CloseResult {
  std::optional<ClosedNetwork> closed;
  Diagnostics diagnostics;
  bool ok() const { return closed.has_value(); }
};

/// Attaches layer models to a compiled skillset: expands each guarded model,
/// applies event maps, checks interface conformance (every non-internal
/// event must belong to the bound interface or be an autonomous resource
/// event), enforces single coverage of every skill's functional and decision
/// interface (synthesizing abstract models for uncovered interfaces when
/// `auto_abstract` is set), performs removed-event surgery, and returns the
/// closed network (components: lifecycles, resources, then models).
CloseResult close_network(const CompiledSkillset& cs, const std::vector<GuardedTs>& models,
                          const AttachOptions& opts = {});

}  // namespace skillmc
