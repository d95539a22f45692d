#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "skillmc/diag.hpp"

namespace skillmc {

/// Immutable LTL formula tree. Atoms are component-state predicates
/// "component @ state", true at a global network state iff that component is
/// in that local state.
struct Ltl;
using LtlPtr = std::shared_ptr<const Ltl>;

struct Ltl {
  enum class Kind {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Release,
    Finally,
    Globally,
  };
  Kind kind = Kind::True;
  std::string comp, state;  // Atom payload
  LtlPtr lhs, rhs;          // unary operators use lhs only

  static LtlPtr make_true();
  static LtlPtr make_false();
  static LtlPtr atom(std::string comp, std::string state);
  static LtlPtr not_(LtlPtr a);
  static LtlPtr and_(LtlPtr a, LtlPtr b);
  static LtlPtr or_(LtlPtr a, LtlPtr b);
  static LtlPtr implies(LtlPtr a, LtlPtr b);
  static LtlPtr next(LtlPtr a);
  static LtlPtr until(LtlPtr a, LtlPtr b);
  static LtlPtr release(LtlPtr a, LtlPtr b);
  static LtlPtr finally_(LtlPtr a);
  static LtlPtr globally(LtlPtr a);
};

bool ltl_equal(const LtlPtr& a, const LtlPtr& b);

/// Canonical rendering with minimal parentheses
/// (precedence: unary > U/R > && > || > ->).
std::string to_string(const LtlPtr& f);

struct LtlParseResult {
  std::optional<LtlPtr> formula;
  Diagnostics diagnostics;
  bool ok() const { return formula.has_value(); }
};

/// Parses `F`, `G`, `X`, `U`, `R`, `!`, `&&`, `||`, `->`, `true`, `false`,
/// parentheses, and atoms `IDENT @ STATE` (STATE may carry a parenthesized
/// valuation suffix, e.g. `moving(d=1,blevel=4)`).
LtlParseResult parse_ltl(std::string_view text);

/// Negation-normal form: only True/False/Atom/Not(Atom)/And/Or/X/U/R remain
/// (F a becomes true U a, G a becomes false R a, -> is expanded).
LtlPtr to_nnf(const LtlPtr& f);

/// NNF of the negation.
LtlPtr negate(const LtlPtr& f);

/// The key under which an atom appears in a word valuation.
inline std::string atom_key(const std::string& comp, const std::string& state) {
  return comp + "@" + state;
}

/// Ultimately periodic word: positions 0..vals.size()-1 where position
/// `loop` starts the cycle; each position holds the set of true atom keys.
struct LassoWord {
  size_t loop = 0;
  std::vector<std::set<std::string>> vals;
};

/// Direct LTL semantics on prefix·cycle^ω, by fixpoint iteration over the
/// lasso positions (least for U, greatest for R). This is the reference
/// evaluator the automaton pipeline is tested against.
bool eval_word(const LtlPtr& f, const LassoWord& word);

}  // namespace skillmc
