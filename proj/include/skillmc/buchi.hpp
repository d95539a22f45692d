#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skillmc/ltl.hpp"

namespace skillmc {

/// Transition of a Büchi automaton: the edge may be taken at a word position
/// iff every atom in `must_true` holds there and none in `must_false` does
/// (bit i refers to BuchiAutomaton::atoms[i]).
struct BuchiEdge {
  int dst = 0;
  uint64_t must_true = 0;
  uint64_t must_false = 0;
};

/// Nondeterministic Büchi automaton with transition labels. State 0 is the
/// sole initial state (a pseudo-initial with no incoming edges); acceptance
/// is on states. A run over word w takes its i-th edge under valuation w_i.
struct BuchiAutomaton {
  std::vector<std::string> atoms;  // atom keys ("comp@state")
  std::vector<std::pair<std::string, std::string>> atom_parts;  // (component, state)
  int num_states = 0;
  std::vector<char> accepting;             // size num_states
  std::vector<std::vector<BuchiEdge>> edges;  // outgoing, per state

  bool edge_enabled(const BuchiEdge& e, uint64_t valuation) const {
    return (valuation & e.must_true) == e.must_true && (valuation & e.must_false) == 0;
  }
};

/// Tableau translation (closure-set states, generalized acceptance per
/// until-subformula, counter-based degeneralization). Requires `f` in NNF;
/// throws std::invalid_argument beyond 64 distinct subformulas.
BuchiAutomaton ltl_to_buchi(const LtlPtr& f);

/// Whether the automaton accepts prefix·cycle^ω (decided exactly on the
/// finite position graph). Used to validate the translation against
/// eval_word.
bool accepts_lasso(const BuchiAutomaton& ba, const LassoWord& word);

}  // namespace skillmc
