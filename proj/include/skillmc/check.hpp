#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "skillmc/buchi.hpp"
#include "skillmc/ltl.hpp"
#include "skillmc/lts.hpp"

namespace skillmc {

enum class Engine { Ndfs, Scc };

struct Verdict {
  bool holds = true;
  uint64_t states_explored = 0;
  /// Counterexample over the network (events + global states); present iff
  /// the property is violated. Replaying it through eval_word satisfies the
  /// negated property.
  std::optional<Lasso> lasso;
  /// Wall-clock time, filled by the caller; serialized only on request.
  double time_ms = 0.0;
};

/// Decides whether every infinite run of `net` satisfies `formula`.
/// The network is stutter-closed internally if it is not already. `Ndfs` is
/// the on-the-fly nested depth-first search; `Scc` materializes the product
/// and looks for accepting strongly connected components; both produce the
/// same verdict and a deterministic lasso. Throws std::invalid_argument on
/// atoms that do not resolve against the network and BoundExceeded when the
/// product exceeds `max_states`.
Verdict model_check(const Network& net, const LtlPtr& formula, Engine engine,
                    uint64_t max_states = 1'000'000);

/// The ultimately periodic word induced by a lasso: one valuation per visited
/// state (every "component@local-state" key that holds there), prefix states
/// first, cycle states from position `loop`.
LassoWord lasso_word(const Network& net, const Lasso& lasso);

/// Verdict serialization per the documented schema ("time_ms" only when
/// `include_time` is set, so that default output is byte-reproducible).
std::string verdict_json(const Network& net, const Verdict& v, bool include_time = false);

/// Human-readable rendering of a verdict (and lasso, if any).
std::string verdict_text(const Network& net, const Verdict& v, bool include_time = false);

}  // namespace skillmc
