#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace skillmc {

/// Thrown when an exploration or expansion exceeds its state bound.
struct BoundExceeded : std::runtime_error {
  explicit BoundExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct LtsTransition {
  int32_t src;
  int32_t event;
  int32_t dst;
};

/// Finite labeled transition system. States and events are named; transitions
/// are stored deduplicated, with per-(state, event) target lists kept sorted
/// so that iteration order is deterministic.
class Lts {
 public:
  Lts() = default;
  explicit Lts(std::string name) : name_(std::move(name)) {}

  int add_state(const std::string& name);
  void set_initial(std::string_view state);
  int ensure_event(const std::string& name);
  void add_transition(std::string_view src, const std::string& event, std::string_view dst);
  void add_transition_ids(int src, int event, int dst);

  const std::string& name() const { return name_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  const std::vector<std::string>& states() const { return states_; }
  const std::string& state_name(int i) const { return states_.at(static_cast<size_t>(i)); }
  int state_index(std::string_view name) const;
  int initial() const { return initial_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  int event_index(std::string_view name) const;
  const std::vector<LtsTransition>& transitions() const { return transitions_; }

  /// Sorted target states for (state, event); empty if none.
  const std::vector<int32_t>& targets(int state, int event) const;

  bool has_transition(int src, int event, int dst) const;

  /// Copy without the given event (transitions dropped, alphabet entry removed).
  Lts without_event(std::string_view event) const;

 private:
  std::string name_;
  std::vector<std::string> states_;
  std::unordered_map<std::string, int> state_index_;
  int initial_ = -1;
  std::vector<std::string> alphabet_;
  std::unordered_map<std::string, int> event_index_;
  std::vector<LtsTransition> transitions_;
  // succ_[state][event] -> sorted unique targets
  std::vector<std::vector<std::vector<int32_t>>> succ_;
};

/// One local state index per component, in component order.
using GlobalState = std::vector<int32_t>;

struct GlobalStateHash {
  size_t operator()(const GlobalState& g) const {
    size_t h = 1469598103934665603ull;
    for (int32_t v : g) {
      h ^= static_cast<size_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct ReachStats {
  uint64_t states = 0;
  uint64_t transitions = 0;  // excludes synthesized __stutter self-loops
  uint64_t deadlocks = 0;    // states with no enabled event other than __stutter
  bool truncated = false;
};

/// One step of a lasso run: the event taken and the global state reached.
struct LassoStep {
  std::string event;
  GlobalState state;
};

/// Ultimately periodic run: `prefix` starts at the network's initial state;
/// `cycle` starts at the prefix's final state (the initial state if the
/// prefix is empty) and its last step returns there.
struct Lasso {
  std::vector<LassoStep> prefix;
  std::vector<LassoStep> cycle;
};

/// A network of synchronized components. A global transition on event `a`
/// requires every component with `a` in its alphabet to take an `a`-labeled
/// local transition; all other components keep their state. When the network
/// is stutter-closed, global states with no enabled event gain an implicit
/// `__stutter` self-loop (realized lazily).
class Network {
 public:
  static constexpr std::string_view kStutter = "__stutter";

  Network() = default;
  explicit Network(std::vector<Lts> components, bool stutter_closed = false);

  const std::vector<Lts>& components() const { return comps_; }
  const Lts& component(int i) const { return comps_.at(static_cast<size_t>(i)); }
  int component_index(std::string_view name) const;
  bool stutter_closed() const { return stuttered_; }

  /// Same components, stutter closure enabled.
  Network stutter_close() const { return Network(comps_, true); }

  /// Copy with one event removed from every component.
  Network without_event(std::string_view event) const;

  /// Global alphabet, lexicographically sorted (never contains __stutter).
  const std::vector<std::string>& events() const { return events_; }
  int event_index(std::string_view name) const;

  GlobalState initial_state() const;
  void check_state(const GlobalState& g) const;  // throws std::invalid_argument

  /// Set of successor states on one event, in deterministic (component-major)
  /// order. `__stutter` yields {g} at deadlocked states of a closed network.
  std::vector<GlobalState> successors(const GlobalState& g, std::string_view event) const;

  /// Events with at least one successor, in global alphabet order. Includes
  /// __stutter (last) iff the network is closed and g is otherwise deadlocked.
  std::vector<std::string> enabled_events(const GlobalState& g) const;

  /// True if no event of the raw (unclosed) semantics is enabled at g.
  bool deadlocked(const GlobalState& g) const;

  /// Calls fn(event_id, target) for every outgoing global transition of g in
  /// deterministic order; event_id == -1 denotes a __stutter self-loop.
  template <typename F>
  void for_each_transition(const GlobalState& g, F&& fn) const {
    bool any = false;
    for (int e = 0; e < static_cast<int>(events_.size()); ++e) {
      any = for_event(g, e, [&](const GlobalState& t) { fn(e, t); }) || any;
    }
    if (!any && stuttered_) fn(-1, g);
  }

  ReachStats reachable(uint64_t max_states) const;

  /// Materializes the reachable global graph as an Lts (state names are the
  /// component state names joined with '|'). Throws BoundExceeded.
  Lts product_explicit(uint64_t max_states) const;

 private:
  // Enumerates successors of g on global event e; returns true if any.
  template <typename F>
  bool for_event(const GlobalState& g, int e, F&& fn) const {
    const auto& parts = participants_[static_cast<size_t>(e)];
    std::vector<const std::vector<int32_t>*> lists;
    lists.reserve(parts.size());
    for (const auto& [comp, local] : parts) {
      const auto& t = comps_[static_cast<size_t>(comp)].targets(g[static_cast<size_t>(comp)], local);
      if (t.empty()) return false;
      lists.push_back(&t);
    }
    GlobalState out = g;
    std::vector<size_t> idx(lists.size(), 0);
    bool emitted = false;
    while (true) {
      for (size_t k = 0; k < lists.size(); ++k)
        out[static_cast<size_t>(parts[k].first)] = (*lists[k])[idx[k]];
      fn(out);
      emitted = true;
      size_t k = lists.size();
      while (k > 0) {
        --k;
        if (++idx[k] < lists[k]->size()) break;
        idx[k] = 0;
        if (k == 0) return emitted;
      }
      if (lists.empty()) return emitted;
    }
  }

  std::vector<Lts> comps_;
  bool stuttered_ = false;
  std::vector<std::string> events_;
  std::unordered_map<std::string, int> event_index_;
  // participants_[e] = (component index, local event index) pairs, in component order
  std::vector<std::vector<std::pair<int32_t, int32_t>>> participants_;
};

/// GraphViz rendering of a single Lts.
std::string export_dot(const Lts& lts);

/// GraphViz rendering of every component of a network (one digraph each).
std::string export_dot(const Network& net);

}  // namespace skillmc
