#pragma once
// Bounded inclusion of visible event traces between two networks. Internal
// events are erased: both sides are determinized over the visible alphabet
// with epsilon-closure over their internal events, and a BFS over pairs of
// state sets looks for a visible sequence the left side can extend but the
// right side cannot. Depth counts visible events only.
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "skillmc/lts.hpp"

namespace trace {

struct InclusionResult {
  bool included = true;
  /// When not included: a visible event sequence the left network can produce
  /// (up to the depth bound) and the right one cannot.
  std::vector<std::string> witness;
};

namespace detail {

/// One determinized side: interns global states and steps sets of them.
class Side {
 public:
  Side(const skillmc::Network& net, const std::set<std::string>& internal)
      : net_(net), internal_(internal) {}

  std::set<int> initial() { return closure({intern(net_.initial_state())}); }

  /// Epsilon-closed set reached from `s` by one visible event.
  std::set<int> step(const std::set<int>& s, const std::string& event) {
    std::set<int> out;
    for (int v : s)
      for (const auto& t : net_.successors(states_[static_cast<size_t>(v)], event))
        out.insert(intern(t));
    return closure(std::move(out));
  }

  /// Visible events enabled somewhere in the set.
  std::set<std::string> visible_enabled(const std::set<int>& s) {
    std::set<std::string> out;
    for (int v : s)
      for (const auto& ev : net_.enabled_events(states_[static_cast<size_t>(v)]))
        if (!internal_.count(ev) && ev != skillmc::Network::kStutter) out.insert(ev);
    return out;
  }

 private:
  int intern(const skillmc::GlobalState& g) {
    auto it = index_.find(g);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(states_.size());
    states_.push_back(g);
    index_.emplace(g, id);
    return id;
  }

  std::set<int> closure(std::set<int> s) {
    std::deque<int> work(s.begin(), s.end());
    while (!work.empty()) {
      int v = work.front();
      work.pop_front();
      for (const auto& ev : internal_) {
        for (const auto& t : net_.successors(states_[static_cast<size_t>(v)], ev)) {
          int id = intern(t);
          if (s.insert(id).second) work.push_back(id);
        }
      }
    }
    return s;
  }

  const skillmc::Network& net_;
  const std::set<std::string>& internal_;
  std::vector<skillmc::GlobalState> states_;
  std::map<skillmc::GlobalState, int> index_;
};

}  // namespace detail

inline InclusionResult visible_inclusion(const skillmc::Network& lhs,
                                         const std::set<std::string>& lhs_internal,
                                         const skillmc::Network& rhs,
                                         const std::set<std::string>& rhs_internal,
                                         int depth) {
  detail::Side left(lhs, lhs_internal);
  detail::Side right(rhs, rhs_internal);

  struct Node {
    std::set<int> l, r;
    int depth;
    std::vector<std::string> path;
  };
  std::deque<Node> work;
  std::set<std::pair<std::set<int>, std::set<int>>> seen;
  Node init{left.initial(), right.initial(), 0, {}};
  seen.insert({init.l, init.r});
  work.push_back(std::move(init));

  while (!work.empty()) {
    Node n = std::move(work.front());
    work.pop_front();
    if (n.depth >= depth) continue;
    for (const auto& ev : left.visible_enabled(n.l)) {
      std::set<int> nl = left.step(n.l, ev);
      if (nl.empty()) continue;  // only epsilon-moves followed that event
      std::set<int> nr = right.step(n.r, ev);
      std::vector<std::string> path = n.path;
      path.push_back(ev);
      if (nr.empty()) return {false, std::move(path)};
      if (seen.insert({nl, nr}).second)
        work.push_back({std::move(nl), std::move(nr), n.depth + 1, std::move(path)});
    }
  }
  return {};
}

}  // namespace trace
