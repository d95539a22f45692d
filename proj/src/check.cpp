#include "skillmc/check.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "json.hpp"

namespace skillmc {

namespace {

/// Product state: (global network state, automaton state).
struct PKey {
  GlobalState g;
  int q;
  bool operator==(const PKey& o) const { return q == o.q && g == o.g; }
};

struct PKeyHash {
  size_t operator()(const PKey& k) const {
    return GlobalStateHash{}(k.g) * 31 + static_cast<size_t>(k.q);
  }
};

class ProductExplorer {
 public:
  ProductExplorer(const Network& net, const BuchiAutomaton& ba, uint64_t max_states)
      : net_(net), ba_(ba), max_states_(max_states) {
    atom_comp_.reserve(ba.atom_parts.size());
    atom_state_.reserve(ba.atom_parts.size());
    for (const auto& [comp, state] : ba.atom_parts) {
      int c = net.component_index(comp);
      if (c < 0) throw std::invalid_argument("unknown component in atom: " + comp);
      int s = net.component(c).state_index(state);
      if (s < 0)
        throw std::invalid_argument("component " + comp + " has no state " + state);
      atom_comp_.push_back(c);
      atom_state_.push_back(s);
    }
  }

  int intern(const GlobalState& g, int q) {
    PKey k{g, q};
    auto it = index_.find(k);
    if (it != index_.end()) return it->second;
    if (states_.size() >= max_states_)
      throw BoundExceeded("product exceeds state bound of " + std::to_string(max_states_));
    int id = static_cast<int>(states_.size());
    index_.emplace(std::move(k), id);
    states_.push_back({g, q});
    return id;
  }

  const PKey& state(int id) const { return states_[static_cast<size_t>(id)]; }
  uint64_t explored() const { return states_.size(); }

  uint64_t valuation(const GlobalState& g) const {
    uint64_t m = 0;
    for (size_t a = 0; a < atom_comp_.size(); ++a)
      if (g[static_cast<size_t>(atom_comp_[a])] == atom_state_[a]) m |= 1ull << a;
    return m;
  }

  /// Successors of a product state in deterministic order: network
  /// transitions (event-major), automaton edges within each.
  /// Yields (event_id, successor product id); event_id -1 is __stutter.
  std::vector<std::pair<int, int>> successors(int id) {
    const PKey s = states_[static_cast<size_t>(id)];  // copy: states_ may grow
    uint64_t val = valuation(s.g);
    std::vector<std::pair<int, int>> out;
    net_.for_each_transition(s.g, [&](int event, const GlobalState& t) {
      for (const auto& e : ba_.edges[static_cast<size_t>(s.q)]) {
        if (!ba_.edge_enabled(e, val)) continue;
        out.emplace_back(event, intern(t, e.dst));
      }
    });
    return out;
  }

  bool accepting(int id) const {
    return ba_.accepting[static_cast<size_t>(states_[static_cast<size_t>(id)].q)] != 0;
  }

  std::string event_name(int event) const {
    return event < 0 ? std::string(Network::kStutter) : net_.events()[static_cast<size_t>(event)];
  }

 private:
  const Network& net_;
  const BuchiAutomaton& ba_;
  uint64_t max_states_;
  std::unordered_map<PKey, int, PKeyHash> index_;
  std::vector<PKey> states_;
  std::vector<int> atom_comp_, atom_state_;
};

struct PathStep {
  int id;
  int in_event;  // event taken to reach id; meaningless for the root
};

Lasso assemble_lasso(const ProductExplorer& px, const std::vector<PathStep>& path,
                     size_t cycle_start_index, const std::vector<PathStep>& tail,
                     int close_event, int close_target) {
  Lasso lasso;
  for (size_t i = 1; i <= cycle_start_index; ++i)
    lasso.prefix.push_back({px.event_name(path[i].in_event), px.state(path[i].id).g});
  for (size_t i = cycle_start_index + 1; i < path.size(); ++i)
    lasso.cycle.push_back({px.event_name(path[i].in_event), px.state(path[i].id).g});
  for (const auto& st : tail)
    lasso.cycle.push_back({px.event_name(st.in_event), px.state(st.id).g});
  lasso.cycle.push_back({px.event_name(close_event), px.state(close_target).g});
  return lasso;
}

/// Nested depth-first search (on-the-fly; cyan/blue plus a red overlay).
/// Returns a violating lasso or nullopt when the product language is empty.
std::optional<Lasso> run_ndfs(ProductExplorer& px, int init) {
  enum : uint8_t { White = 0, Cyan = 1, Blue = 2 };
  std::vector<uint8_t> color;
  std::vector<uint8_t> red;
  auto ensure = [&](int id) {
    if (static_cast<size_t>(id) >= color.size()) {
      color.resize(static_cast<size_t>(id) + 1, White);
      red.resize(static_cast<size_t>(id) + 1, 0);
    }
  };

  struct Frame {
    int id;
    int in_event;
    std::vector<std::pair<int, int>> succ;
    size_t next = 0;
  };

  std::vector<Frame> blue;
  ensure(init);
  color[static_cast<size_t>(init)] = Cyan;
  blue.push_back({init, -2, px.successors(init), 0});

  auto blue_path = [&]() {
    std::vector<PathStep> p;
    p.reserve(blue.size());
    for (const auto& f : blue) p.push_back({f.id, f.in_event});
    return p;
  };
  auto find_on_path = [&](const std::vector<PathStep>& p, int id) -> size_t {
    for (size_t i = p.size(); i > 0; --i)
      if (p[i - 1].id == id) return i - 1;
    return p.size();  // not found
  };

  while (!blue.empty()) {
    Frame& f = blue.back();
    if (f.next < f.succ.size()) {
      auto [ev, t] = f.succ[f.next++];
      ensure(t);
      uint8_t& tc = color[static_cast<size_t>(t)];
      if (tc == Cyan && (px.accepting(f.id) || px.accepting(t))) {
        auto p = blue_path();
        size_t at = find_on_path(p, t);
        return assemble_lasso(px, p, at, {}, ev, t);
      }
      if (tc == White) {
        tc = Cyan;
        int ev_in = ev;
        blue.push_back({t, ev_in, px.successors(t), 0});
      }
      continue;
    }
    // Postorder: seed the red search at accepting states.
    Frame seed = std::move(blue.back());
    blue.pop_back();
    if (px.accepting(seed.id)) {
      red[static_cast<size_t>(seed.id)] = 1;
      std::vector<Frame> rstack;
      rstack.push_back({seed.id, seed.in_event, px.successors(seed.id), 0});
      while (!rstack.empty()) {
        Frame& r = rstack.back();
        if (r.next >= r.succ.size()) {
          rstack.pop_back();
          continue;
        }
        auto [ev, t] = r.succ[r.next++];
        ensure(t);
        if (color[static_cast<size_t>(t)] == Cyan || t == seed.id) {
          // Cycle: blue path to t (or to the seed), then down the red path.
          auto p = blue_path();
          p.push_back({seed.id, seed.in_event});
          size_t at = find_on_path(p, t);
          std::vector<PathStep> tail;
          for (size_t i = 1; i < rstack.size(); ++i)
            tail.push_back({rstack[i].id, rstack[i].in_event});
          return assemble_lasso(px, p, at, tail, ev, t);
        }
        if (!red[static_cast<size_t>(t)]) {
          red[static_cast<size_t>(t)] = 1;
          rstack.push_back({t, ev, px.successors(t), 0});
        }
      }
    }
    color[static_cast<size_t>(seed.id)] = Blue;
  }
  return std::nullopt;
}

/// Tarjan SCC over the materialized product; a counterexample exists iff
/// some SCC contains an accepting state and an internal edge.
std::optional<Lasso> run_scc(ProductExplorer& px, int init) {
  std::vector<std::vector<std::pair<int, int>>> adj;  // (event, target)
  std::deque<int> bfs{init};
  adj.emplace_back();
  std::vector<char> seen{1};
  // Materialize with BFS so state ids follow discovery order.
  for (size_t head = 0; head < bfs.size(); ++head) {
    int v = bfs[head];
    auto succ = px.successors(v);
    for (auto [ev, t] : succ) {
      if (static_cast<size_t>(t) >= seen.size()) {
        seen.resize(static_cast<size_t>(t) + 1, 0);
        adj.resize(static_cast<size_t>(t) + 1);
      }
      if (!seen[static_cast<size_t>(t)]) {
        seen[static_cast<size_t>(t)] = 1;
        bfs.push_back(t);
      }
      adj[static_cast<size_t>(v)].emplace_back(ev, t);
    }
  }
  const int n = static_cast<int>(adj.size());

  // Iterative Tarjan.
  std::vector<int> idx(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0),
      comp(static_cast<size_t>(n), -1);
  std::vector<char> on_stack(static_cast<size_t>(n), 0);
  std::vector<int> stack;
  int counter = 0, comp_count = 0;
  struct TFrame {
    int v;
    size_t next = 0;
  };
  for (int root = 0; root < n; ++root) {
    if (idx[static_cast<size_t>(root)] != -1) continue;
    std::vector<TFrame> call{{root, 0}};
    idx[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<size_t>(root)] = 1;
    while (!call.empty()) {
      TFrame& f = call.back();
      if (f.next < adj[static_cast<size_t>(f.v)].size()) {
        int w = adj[static_cast<size_t>(f.v)][f.next++].second;
        if (idx[static_cast<size_t>(w)] == -1) {
          idx[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = counter++;
          stack.push_back(w);
          on_stack[static_cast<size_t>(w)] = 1;
          call.push_back({w, 0});
        } else if (on_stack[static_cast<size_t>(w)]) {
          low[static_cast<size_t>(f.v)] =
              std::min(low[static_cast<size_t>(f.v)], idx[static_cast<size_t>(w)]);
        }
        continue;
      }
      if (low[static_cast<size_t>(f.v)] == idx[static_cast<size_t>(f.v)]) {
        while (true) {
          int w = stack.back();
          stack.pop_back();
          on_stack[static_cast<size_t>(w)] = 0;
          comp[static_cast<size_t>(w)] = comp_count;
          if (w == f.v) break;
        }
        ++comp_count;
      }
      int v = f.v;
      call.pop_back();
      if (!call.empty())
        low[static_cast<size_t>(call.back().v)] =
            std::min(low[static_cast<size_t>(call.back().v)], low[static_cast<size_t>(v)]);
    }
  }

  std::vector<int> comp_size(static_cast<size_t>(comp_count), 0);
  for (int v = 0; v < n; ++v) ++comp_size[static_cast<size_t>(comp[static_cast<size_t>(v)])];
  auto on_cycle = [&](int v) {
    if (comp_size[static_cast<size_t>(comp[static_cast<size_t>(v)])] > 1) return true;
    for (auto [ev, t] : adj[static_cast<size_t>(v)])
      if (t == v) return true;
    return false;
  };

  // First accepting state (in discovery order) lying on a cycle.
  int target = -1;
  for (int v = 0; v < n; ++v) {
    if (px.accepting(v) && on_cycle(v)) {
      target = v;
      break;
    }
  }
  if (target < 0) return std::nullopt;

  // Shortest nonempty path from -> to (BFS; `to` may equal `from`, giving the
  // shortest cycle). Returns (event, state) steps ending at `to`.
  auto shortest_path = [&](int from, int to, bool within_comp) {
    std::vector<int> parent(static_cast<size_t>(n), -1), parent_ev(static_cast<size_t>(n), -2);
    std::vector<char> visited(static_cast<size_t>(n), 0);
    std::deque<int> q{from};
    visited[static_cast<size_t>(from)] = 1;
    int close_v = -1, close_ev = -2;
    while (!q.empty() && close_v < 0) {
      int v = q.front();
      q.pop_front();
      for (auto [ev, t] : adj[static_cast<size_t>(v)]) {
        if (within_comp && comp[static_cast<size_t>(t)] != comp[static_cast<size_t>(from)])
          continue;
        if (t == to) {
          close_v = v;
          close_ev = ev;
          break;
        }
        if (!visited[static_cast<size_t>(t)]) {
          visited[static_cast<size_t>(t)] = 1;
          parent[static_cast<size_t>(t)] = v;
          parent_ev[static_cast<size_t>(t)] = ev;
          q.push_back(t);
        }
      }
    }
    std::vector<std::pair<int, int>> rev;  // (event, state), reversed
    rev.emplace_back(close_ev, to);
    for (int v = close_v; v != from; v = parent[static_cast<size_t>(v)])
      rev.emplace_back(parent_ev[static_cast<size_t>(v)], v);
    std::reverse(rev.begin(), rev.end());
    return rev;
  };

  Lasso lasso;
  if (target != init)
    for (auto [ev, v] : shortest_path(init, target, false))
      lasso.prefix.push_back({px.event_name(ev), px.state(v).g});
  for (auto [ev, v] : shortest_path(target, target, true))
    lasso.cycle.push_back({px.event_name(ev), px.state(v).g});
  return lasso;
}

}  // namespace

Verdict model_check(const Network& net, const LtlPtr& formula, Engine engine,
                    uint64_t max_states) {
  const Network closed = net.stutter_closed() ? net : net.stutter_close();
  BuchiAutomaton ba = ltl_to_buchi(negate(formula));
  ProductExplorer px(closed, ba, max_states);
  int init = px.intern(closed.initial_state(), 0);

  std::optional<Lasso> lasso =
      engine == Engine::Ndfs ? run_ndfs(px, init) : run_scc(px, init);

  Verdict v;
  v.holds = !lasso.has_value();
  v.states_explored = px.explored();
  v.lasso = std::move(lasso);
  return v;
}

LassoWord lasso_word(const Network& net, const Lasso& lasso) {
  LassoWord w;
  auto valuation = [&](const GlobalState& g) {
    std::set<std::string> keys;
    for (size_t c = 0; c < net.components().size(); ++c)
      keys.insert(atom_key(net.component(static_cast<int>(c)).name(),
                           net.component(static_cast<int>(c)).state_name(g[c])));
    return keys;
  };
  GlobalState g0 = net.initial_state();
  w.vals.push_back(valuation(g0));
  for (size_t i = 0; i + 1 < lasso.prefix.size(); ++i)
    w.vals.push_back(valuation(lasso.prefix[i].state));
  // Position of the cycle's first state: the prefix's final state (or the
  // initial state when the prefix is empty).
  w.loop = w.vals.size() - (lasso.prefix.empty() ? 1 : 0);
  if (!lasso.prefix.empty()) w.vals.push_back(valuation(lasso.prefix.back().state));
  for (size_t i = 0; i + 1 < lasso.cycle.size(); ++i)
    w.vals.push_back(valuation(lasso.cycle[i].state));
  return w;
}

namespace {

nlohmann::ordered_json state_json(const Network& net, const GlobalState& g) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (size_t c = 0; c < net.components().size(); ++c)
    j[net.component(static_cast<int>(c)).name()] =
        net.component(static_cast<int>(c)).state_name(g[c]);
  return j;
}

nlohmann::ordered_json steps_json(const Network& net, const std::vector<LassoStep>& steps) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json j;
    j["event"] = s.event;
    j["state"] = state_json(net, s.state);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string verdict_json(const Network& net, const Verdict& v, bool include_time) {
  nlohmann::ordered_json j;
  j["verdict"] = v.holds ? "holds" : "violated";
  j["states_explored"] = v.states_explored;
  if (include_time) j["time_ms"] = static_cast<uint64_t>(v.time_ms + 0.5);
  if (v.lasso) {
    j["lasso"]["prefix"] = steps_json(net, v.lasso->prefix);
    j["lasso"]["cycle"] = steps_json(net, v.lasso->cycle);
  }
  return j.dump(2) + "\n";
}

std::string verdict_text(const Network& net, const Verdict& v, bool include_time) {
  std::string out = v.holds ? "HOLDS" : "VIOLATED";
  out += " (states explored: " + std::to_string(v.states_explored);
  if (include_time) out += ", time: " + std::to_string(static_cast<uint64_t>(v.time_ms + 0.5)) + " ms";
  out += ")\n";
  if (!v.lasso) return out;
  auto render = [&](const std::vector<LassoStep>& steps) {
    std::string s;
    for (const auto& st : steps) {
      s += "  --" + st.event + "--> ";
      for (size_t c = 0; c < net.components().size(); ++c) {
        if (c) s += " | ";
        s += net.component(static_cast<int>(c)).state_name(st.state[c]);
      }
      s += "\n";
    }
    return s;
  };
  GlobalState g0 = net.initial_state();
  out += "counterexample lasso:\n  initial: ";
  for (size_t c = 0; c < net.components().size(); ++c) {
    if (c) out += " | ";
    out += net.component(static_cast<int>(c)).state_name(g0[c]);
  }
  out += "\n";
  if (!v.lasso->prefix.empty()) {
    out += "prefix:\n" + render(v.lasso->prefix);
  }
  out += "cycle:\n" + render(v.lasso->cycle);
  return out;
}

}  // namespace skillmc
