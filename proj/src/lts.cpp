#include "skillmc/lts.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace skillmc {

namespace {
const std::vector<int32_t> kNoTargets;
}

int Lts::add_state(const std::string& name) {
  if (state_index_.count(name))
    throw std::invalid_argument("lts '" + name_ + "': duplicate state '" + name + "'");
  int id = static_cast<int>(states_.size());
  states_.push_back(name);
  state_index_.emplace(name, id);
  succ_.emplace_back();
  if (initial_ < 0) initial_ = 0;
  return id;
}

void Lts::set_initial(std::string_view state) {
  int id = state_index(state);
  if (id < 0)
    throw std::invalid_argument("lts '" + name_ + "': unknown initial state '" +
                                std::string(state) + "'");
  initial_ = id;
}

int Lts::ensure_event(const std::string& name) {
  auto it = event_index_.find(name);
  if (it != event_index_.end()) return it->second;
  int id = static_cast<int>(alphabet_.size());
  alphabet_.push_back(name);
  event_index_.emplace(name, id);
  return id;
}

int Lts::state_index(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  return it == state_index_.end() ? -1 : it->second;
}

int Lts::event_index(std::string_view name) const {
  auto it = event_index_.find(std::string(name));
  return it == event_index_.end() ? -1 : it->second;
}

void Lts::add_transition(std::string_view src, const std::string& event, std::string_view dst) {
  int s = state_index(src);
  int d = state_index(dst);
  if (s < 0 || d < 0)
    throw std::invalid_argument("lts '" + name_ + "': transition references unknown state");
  add_transition_ids(s, ensure_event(event), d);
}

void Lts::add_transition_ids(int src, int event, int dst) {
  if (src < 0 || src >= num_states() || dst < 0 || dst >= num_states() || event < 0 ||
      event >= static_cast<int>(alphabet_.size()))
    throw std::invalid_argument("lts '" + name_ + "': transition index out of range");
  auto& row = succ_[static_cast<size_t>(src)];
  if (row.size() <= static_cast<size_t>(event)) row.resize(alphabet_.size());
  auto& tgts = row[static_cast<size_t>(event)];
  auto it = std::lower_bound(tgts.begin(), tgts.end(), dst);
  if (it != tgts.end() && *it == dst) return;  // duplicates are ignored
  tgts.insert(it, dst);
  transitions_.push_back({src, event, dst});
}

const std::vector<int32_t>& Lts::targets(int state, int event) const {
  const auto& row = succ_.at(static_cast<size_t>(state));
  if (event < 0 || static_cast<size_t>(event) >= row.size()) return kNoTargets;
  return row[static_cast<size_t>(event)];
}

bool Lts::has_transition(int src, int event, int dst) const {
  const auto& t = targets(src, event);
  return std::binary_search(t.begin(), t.end(), dst);
}

Lts Lts::without_event(std::string_view event) const {
  Lts out(name_);
  for (const auto& s : states_) out.add_state(s);
  out.initial_ = initial_;
  for (const auto& e : alphabet_)
    if (e != event) out.ensure_event(e);
  for (const auto& t : transitions_) {
    const std::string& e = alphabet_[static_cast<size_t>(t.event)];
    if (e != event) out.add_transition_ids(t.src, out.ensure_event(e), t.dst);
  }
  return out;
}

Network::Network(std::vector<Lts> components, bool stutter_closed)
    : comps_(std::move(components)), stuttered_(stutter_closed) {
  std::set<std::string> names;
  std::set<std::string> events;
  for (const auto& c : comps_) {
    if (c.num_states() == 0)
      throw std::invalid_argument("network component '" + c.name() + "' has no states");
    if (!names.insert(c.name()).second)
      throw std::invalid_argument("duplicate network component name '" + c.name() + "'");
    if (c.name() == kStutter || (c.name().size() >= 2 && c.name()[0] == '_' && c.name()[1] == '_'))
      throw std::invalid_argument("reserved network component name '" + c.name() + "'");
    for (const auto& e : c.alphabet()) {
      if (e == kStutter) throw std::invalid_argument("event name '__stutter' is reserved");
      events.insert(e);
    }
  }
  events_.assign(events.begin(), events.end());  // lexicographic
  for (int i = 0; i < static_cast<int>(events_.size()); ++i) event_index_.emplace(events_[i], i);
  participants_.resize(events_.size());
  for (size_t e = 0; e < events_.size(); ++e) {
    for (int c = 0; c < static_cast<int>(comps_.size()); ++c) {
      int local = comps_[static_cast<size_t>(c)].event_index(events_[e]);
      if (local >= 0) participants_[e].emplace_back(c, local);
    }
  }
}

int Network::component_index(std::string_view name) const {
  for (int i = 0; i < static_cast<int>(comps_.size()); ++i)
    if (comps_[static_cast<size_t>(i)].name() == name) return i;
  return -1;
}

int Network::event_index(std::string_view name) const {
  auto it = event_index_.find(std::string(name));
  return it == event_index_.end() ? -1 : it->second;
}

Network Network::without_event(std::string_view event) const {
  std::vector<Lts> comps;
  comps.reserve(comps_.size());
  for (const auto& c : comps_) comps.push_back(c.without_event(event));
  return Network(std::move(comps), stuttered_);
}

GlobalState Network::initial_state() const {
  GlobalState g(comps_.size());
  for (size_t i = 0; i < comps_.size(); ++i) g[i] = comps_[i].initial();
  return g;
}

void Network::check_state(const GlobalState& g) const {
  if (g.size() != comps_.size())
    throw std::invalid_argument("global state arity mismatch");
  for (size_t i = 0; i < g.size(); ++i)
    if (g[i] < 0 || g[i] >= comps_[i].num_states())
      throw std::invalid_argument("global state component out of range");
}

bool Network::deadlocked(const GlobalState& g) const {
  for (int e = 0; e < static_cast<int>(events_.size()); ++e) {
    bool any = true;
    for (const auto& [comp, local] : participants_[static_cast<size_t>(e)]) {
      if (comps_[static_cast<size_t>(comp)].targets(g[static_cast<size_t>(comp)], local).empty()) {
        any = false;
        break;
      }
    }
    if (any) return false;
  }
  return true;
}

std::vector<GlobalState> Network::successors(const GlobalState& g, std::string_view event) const {
  check_state(g);
  if (event == kStutter) {
    if (stuttered_ && deadlocked(g)) return {g};
    return {};
  }
  int e = event_index(event);
  if (e < 0) return {};
  std::vector<GlobalState> out;
  for_event(g, e, [&](const GlobalState& t) { out.push_back(t); });
  return out;
}

std::vector<std::string> Network::enabled_events(const GlobalState& g) const {
  check_state(g);
  std::vector<std::string> out;
  for (int e = 0; e < static_cast<int>(events_.size()); ++e) {
    bool any = true;
    for (const auto& [comp, local] : participants_[static_cast<size_t>(e)]) {
      if (comps_[static_cast<size_t>(comp)].targets(g[static_cast<size_t>(comp)], local).empty()) {
        any = false;
        break;
      }
    }
    if (any) out.push_back(events_[static_cast<size_t>(e)]);
  }
  if (out.empty() && stuttered_) out.emplace_back(kStutter);
  return out;
}

ReachStats Network::reachable(uint64_t max_states) const {
  ReachStats stats;
  std::unordered_map<GlobalState, int, GlobalStateHash> seen;
  std::deque<GlobalState> queue;
  GlobalState init = initial_state();
  seen.emplace(init, 0);
  queue.push_back(init);
  while (!queue.empty()) {
    GlobalState g = std::move(queue.front());
    queue.pop_front();
    bool dead = true;
    for_each_transition(g, [&](int e, const GlobalState& t) {
      if (e < 0) return;  // __stutter self-loops are not counted
      dead = false;
      ++stats.transitions;
      if (!seen.count(t)) {
        if (seen.size() >= max_states) {
          stats.truncated = true;
          --stats.transitions;  // only count edges between retained states
          return;
        }
        seen.emplace(t, static_cast<int>(seen.size()));
        queue.push_back(t);
      }
    });
    if (dead) ++stats.deadlocks;
  }
  stats.states = seen.size();
  return stats;
}

Lts Network::product_explicit(uint64_t max_states) const {
  Lts out("product");
  std::unordered_map<GlobalState, int, GlobalStateHash> ids;
  std::vector<GlobalState> order;
  auto state_name = [&](const GlobalState& g) {
    std::string n;
    for (size_t i = 0; i < g.size(); ++i) {
      if (i) n += '|';
      n += comps_[i].state_name(g[i]);
    }
    return n;
  };
  auto intern = [&](const GlobalState& g) -> int {
    auto it = ids.find(g);
    if (it != ids.end()) return it->second;
    if (ids.size() >= max_states)
      throw BoundExceeded("product state space exceeds " + std::to_string(max_states) +
                          " states");
    int id = out.add_state(state_name(g));
    ids.emplace(g, id);
    order.push_back(g);
    return id;
  };
  intern(initial_state());
  for (const auto& e : events_) out.ensure_event(e);
  if (stuttered_) out.ensure_event(std::string(kStutter));
  for (size_t next = 0; next < order.size(); ++next) {
    GlobalState g = order[next];  // copy: `order` may grow and reallocate
    int src = ids.at(g);
    for_each_transition(g, [&](int e, const GlobalState& t) {
      int dst = intern(t);
      int ev = e >= 0 ? out.event_index(events_[static_cast<size_t>(e)])
                      : out.event_index(kStutter);
      out.add_transition_ids(src, ev, dst);
    });
  }
  return out;
}

std::string export_dot(const Lts& lts) {
  std::ostringstream os;
  os << "digraph \"" << lts.name() << "\" {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=ellipse];\n";
  if (lts.num_states() > 0) {
    os << "  \"__initial\" [shape=point, label=\"\"];\n";
    os << "  \"__initial\" -> \"" << lts.state_name(lts.initial()) << "\";\n";
  }
  for (const auto& s : lts.states()) os << "  \"" << s << "\";\n";
  for (const auto& t : lts.transitions()) {
    os << "  \"" << lts.state_name(t.src) << "\" -> \"" << lts.state_name(t.dst)
       << "\" [label=\"" << lts.alphabet()[static_cast<size_t>(t.event)] << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string export_dot(const Network& net) {
  std::string out;
  for (const auto& c : net.components()) out += export_dot(c);
  return out;
}

}  // namespace skillmc
