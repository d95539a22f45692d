#include "skillmc/buchi.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace skillmc {

namespace {

/// Closure of the formula: every distinct subformula, indexed. Structure is
/// flattened so set membership fits in a uint64_t bitmask.
struct Closure {
  std::vector<LtlPtr> formulas;
  std::vector<int> lhs, rhs;      // child indices (-1 when absent)
  std::vector<int> atom_of;       // atom index for Atom / Not(Atom), else -1
  std::vector<std::string> atoms;                               // atom keys
  std::vector<std::pair<std::string, std::string>> atom_parts;  // (comp, state)
  std::map<std::string, int> index_by_print;

  int add(const LtlPtr& f) {
    std::string key = to_string(f);
    auto it = index_by_print.find(key);
    if (it != index_by_print.end()) return it->second;
    int l = -1, r = -1;
    if (f->lhs) l = add(f->lhs);
    if (f->rhs) r = add(f->rhs);
    // Children may have grown the table; re-check before inserting.
    it = index_by_print.find(key);
    if (it != index_by_print.end()) return it->second;
    int id = static_cast<int>(formulas.size());
    if (id >= 64) throw std::invalid_argument("formula too large: more than 64 subformulas");
    formulas.push_back(f);
    lhs.push_back(l);
    rhs.push_back(r);
    int atom = -1;
    const Ltl* a = nullptr;
    if (f->kind == Ltl::Kind::Atom) a = f.get();
    if (f->kind == Ltl::Kind::Not && f->lhs->kind == Ltl::Kind::Atom) a = f->lhs.get();
    if (a) {
      std::string k = atom_key(a->comp, a->state);
      auto pos = std::find(atoms.begin(), atoms.end(), k);
      if (pos == atoms.end()) {
        atom = static_cast<int>(atoms.size());
        atoms.push_back(k);
        atom_parts.emplace_back(a->comp, a->state);
      } else {
        atom = static_cast<int>(pos - atoms.begin());
      }
    }
    atom_of.push_back(atom);
    index_by_print.emplace(std::move(key), id);
    return id;
  }
};

constexpr uint64_t bit(int i) { return 1ull << i; }

/// Tableau node during expansion.
struct Node {
  std::set<int> incoming;  // finished-node ids; -1 marks the initial edge
  uint64_t new_set = 0, old = 0, next = 0;
};

struct Finished {
  std::set<int> incoming;
  uint64_t old = 0, next = 0;
};

}  // namespace

BuchiAutomaton ltl_to_buchi(const LtlPtr& f) {
  Closure cl;
  int root = cl.add(f);

  // A literal's contradiction partner, when present in the closure.
  auto contradiction = [&](int id) -> int {
    const LtlPtr& g = cl.formulas[static_cast<size_t>(id)];
    LtlPtr other;
    if (g->kind == Ltl::Kind::Atom) {
      other = Ltl::not_(g);
    } else if (g->kind == Ltl::Kind::Not) {
      other = g->lhs;
    } else {
      return -1;
    }
    auto it = cl.index_by_print.find(to_string(other));
    return it == cl.index_by_print.end() ? -1 : it->second;
  };

  std::vector<Finished> finished;
  std::vector<Node> work;
  {
    Node init;
    init.incoming.insert(-1);
    init.new_set = bit(root);
    work.push_back(std::move(init));
  }
  while (!work.empty()) {
    Node nd = std::move(work.back());
    work.pop_back();
    if (nd.new_set == 0) {
      bool merged = false;
      for (auto& fin : finished) {
        if (fin.old == nd.old && fin.next == nd.next) {
          fin.incoming.insert(nd.incoming.begin(), nd.incoming.end());
          merged = true;
          break;
        }
      }
      if (merged) continue;
      int id = static_cast<int>(finished.size());
      finished.push_back({nd.incoming, nd.old, nd.next});
      Node succ;
      succ.incoming.insert(id);
      succ.new_set = nd.next;
      work.push_back(std::move(succ));
      continue;
    }
    // Process the lowest-index pending formula.
    int eta = 0;
    while (!(nd.new_set & bit(eta))) ++eta;
    nd.new_set &= ~bit(eta);
    const LtlPtr& g = cl.formulas[static_cast<size_t>(eta)];
    auto add_new = [&](Node& n, int idx) {
      if (!(n.old & bit(idx))) n.new_set |= bit(idx);
    };
    switch (g->kind) {
      case Ltl::Kind::False:
        continue;  // inconsistent node: drop
      case Ltl::Kind::True:
        nd.old |= bit(eta);
        work.push_back(std::move(nd));
        continue;
      case Ltl::Kind::Atom:
      case Ltl::Kind::Not: {
        int other = contradiction(eta);
        if (other >= 0 && (nd.old & bit(other))) continue;  // contradiction: drop
        nd.old |= bit(eta);
        work.push_back(std::move(nd));
        continue;
      }
      case Ltl::Kind::And: {
        nd.old |= bit(eta);
        add_new(nd, cl.lhs[static_cast<size_t>(eta)]);
        add_new(nd, cl.rhs[static_cast<size_t>(eta)]);
        work.push_back(std::move(nd));
        continue;
      }
      case Ltl::Kind::Or: {
        Node n1 = nd, n2 = std::move(nd);
        n1.old |= bit(eta);
        n2.old |= bit(eta);
        add_new(n1, cl.lhs[static_cast<size_t>(eta)]);
        add_new(n2, cl.rhs[static_cast<size_t>(eta)]);
        work.push_back(std::move(n1));
        work.push_back(std::move(n2));
        continue;
      }
      case Ltl::Kind::Next: {
        nd.old |= bit(eta);
        nd.next |= bit(cl.lhs[static_cast<size_t>(eta)]);
        work.push_back(std::move(nd));
        continue;
      }
      case Ltl::Kind::Until: {
        // φ U ψ = ψ ∨ (φ ∧ X(φ U ψ))
        Node n1 = nd, n2 = std::move(nd);
        n1.old |= bit(eta);
        n2.old |= bit(eta);
        add_new(n1, cl.lhs[static_cast<size_t>(eta)]);
        n1.next |= bit(eta);
        add_new(n2, cl.rhs[static_cast<size_t>(eta)]);
        work.push_back(std::move(n1));
        work.push_back(std::move(n2));
        continue;
      }
      case Ltl::Kind::Release: {
        // φ R ψ = (ψ ∧ φ) ∨ (ψ ∧ X(φ R ψ))
        Node n1 = nd, n2 = std::move(nd);
        n1.old |= bit(eta);
        n2.old |= bit(eta);
        add_new(n1, cl.rhs[static_cast<size_t>(eta)]);
        n1.next |= bit(eta);
        add_new(n2, cl.lhs[static_cast<size_t>(eta)]);
        add_new(n2, cl.rhs[static_cast<size_t>(eta)]);
        work.push_back(std::move(n1));
        work.push_back(std::move(n2));
        continue;
      }
      default:
        throw std::invalid_argument("ltl_to_buchi requires a formula in negation normal form");
    }
  }

  // Generalized acceptance: one set per Until subformula.
  std::vector<std::pair<int, int>> untils;  // (formula index, rhs index)
  for (size_t i = 0; i < cl.formulas.size(); ++i)
    if (cl.formulas[i]->kind == Ltl::Kind::Until)
      untils.emplace_back(static_cast<int>(i), cl.rhs[i]);
  const int K = untils.empty() ? 1 : static_cast<int>(untils.size());
  auto in_accept_set = [&](int q, int i) {  // i is 1-based
    if (untils.empty()) return true;
    auto [u, psi] = untils[static_cast<size_t>(i - 1)];
    return !(finished[static_cast<size_t>(q)].old & bit(u)) ||
           (finished[static_cast<size_t>(q)].old & bit(psi));
  };

  // State-labeled adjacency from the incoming sets.
  const int n = static_cast<int>(finished.size());
  std::vector<std::vector<int>> succs(static_cast<size_t>(n));
  std::vector<int> initials;
  for (int q = 0; q < n; ++q) {
    for (int r : finished[static_cast<size_t>(q)].incoming) {
      if (r == -1)
        initials.push_back(q);
      else
        succs[static_cast<size_t>(r)].push_back(q);
    }
  }
  for (auto& v : succs) std::sort(v.begin(), v.end());
  std::sort(initials.begin(), initials.end());

  auto label_true = [&](int q) {
    uint64_t m = 0;
    for (size_t i = 0; i < cl.formulas.size(); ++i)
      if ((finished[static_cast<size_t>(q)].old & bit(static_cast<int>(i))) &&
          cl.formulas[i]->kind == Ltl::Kind::Atom)
        m |= bit(cl.atom_of[i]);
    return m;
  };
  auto label_false = [&](int q) {
    uint64_t m = 0;
    for (size_t i = 0; i < cl.formulas.size(); ++i)
      if ((finished[static_cast<size_t>(q)].old & bit(static_cast<int>(i))) &&
          cl.formulas[i]->kind == Ltl::Kind::Not &&
          cl.formulas[i]->lhs->kind == Ltl::Kind::Atom)
        m |= bit(cl.atom_of[i]);
    return m;
  };

  // Degeneralize (counter over acceptance sets, advanced on leaving a state
  // of the current set) and convert to transition labels: the edge into a
  // tableau state carries that state's literal constraints. Only the part
  // reachable from the pseudo-initial state is kept.
  BuchiAutomaton ba;
  ba.atoms = cl.atoms;
  ba.atom_parts = cl.atom_parts;
  std::map<std::pair<int, int>, int> id_of;  // (q, counter) -> state id
  std::vector<std::pair<int, int>> order;
  auto intern = [&](int q, int i) {
    auto [it, inserted] = id_of.emplace(std::make_pair(q, i), static_cast<int>(order.size()) + 1);
    if (inserted) order.emplace_back(q, i);
    return it->second;
  };
  ba.edges.emplace_back();  // pseudo-initial, id 0
  for (int q : initials) {
    BuchiEdge e;
    e.dst = intern(q, 1);
    e.must_true = label_true(q);
    e.must_false = label_false(q);
    ba.edges[0].push_back(e);
  }
  for (size_t k = 0; k < order.size(); ++k) {
    auto [q, i] = order[k];
    int next_i = in_accept_set(q, i) ? (i % K) + 1 : i;
    ba.edges.emplace_back();
    for (int q2 : succs[static_cast<size_t>(q)]) {
      BuchiEdge e;
      e.dst = intern(q2, next_i);
      e.must_true = label_true(q2);
      e.must_false = label_false(q2);
      ba.edges[k + 1].push_back(e);
    }
  }
  ba.num_states = static_cast<int>(order.size()) + 1;
  ba.accepting.assign(static_cast<size_t>(ba.num_states), 0);
  for (size_t k = 0; k < order.size(); ++k) {
    auto [q, i] = order[k];
    if (i == 1 && in_accept_set(q, 1)) ba.accepting[k + 1] = 1;
  }
  return ba;
}

bool accepts_lasso(const BuchiAutomaton& ba, const LassoWord& word) {
  const size_t n = word.vals.size();
  if (n == 0 || word.loop >= n) throw std::invalid_argument("malformed lasso word");
  std::vector<uint64_t> vmask(n, 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t a = 0; a < ba.atoms.size(); ++a)
      if (word.vals[i].count(ba.atoms[a])) vmask[i] |= 1ull << a;
  auto next = [&](size_t i) { return i + 1 < n ? i + 1 : word.loop; };

  // Node (i, s) = about to read position i in automaton state s.
  const size_t total = n * static_cast<size_t>(ba.num_states);
  auto id = [&](size_t i, int s) { return i * static_cast<size_t>(ba.num_states) + static_cast<size_t>(s); };
  std::vector<char> reach(total, 0);
  std::vector<size_t> stack{id(0, 0)};
  reach[id(0, 0)] = 1;
  while (!stack.empty()) {
    size_t v = stack.back();
    stack.pop_back();
    size_t i = v / static_cast<size_t>(ba.num_states);
    int s = static_cast<int>(v % static_cast<size_t>(ba.num_states));
    for (const auto& e : ba.edges[static_cast<size_t>(s)]) {
      if (!ba.edge_enabled(e, vmask[i])) continue;
      size_t w = id(next(i), e.dst);
      if (!reach[w]) {
        reach[w] = 1;
        stack.push_back(w);
      }
    }
  }
  // Accepted iff some reachable accepting node lies on a cycle.
  for (size_t v = 0; v < total; ++v) {
    int s = static_cast<int>(v % static_cast<size_t>(ba.num_states));
    if (!reach[v] || !ba.accepting[static_cast<size_t>(s)]) continue;
    std::vector<char> seen(total, 0);
    std::vector<size_t> st;
    size_t i0 = v / static_cast<size_t>(ba.num_states);
    for (const auto& e : ba.edges[static_cast<size_t>(s)])
      if (ba.edge_enabled(e, vmask[i0])) {
        size_t w = id(next(i0), e.dst);
        if (!seen[w]) {
          seen[w] = 1;
          st.push_back(w);
        }
      }
    bool found = false;
    while (!st.empty() && !found) {
      size_t u = st.back();
      st.pop_back();
      if (u == v) {
        found = true;
        break;
      }
      size_t i = u / static_cast<size_t>(ba.num_states);
      int us = static_cast<int>(u % static_cast<size_t>(ba.num_states));
      for (const auto& e : ba.edges[static_cast<size_t>(us)]) {
        if (!ba.edge_enabled(e, vmask[i])) continue;
        size_t w = id(next(i), e.dst);
        if (!seen[w]) {
          seen[w] = 1;
          st.push_back(w);
        }
      }
    }
    if (found) return true;
  }
  return false;
}

}  // namespace skillmc
