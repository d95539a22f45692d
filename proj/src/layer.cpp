#include <algorithm>
#include <set>

#include "skillmc/layer.hpp"

namespace skillmc {

namespace {

bool cmp_holds(VarGuard::Op op, int a, int b) {
  switch (op) {
    case VarGuard::Op::Eq: return a == b;
    case VarGuard::Op::Ne: return a != b;
    case VarGuard::Op::Lt: return a < b;
    case VarGuard::Op::Le: return a <= b;
    case VarGuard::Op::Gt: return a > b;
    case VarGuard::Op::Ge: return a >= b;
  }
  return false;
}

std::string state_name(const GuardedTs& g, const std::string& loc, const std::vector<int>& vals) {
  if (g.variables.empty()) return loc;
  std::string s = loc + "(";
  for (size_t i = 0; i < g.variables.size(); ++i) {
    if (i) s += ",";
    s += g.variables[i].name + "=" + std::to_string(vals[i]);
  }
  s += ")";
  return s;
}

std::map<std::string, int> to_map(const GuardedTs& g, const std::vector<int>& vals) {
  std::map<std::string, int> m;
  for (size_t i = 0; i < g.variables.size(); ++i) m.emplace(g.variables[i].name, vals[i]);
  return m;
}

/// Enumerates the full valuation grid in odometer order (last variable
/// fastest). Calls fn(vals) for each.
template <typename F>
void for_each_valuation(const GuardedTs& g, F&& fn) {
  std::vector<int> vals;
  for (const auto& v : g.variables) vals.push_back(v.lo);
  while (true) {
    fn(vals);
    size_t i = g.variables.size();
    bool done = true;
    while (i > 0) {
      --i;
      if (++vals[i] <= g.variables[i].hi) {
        done = false;
        break;
      }
      vals[i] = g.variables[i].lo;
    }
    if (done || g.variables.empty()) break;
  }
}

Lts rename_events(const Lts& in, const std::map<std::string, std::string>& final_name) {
  Lts out(in.name());
  for (const auto& s : in.states()) out.add_state(s);
  if (in.initial() >= 0) out.set_initial(in.state_name(in.initial()));
  for (const auto& ev : in.alphabet()) {
    auto it = final_name.find(ev);
    out.ensure_event(it == final_name.end() ? ev : it->second);
  }
  for (const auto& t : in.transitions()) {
    const std::string& ev = in.alphabet()[static_cast<size_t>(t.event)];
    auto it = final_name.find(ev);
    out.add_transition(in.state_name(t.src), it == final_name.end() ? ev : it->second,
                       in.state_name(t.dst));
  }
  return out;
}

}  // namespace

bool eval_var_guard(const VarGuard& g, const std::map<std::string, int>& vals) {
  switch (g.kind) {
    case VarGuard::Kind::True: return true;
    case VarGuard::Kind::Cmp: {
      auto it = vals.find(g.lhs);
      if (it == vals.end()) throw std::invalid_argument("no value for variable " + g.lhs);
      int rhs = g.rhs_const;
      if (g.rhs_is_var) {
        auto r = vals.find(g.rhs_var);
        if (r == vals.end()) throw std::invalid_argument("no value for variable " + g.rhs_var);
        rhs = r->second;
      }
      return cmp_holds(g.op, it->second, rhs);
    }
    case VarGuard::Kind::Not: return !eval_var_guard(g.kids[0], vals);
    case VarGuard::Kind::And:
      return eval_var_guard(g.kids[0], vals) && eval_var_guard(g.kids[1], vals);
    case VarGuard::Kind::Or:
      return eval_var_guard(g.kids[0], vals) || eval_var_guard(g.kids[1], vals);
  }
  return true;
}

int eval_affine(const AffineExpr& e, const std::map<std::string, int>& vals) {
  long long acc = e.constant;
  for (const auto& [c, v] : e.terms) {
    auto it = vals.find(v);
    if (it == vals.end()) throw std::invalid_argument("no value for variable " + v);
    acc += static_cast<long long>(c) * it->second;
  }
  return static_cast<int>(acc);
}

Lts expand(const GuardedTs& g, uint64_t max_states) {
  Diagnostics diags = validate_layer_model(g);
  if (has_errors(diags))
    throw std::invalid_argument("invalid layer model " + g.name + ": " + to_string(diags[0]));

  uint64_t grid = 1;
  for (const auto& v : g.variables) {
    grid *= static_cast<uint64_t>(v.hi - v.lo + 1);
    if (grid > max_states) throw BoundExceeded("expansion of model " + g.name + " exceeds bound");
  }
  bool any_init = std::any_of(g.variables.begin(), g.variables.end(),
                              [](const LayerVar& v) { return v.init_any; });
  uint64_t total = grid * g.locations.size() + (any_init ? 1 : 0);
  if (total > max_states || grid * g.locations.size() / std::max<uint64_t>(grid, 1) !=
                                g.locations.size())
    throw BoundExceeded("expansion of model " + g.name + " exceeds bound");

  Lts lts(g.name);
  if (any_init) lts.add_state("__init");
  for (const auto& l : g.locations)
    for_each_valuation(g, [&](const std::vector<int>& vals) {
      lts.add_state(state_name(g, l.name, vals));
    });

  const std::string& init_loc = *g.initial_loc();
  if (any_init) {
    lts.set_initial("__init");
    const std::string ev = "auto_init_" + g.name;
    for_each_valuation(g, [&](const std::vector<int>& vals) {
      for (size_t i = 0; i < g.variables.size(); ++i)
        if (!g.variables[i].init_any && vals[i] != g.variables[i].init) return;
      lts.add_transition("__init", ev, state_name(g, init_loc, vals));
    });
  } else {
    std::vector<int> vals;
    for (const auto& v : g.variables) vals.push_back(v.init);
    lts.set_initial(state_name(g, init_loc, vals));
  }

  for (const auto& e : g.edges) {
    // Declared events always enter the alphabet: an edge whose guard never
    // fires still means the model participates in (and thus blocks) the
    // event, rather than letting it fire freely without the model.
    lts.ensure_event(e.event);
    for_each_valuation(g, [&](const std::vector<int>& vals) {
      auto m = to_map(g, vals);
      if (!eval_var_guard(e.guard, m)) return;
      std::vector<int> next = vals;
      for (const auto& u : e.updates) {
        int nv = eval_affine(u.expr, m);  // simultaneous: reads pre-state values
        const LayerVar* var = g.find_var(u.var);
        if (nv < var->lo || nv > var->hi) return;  // out of domain: drop instance
        next[static_cast<size_t>(var - g.variables.data())] = nv;
      }
      lts.add_transition(state_name(g, e.src, vals), e.event, state_name(g, e.dst, next));
    });
  }
  return lts;
}

Lts builtin_abstract_functional(const SkillEvents& skill) {
  Lts lts("F_" + skill.skill);
  lts.add_state("any");
  lts.set_initial("any");
  for (const auto& e : skill.functional_interface()) lts.add_transition("any", e, "any");
  return lts;
}

Lts builtin_abstract_decision(const std::vector<SkillEvents>& skills) {
  Lts lts("D");
  lts.add_state("any");
  lts.set_initial("any");
  for (const auto& s : skills)
    for (const auto& e : s.decision_interface()) lts.add_transition("any", e, "any");
  return lts;
}

GuardedTs builtin_refined_goto(int bmax, int dmax, const std::string& skill,
                               const std::string& battery_resource,
                               const std::string& normal_state,
                               const std::string& critical_state) {
  if (bmax < 2) throw std::invalid_argument("refined-goto requires Bmax >= 2");
  if (dmax < 1) throw std::invalid_argument("refined-goto requires Dmax >= 1");
  GuardedTs g;
  g.name = "refined_" + skill;
  g.bind = BindKind::Functional;
  g.bind_skill = skill;
  g.variables.push_back({"blevel", 0, bmax, true, 0, {}});
  g.variables.push_back({"d", 0, dmax, false, 0, {}});  // strides still to make
  g.locations.push_back({"idle", true, {}});
  g.locations.push_back({"validated", false, {}});
  g.locations.push_back({"moving", false, {}});

  auto ge2 = [] { return VarGuard::make_cmp_const("blevel", VarGuard::Op::Ge, 2); };
  auto lt2 = [] { return VarGuard::make_cmp_const("blevel", VarGuard::Op::Lt, 2); };
  auto set_d = [](int k) {
    AffineExpr e;
    e.constant = k;
    return e;
  };
  // The request distance is re-chosen at each validation: one edge per value.
  for (int k = 1; k <= dmax; ++k)
    g.edges.push_back({"idle", "validated", "validate_success", false, ge2(),
                       {{"d", set_d(k), {}}}, {}});
  g.edges.push_back({"idle", "idle", "validate_failure", false, lt2(), {}, {}});
  g.edges.push_back({"validated", "moving", "start_hook", false, VarGuard::make_true(), {}, {}});
  {
    AffineExpr dm1;  // d - 1
    dm1.constant = -1;
    dm1.terms.emplace_back(1, "d");
    AffineExpr bm2;  // blevel - 2
    bm2.constant = -2;
    bm2.terms.emplace_back(1, "blevel");
    VarGuard can_move = VarGuard::make_and(VarGuard::make_cmp_const("d", VarGuard::Op::Ge, 1), ge2());
    g.edges.push_back({"moving", "moving", "move", true, std::move(can_move),
                       {{"d", dm1, {}}, {"blevel", bm2, {}}}, {}});
    g.edges.push_back({"moving", "idle", "success", false,
                       VarGuard::make_cmp_const("d", VarGuard::Op::Eq, 0), {}, {}});
    g.edges.push_back({"moving", "idle", "failure", false,
                       VarGuard::make_and(VarGuard::make_cmp_const("d", VarGuard::Op::Ge, 1), lt2()),
                       {}, {}});
    // An interrupt lands mid-stride: the step in progress still consumes its
    // two battery units when they are available.
    g.edges.push_back({"moving", "idle", "interrupted", false, ge2(), {{"blevel", bm2, {}}}, {}});
    g.edges.push_back({"moving", "idle", "interrupted", false, lt2(), {}, {}});
  }
  for (const char* loc : {"idle", "validated", "moving"})
    g.edges.push_back({loc, loc, "battery_critical_sync", false, lt2(), {}, {}});

  g.event_map.emplace("battery_critical_sync",
                      "auto_" + battery_resource + "_" + normal_state + "_" + critical_state);
  g.removed_events.push_back("auto_" + battery_resource + "_" + critical_state + "_" +
                             normal_state);
  return g;
}

CloseResult close_network(const CompiledSkillset& cs, const std::vector<GuardedTs>& models,
                          const AttachOptions& opts) {
  CloseResult res;
  Diagnostics& diags = res.diagnostics;

  for (const auto& m : models) {
    Diagnostics d = validate_layer_model(m);
    diags.insert(diags.end(), d.begin(), d.end());
  }
  if (has_errors(diags)) return res;

  std::set<std::string> compiled_events(cs.network.events().begin(), cs.network.events().end());
  std::set<std::string> autos;
  for (const auto& r : cs.resources)
    autos.insert(r.autonomous_events.begin(), r.autonomous_events.end());

  // Component-name uniqueness across lifecycles, resources, and models.
  std::set<std::string> comp_names;
  for (const auto& c : cs.network.components()) comp_names.insert(c.name());
  for (const auto& m : models) {
    if (!comp_names.insert(m.name).second)
      diags.push_back(Diagnostic::error(
          "model name " + m.name + " collides with another component", m.pos));
  }

  // Interface coverage: at most one model per (skill, layer).
  std::map<std::string, const GuardedTs*> func_cover, dec_cover;
  for (const auto& m : models) {
    if (m.bind == BindKind::None) continue;
    const SkillEvents* sk = cs.find_skill(m.bind_skill);
    if (!sk) {
      diags.push_back(Diagnostic::error(
          "model " + m.name + " is bound to unknown skill " + m.bind_skill, m.pos));
      continue;
    }
    auto& cover = m.bind == BindKind::Functional ? func_cover : dec_cover;
    auto [it, inserted] = cover.emplace(m.bind_skill, &m);
    if (!inserted)
      diags.push_back(Diagnostic::error(
          (m.bind == BindKind::Functional ? std::string("functional") : std::string("decision")) +
              " interface of skill " + m.bind_skill + " is covered by both " +
              it->second->name + " and " + m.name,
          m.pos));
  }
  if (has_errors(diags)) return res;

  // Resolve event names, check conformance, and collect internal events.
  std::map<std::string, std::string> internal_owner;  // internal event -> model
  struct Prepared {
    const GuardedTs* model;
    std::map<std::string, std::string> final_name;
  };
  std::vector<Prepared> prepared;
  for (const auto& m : models) {
    const SkillEvents* sk = m.bind == BindKind::None ? nullptr : cs.find_skill(m.bind_skill);
    std::set<std::string> allowed(autos);
    if (sk) {
      auto iface = m.bind == BindKind::Functional ? sk->functional_interface()
                                                  : sk->decision_interface();
      allowed.insert(iface.begin(), iface.end());
    }
    std::map<std::string, std::string> shorts;
    if (sk) shorts = sk->short_names();

    Prepared p{&m, {}};
    for (const auto& e : m.edges) {
      if (e.internal) {
        if (compiled_events.count(e.event)) {
          diags.push_back(Diagnostic::error("internal event " + e.event + " of model " + m.name +
                                                " collides with a network event",
                                            e.pos));
          continue;
        }
        auto [it, inserted] = internal_owner.emplace(e.event, m.name);
        if (!inserted && it->second != m.name)
          diags.push_back(Diagnostic::error("internal event " + e.event +
                                                " is declared by both " + it->second + " and " +
                                                m.name,
                                            e.pos));
        continue;
      }
      if (p.final_name.count(e.event)) continue;
      std::string resolved;
      if (allowed.count(e.event)) {
        resolved = e.event;
      } else if (auto s = shorts.find(e.event); s != shorts.end() && allowed.count(s->second)) {
        resolved = s->second;
      } else if (auto em = m.event_map.find(e.event);
                 em != m.event_map.end() && allowed.count(em->second)) {
        resolved = em->second;
      } else {
        std::string where = sk ? "the synchronization interface of skill " + m.bind_skill +
                                     " or an autonomous resource event"
                               : "an autonomous resource event";
        diags.push_back(Diagnostic::error(
            "event " + e.event + " of model " + m.name + " is not " + where, e.pos));
        continue;
      }
      p.final_name.emplace(e.event, std::move(resolved));
    }
    // A bound model that ignores part of its interface leaves those events
    // unconstrained; worth flagging, not fatal.
    if (sk) {
      std::set<std::string> used;
      for (const auto& [local, fin] : p.final_name) used.insert(fin);
      auto iface = m.bind == BindKind::Functional ? sk->functional_interface()
                                                  : sk->decision_interface();
      for (const auto& e : iface)
        if (!used.count(e))
          diags.push_back(Diagnostic::warning(
              "model " + m.name + " does not synchronize on interface event " + e, m.pos));
    }
    prepared.push_back(std::move(p));
  }
  // auto_init events are model-private.
  for (const auto& m : models) {
    bool any_init = std::any_of(m.variables.begin(), m.variables.end(),
                                [](const LayerVar& v) { return v.init_any; });
    if (!any_init) continue;
    std::string ev = "auto_init_" + m.name;
    if (compiled_events.count(ev))
      diags.push_back(Diagnostic::error(
          "initialization event " + ev + " collides with a network event", m.pos));
    else
      internal_owner.emplace(ev, m.name);
  }
  if (has_errors(diags)) return res;

  ClosedNetwork closed;
  std::vector<Lts> comps(cs.network.components());
  for (const auto& p : prepared) {
    Lts expanded;
    try {
      expanded = expand(*p.model, opts.expand_bound);
    } catch (const BoundExceeded& e) {
      diags.push_back(Diagnostic::error(e.what(), p.model->pos));
      continue;
    }
    comps.push_back(rename_events(expanded, p.final_name));
    closed.model_components.push_back(p.model->name);
  }
  if (has_errors(diags)) return res;

  // Fill uncovered interfaces with the most abstract models.
  std::vector<SkillEvents> uncovered_decision;
  for (const auto& s : cs.skills) {
    if (!func_cover.count(s.skill)) {
      if (!opts.auto_abstract) {
        diags.push_back(Diagnostic::error(
            "functional interface of skill " + s.skill + " is not covered by any model"));
      } else {
        Lts f = builtin_abstract_functional(s);
        if (!comp_names.insert(f.name()).second) {
          diags.push_back(Diagnostic::error("synthesized component name " + f.name() +
                                            " collides with another component"));
        } else {
          closed.model_components.push_back(f.name());
          comps.push_back(std::move(f));
        }
      }
    }
    if (!dec_cover.count(s.skill)) {
      if (!opts.auto_abstract)
        diags.push_back(Diagnostic::error(
            "decision interface of skill " + s.skill + " is not covered by any model"));
      else
        uncovered_decision.push_back(s);
    }
  }
  if (!uncovered_decision.empty()) {
    Lts d = builtin_abstract_decision(uncovered_decision);
    if (!comp_names.insert(d.name()).second)
      diags.push_back(Diagnostic::error("synthesized component name " + d.name() +
                                        " collides with another component"));
    else {
      closed.model_components.push_back(d.name());
      comps.push_back(std::move(d));
    }
  }
  if (has_errors(diags)) return res;

  Network net(std::move(comps));
  for (const auto& m : models) {
    for (const auto& ev : m.removed_events) {
      if (net.event_index(ev) < 0) {
        diags.push_back(Diagnostic::warning("model " + m.name + " removes event " + ev +
                                            ", which is not in the network"));
        continue;
      }
      net = net.without_event(ev);
    }
  }
  closed.network = std::move(net);
  for (const auto& kv : internal_owner) closed.internal_events.push_back(kv.first);
  res.closed = std::move(closed);
  return res;
}

}  // namespace skillmc
