#include <algorithm>
#include <cstdlib>
#include <set>

#include "skillmc/layer.hpp"
#include "skillmc/lexer.hpp"

namespace skillmc {

namespace {

const std::set<std::string_view> kLayerKeywords = {
    "model", "for",      "functional", "decision", "var", "in",   "init", "any",
    "loc",   "initial",  "edge",       "on",       "internal",    "when", "do"};

class LayerParser {
 public:
  explicit LayerParser(std::string_view text) : toks_(scan_tokens(text)) {}

  LayerParseResult run() {
    LayerParseResult res;
    GuardedTs m = parse_model();
    res.diagnostics = std::move(diags_);
    if (cur().kind != Tok::End && !has_errors(res.diagnostics))
      res.diagnostics.push_back(
          Diagnostic::error("unexpected input after model declaration", cur().pos));
    if (!has_errors(res.diagnostics)) {
      Diagnostics extra = validate_layer_model(m);
      res.diagnostics.insert(res.diagnostics.end(), extra.begin(), extra.end());
    }
    if (!has_errors(res.diagnostics)) res.model = std::move(m);
    return res;
  }

 private:
  std::vector<Token> toks_;
  size_t at_ = 0;
  Diagnostics diags_;

  const Token& cur() const { return toks_[at_]; }
  const Token& peek(size_t n = 1) const {
    return toks_[std::min(at_ + n, toks_.size() - 1)];
  }
  void advance() {
    if (cur().kind != Tok::End) ++at_;
  }
  bool accept(Tok k) {
    if (cur().kind != k) return false;
    advance();
    return true;
  }
  bool is_word(std::string_view w) const {
    return cur().kind == Tok::Ident && cur().text == w;
  }
  bool accept_word(std::string_view w) {
    if (!is_word(w)) return false;
    advance();
    return true;
  }
  void error_here(std::string msg) { diags_.push_back(Diagnostic::error(std::move(msg), cur().pos)); }
  bool expect(Tok k, const char* what) {
    if (accept(k)) return true;
    error_here(std::string("expected ") + what);
    return false;
  }
  bool expect_word(std::string_view w) {
    if (accept_word(w)) return true;
    error_here("expected '" + std::string(w) + "'");
    return false;
  }

  /// A user-chosen identifier: not a keyword, not reserved (__ prefix).
  std::string expect_name(const char* what) {
    if (cur().kind != Tok::Ident) {
      error_here(std::string("expected ") + what);
      return {};
    }
    std::string name(cur().text);
    if (kLayerKeywords.count(cur().text)) {
      error_here("keyword " + name + " cannot be used as " + what);
    } else if (name.rfind("__", 0) == 0) {
      error_here("names starting with __ are reserved");
    }
    advance();
    return name;
  }

  std::optional<int> expect_int() {
    bool neg = accept(Tok::Minus);
    if (cur().kind != Tok::Int) {
      error_here("expected integer");
      return std::nullopt;
    }
    long v = std::strtol(std::string(cur().text).c_str(), nullptr, 10);
    advance();
    return static_cast<int>(neg ? -v : v);
  }

  GuardedTs parse_model() {
    GuardedTs m;
    m.pos = cur().pos;
    expect_word("model");
    m.name = expect_name("model name");
    if (accept_word("for")) {
      if (accept_word("functional")) {
        m.bind = BindKind::Functional;
      } else if (accept_word("decision")) {
        m.bind = BindKind::Decision;
      } else {
        error_here("expected 'functional' or 'decision'");
      }
      m.bind_skill = expect_name("skill name");
    }
    expect(Tok::LBrace, "{");
    while (is_word("var")) m.variables.push_back(parse_var());
    while (is_word("loc")) m.locations.push_back(parse_loc());
    while (is_word("edge")) m.edges.push_back(parse_edge());
    if (cur().kind != Tok::RBrace) {
      error_here("expected 'var', 'loc', 'edge', or }");
      // Skip to the closing brace so later diagnostics stay sensible.
      while (cur().kind != Tok::RBrace && cur().kind != Tok::End) advance();
    }
    expect(Tok::RBrace, "}");
    return m;
  }

  LayerVar parse_var() {
    LayerVar v;
    v.pos = cur().pos;
    expect_word("var");
    v.name = expect_name("variable name");
    expect_word("in");
    expect(Tok::LBracket, "[");
    if (auto lo = expect_int()) v.lo = *lo;
    expect(Tok::Comma, ",");
    if (auto hi = expect_int()) v.hi = *hi;
    expect(Tok::RBracket, "]");
    expect_word("init");
    if (accept_word("any")) {
      v.init_any = true;
    } else if (auto i = expect_int()) {
      v.init = *i;
    }
    return v;
  }

  LayerLoc parse_loc() {
    LayerLoc l;
    l.pos = cur().pos;
    expect_word("loc");
    l.name = expect_name("location name");
    l.initial = accept_word("initial");
    return l;
  }

  LayerEdge parse_edge() {
    LayerEdge e;
    e.pos = cur().pos;
    expect_word("edge");
    e.src = expect_name("source location");
    expect(Tok::Arrow, "->");
    e.dst = expect_name("target location");
    expect_word("on");
    e.event = expect_name("event name");
    e.internal = accept_word("internal");
    e.guard = VarGuard::make_true();
    if (accept_word("when")) e.guard = parse_guard();
    if (accept_word("do")) {
      while (cur().kind == Tok::Ident && !kLayerKeywords.count(cur().text) &&
             peek().kind == Tok::Assign) {
        UpdateStmt u;
        u.pos = cur().pos;
        u.var = expect_name("variable name");
        expect(Tok::Assign, ":=");
        u.expr = parse_affine();
        e.updates.push_back(std::move(u));
      }
      if (e.updates.empty()) error_here("expected at least one assignment after 'do'");
    }
    return e;
  }

  VarGuard parse_guard() {
    VarGuard g = parse_and();
    while (accept(Tok::OrOr)) g = VarGuard::make_or(std::move(g), parse_and());
    return g;
  }

  VarGuard parse_and() {
    VarGuard g = parse_unary();
    while (accept(Tok::AndAnd)) g = VarGuard::make_and(std::move(g), parse_unary());
    return g;
  }

  VarGuard parse_unary() {
    if (accept(Tok::Bang)) return VarGuard::make_not(parse_unary());
    if (accept(Tok::LParen)) {
      VarGuard g = parse_guard();
      expect(Tok::RParen, ")");
      return g;
    }
    return parse_cmp();
  }

  VarGuard parse_cmp() {
    std::string lhs = expect_name("variable name");
    VarGuard::Op op;
    switch (cur().kind) {
      case Tok::EqEq: op = VarGuard::Op::Eq; break;
      case Tok::NotEq: op = VarGuard::Op::Ne; break;
      case Tok::Lt: op = VarGuard::Op::Lt; break;
      case Tok::Le: op = VarGuard::Op::Le; break;
      case Tok::Gt: op = VarGuard::Op::Gt; break;
      case Tok::Ge: op = VarGuard::Op::Ge; break;
      default:
        error_here("expected comparison operator");
        return VarGuard::make_true();
    }
    advance();
    if (cur().kind == Tok::Ident) {
      std::string rhs = expect_name("variable name");
      return VarGuard::make_cmp_var(std::move(lhs), op, std::move(rhs));
    }
    auto v = expect_int();
    return VarGuard::make_cmp_const(std::move(lhs), op, v.value_or(0));
  }

  /// term := [-] (INT ["*" IDENT] | IDENT ["*" INT])
  void parse_term(AffineExpr& e, bool negate) {
    int sign = negate ? -1 : 1;
    if (accept(Tok::Minus)) sign = -sign;
    if (cur().kind == Tok::Int) {
      int c = sign * static_cast<int>(std::strtol(std::string(cur().text).c_str(), nullptr, 10));
      advance();
      if (accept(Tok::Star)) {
        std::string v = expect_name("variable name");
        e.terms.emplace_back(c, std::move(v));
      } else {
        e.constant += c;
      }
      return;
    }
    std::string v = expect_name("variable name");
    int c = sign;
    if (accept(Tok::Star)) {
      if (auto k = expect_int()) c = sign * *k;
    }
    e.terms.emplace_back(c, std::move(v));
  }

  AffineExpr parse_affine() {
    AffineExpr e;
    parse_term(e, false);
    while (true) {
      if (accept(Tok::Plus)) {
        parse_term(e, false);
      } else if (accept(Tok::Minus)) {
        parse_term(e, true);
      } else {
        break;
      }
    }
    return e;
  }
};

void check_guard_vars(const GuardedTs& g, const VarGuard& vg, SourcePos pos, Diagnostics& out) {
  switch (vg.kind) {
    case VarGuard::Kind::True: return;
    case VarGuard::Kind::Cmp:
      if (!g.find_var(vg.lhs))
        out.push_back(Diagnostic::error("unknown variable " + vg.lhs, pos));
      if (vg.rhs_is_var && !g.find_var(vg.rhs_var))
        out.push_back(Diagnostic::error("unknown variable " + vg.rhs_var, pos));
      return;
    default:
      for (const auto& k : vg.kids) check_guard_vars(g, k, pos, out);
  }
}

}  // namespace

VarGuard VarGuard::make_true() { return VarGuard{}; }

VarGuard VarGuard::make_cmp_const(std::string lhs, Op op, int rhs) {
  VarGuard g;
  g.kind = Kind::Cmp;
  g.lhs = std::move(lhs);
  g.op = op;
  g.rhs_is_var = false;
  g.rhs_const = rhs;
  return g;
}

VarGuard VarGuard::make_cmp_var(std::string lhs, Op op, std::string rhs) {
  VarGuard g;
  g.kind = Kind::Cmp;
  g.lhs = std::move(lhs);
  g.op = op;
  g.rhs_is_var = true;
  g.rhs_var = std::move(rhs);
  return g;
}

VarGuard VarGuard::make_not(VarGuard x) {
  VarGuard g;
  g.kind = Kind::Not;
  g.kids.push_back(std::move(x));
  return g;
}

VarGuard VarGuard::make_and(VarGuard a, VarGuard b) {
  VarGuard g;
  g.kind = Kind::And;
  g.kids.push_back(std::move(a));
  g.kids.push_back(std::move(b));
  return g;
}

VarGuard VarGuard::make_or(VarGuard a, VarGuard b) {
  VarGuard g;
  g.kind = Kind::Or;
  g.kids.push_back(std::move(a));
  g.kids.push_back(std::move(b));
  return g;
}

const LayerVar* GuardedTs::find_var(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

const LayerLoc* GuardedTs::find_loc(std::string_view name) const {
  for (const auto& l : locations)
    if (l.name == name) return &l;
  return nullptr;
}

const std::string* GuardedTs::initial_loc() const {
  for (const auto& l : locations)
    if (l.initial) return &l.name;
  return nullptr;
}

LayerParseResult parse_layer_model(std::string_view text) {
  return LayerParser(text).run();
}

Diagnostics validate_layer_model(const GuardedTs& g) {
  Diagnostics out;
  std::set<std::string> seen;
  for (const auto& v : g.variables) {
    if (!seen.insert(v.name).second)
      out.push_back(Diagnostic::error("duplicate variable name " + v.name, v.pos));
    if (v.lo > v.hi)
      out.push_back(Diagnostic::error("empty domain for variable " + v.name, v.pos));
    if (!v.init_any && (v.init < v.lo || v.init > v.hi))
      out.push_back(Diagnostic::error(
          "initial value of variable " + v.name + " is outside its domain", v.pos));
  }
  std::set<std::string> locs;
  int initials = 0;
  for (const auto& l : g.locations) {
    if (!locs.insert(l.name).second)
      out.push_back(Diagnostic::error("duplicate location name " + l.name, l.pos));
    if (seen.count(l.name))
      out.push_back(Diagnostic::error(
          "location " + l.name + " collides with a variable name", l.pos));
    if (l.initial) ++initials;
  }
  if (g.locations.empty()) {
    out.push_back(Diagnostic::error("model " + g.name + " declares no locations", g.pos));
  } else if (initials == 0) {
    out.push_back(Diagnostic::error("model " + g.name + " has no initial location", g.pos));
  } else if (initials > 1) {
    out.push_back(
        Diagnostic::error("model " + g.name + " has more than one initial location", g.pos));
  }
  std::map<std::string, bool> event_internal;
  for (const auto& e : g.edges) {
    if (!locs.count(e.src))
      out.push_back(Diagnostic::error("unknown location " + e.src, e.pos));
    if (!locs.count(e.dst))
      out.push_back(Diagnostic::error("unknown location " + e.dst, e.pos));
    auto [it, inserted] = event_internal.emplace(e.event, e.internal);
    if (!inserted && it->second != e.internal)
      out.push_back(Diagnostic::error(
          "event " + e.event + " is declared both internal and non-internal", e.pos));
    check_guard_vars(g, e.guard, e.pos, out);
    std::set<std::string> updated;
    for (const auto& u : e.updates) {
      if (!g.find_var(u.var))
        out.push_back(Diagnostic::error("unknown variable " + u.var, u.pos));
      if (!updated.insert(u.var).second)
        out.push_back(Diagnostic::error(
            "variable " + u.var + " is assigned twice on one edge", u.pos));
      for (const auto& [c, v] : u.expr.terms)
        if (!g.find_var(v))
          out.push_back(Diagnostic::error("unknown variable " + v, u.pos));
    }
  }
  return out;
}

}  // namespace skillmc
