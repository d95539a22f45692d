#include "skillmc/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace skillmc {

namespace {

LtlPtr mk(Ltl::Kind k, LtlPtr a = nullptr, LtlPtr b = nullptr) {
  auto f = std::make_shared<Ltl>();
  f->kind = k;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}

}  // namespace

LtlPtr Ltl::make_true() { return mk(Kind::True); }
LtlPtr Ltl::make_false() { return mk(Kind::False); }
LtlPtr Ltl::atom(std::string comp, std::string state) {
  auto f = std::make_shared<Ltl>();
  f->kind = Kind::Atom;
  f->comp = std::move(comp);
  f->state = std::move(state);
  return f;
}
LtlPtr Ltl::not_(LtlPtr a) { return mk(Kind::Not, std::move(a)); }
LtlPtr Ltl::and_(LtlPtr a, LtlPtr b) { return mk(Kind::And, std::move(a), std::move(b)); }
LtlPtr Ltl::or_(LtlPtr a, LtlPtr b) { return mk(Kind::Or, std::move(a), std::move(b)); }
LtlPtr Ltl::implies(LtlPtr a, LtlPtr b) { return mk(Kind::Implies, std::move(a), std::move(b)); }
LtlPtr Ltl::next(LtlPtr a) { return mk(Kind::Next, std::move(a)); }
LtlPtr Ltl::until(LtlPtr a, LtlPtr b) { return mk(Kind::Until, std::move(a), std::move(b)); }
LtlPtr Ltl::release(LtlPtr a, LtlPtr b) { return mk(Kind::Release, std::move(a), std::move(b)); }
LtlPtr Ltl::finally_(LtlPtr a) { return mk(Kind::Finally, std::move(a)); }
LtlPtr Ltl::globally(LtlPtr a) { return mk(Kind::Globally, std::move(a)); }

bool ltl_equal(const LtlPtr& a, const LtlPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == Ltl::Kind::Atom) return a->comp == b->comp && a->state == b->state;
  if (a->lhs || b->lhs)
    if (!ltl_equal(a->lhs, b->lhs)) return false;
  if (a->rhs || b->rhs)
    if (!ltl_equal(a->rhs, b->rhs)) return false;
  return true;
}

namespace {

// Precedence levels: higher binds tighter.
int prec(Ltl::Kind k) {
  switch (k) {
    case Ltl::Kind::Implies: return 1;
    case Ltl::Kind::Or: return 2;
    case Ltl::Kind::And: return 3;
    case Ltl::Kind::Until:
    case Ltl::Kind::Release: return 4;
    default: return 5;  // unary and leaves
  }
}

void print(const LtlPtr& f, int parent_prec, std::string& out) {
  int p = prec(f->kind);
  bool parens = p < parent_prec;
  if (parens) out += "(";
  switch (f->kind) {
    case Ltl::Kind::True: out += "true"; break;
    case Ltl::Kind::False: out += "false"; break;
    case Ltl::Kind::Atom:
      out += f->comp;
      out += " @ ";
      out += f->state;
      break;
    case Ltl::Kind::Not:
      out += "!";
      print(f->lhs, 5, out);
      break;
    case Ltl::Kind::Next:
      out += "X ";
      print(f->lhs, 5, out);
      break;
    case Ltl::Kind::Finally:
      out += "F ";
      print(f->lhs, 5, out);
      break;
    case Ltl::Kind::Globally:
      out += "G ";
      print(f->lhs, 5, out);
      break;
    case Ltl::Kind::And:
      print(f->lhs, 3, out);
      out += " && ";
      print(f->rhs, 4, out);
      break;
    case Ltl::Kind::Or:
      print(f->lhs, 2, out);
      out += " || ";
      print(f->rhs, 3, out);
      break;
    case Ltl::Kind::Implies:
      print(f->lhs, 2, out);
      out += " -> ";
      print(f->rhs, 1, out);
      break;
    case Ltl::Kind::Until:
      print(f->lhs, 5, out);
      out += " U ";
      print(f->rhs, 4, out);
      break;
    case Ltl::Kind::Release:
      print(f->lhs, 5, out);
      out += " R ";
      print(f->rhs, 4, out);
      break;
  }
  if (parens) out += ")";
}

}  // namespace

std::string to_string(const LtlPtr& f) {
  std::string out;
  print(f, 0, out);
  return out;
}

namespace {

struct LtlToken {
  enum Kind { Word, State, LParen, RParen, Bang, AndAnd, OrOr, Arrow, At, End, Bad } kind;
  std::string text;
  SourcePos pos;
};

/// Hand lexer: a token following `@` may be a state name with a parenthesized
/// valuation suffix, which the generic scanner would split apart.
std::vector<LtlToken> lex_ltl(std::string_view s) {
  std::vector<LtlToken> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto bump = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (i + k < s.size() && s[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  bool after_at = false;
  while (i < s.size()) {
    char c = s[i];
    SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump(1);
      continue;
    }
    // State names are opaque tokens, so right after `@` they may start with
    // a digit even though ordinary words may not.
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
        (after_at && std::isdigit(static_cast<unsigned char>(c)))) {
      size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      if (after_at && j < s.size() && s[j] == '(') {
        size_t k = j + 1;
        int depth = 1;
        while (k < s.size() && depth > 0) {
          if (s[k] == '(') ++depth;
          if (s[k] == ')') --depth;
          ++k;
        }
        out.push_back({LtlToken::State, std::string(s.substr(i, k - i)), pos});
        bump(k - i);
      } else {
        out.push_back({after_at ? LtlToken::State : LtlToken::Word,
                       std::string(s.substr(i, j - i)), pos});
        bump(j - i);
      }
      after_at = false;
      continue;
    }
    after_at = false;
    if (c == '(') {
      out.push_back({LtlToken::LParen, "(", pos});
      bump(1);
    } else if (c == ')') {
      out.push_back({LtlToken::RParen, ")", pos});
      bump(1);
    } else if (c == '!') {
      out.push_back({LtlToken::Bang, "!", pos});
      bump(1);
    } else if (c == '@') {
      out.push_back({LtlToken::At, "@", pos});
      after_at = true;
      bump(1);
    } else if (s.compare(i, 2, "&&") == 0) {
      out.push_back({LtlToken::AndAnd, "&&", pos});
      bump(2);
    } else if (s.compare(i, 2, "||") == 0) {
      out.push_back({LtlToken::OrOr, "||", pos});
      bump(2);
    } else if (s.compare(i, 2, "->") == 0) {
      out.push_back({LtlToken::Arrow, "->", pos});
      bump(2);
    } else {
      out.push_back({LtlToken::Bad, std::string(1, c), pos});
      bump(1);
    }
  }
  out.push_back({LtlToken::End, "", {line, col}});
  return out;
}

class LtlParser {
 public:
  explicit LtlParser(std::string_view text) : toks_(lex_ltl(text)) {}

  LtlParseResult run() {
    LtlParseResult res;
    LtlPtr f = parse_implies();
    if (cur().kind != LtlToken::End && diags_.empty())
      diags_.push_back(Diagnostic::error("unexpected input after formula", cur().pos));
    res.diagnostics = std::move(diags_);
    if (!has_errors(res.diagnostics) && f) res.formula = std::move(f);
    return res;
  }

 private:
  std::vector<LtlToken> toks_;
  size_t at_ = 0;
  Diagnostics diags_;

  const LtlToken& cur() const { return toks_[at_]; }
  void advance() {
    if (cur().kind != LtlToken::End) ++at_;
  }
  bool accept(LtlToken::Kind k) {
    if (cur().kind != k) return false;
    advance();
    return true;
  }
  bool word_is(std::string_view w) const {
    return cur().kind == LtlToken::Word && cur().text == w;
  }
  void error_here(std::string msg) {
    diags_.push_back(Diagnostic::error(std::move(msg), cur().pos));
  }

  LtlPtr parse_implies() {
    LtlPtr l = parse_or();
    if (!l) return nullptr;
    if (accept(LtlToken::Arrow)) {
      LtlPtr r = parse_implies();  // right-associative
      if (!r) return nullptr;
      return Ltl::implies(std::move(l), std::move(r));
    }
    return l;
  }

  LtlPtr parse_or() {
    LtlPtr l = parse_and();
    if (!l) return nullptr;
    while (accept(LtlToken::OrOr)) {
      LtlPtr r = parse_and();
      if (!r) return nullptr;
      l = Ltl::or_(std::move(l), std::move(r));
    }
    return l;
  }

  LtlPtr parse_and() {
    LtlPtr l = parse_until();
    if (!l) return nullptr;
    while (accept(LtlToken::AndAnd)) {
      LtlPtr r = parse_until();
      if (!r) return nullptr;
      l = Ltl::and_(std::move(l), std::move(r));
    }
    return l;
  }

  LtlPtr parse_until() {
    LtlPtr l = parse_unary();
    if (!l) return nullptr;
    if (word_is("U")) {
      advance();
      LtlPtr r = parse_until();  // right-associative
      if (!r) return nullptr;
      return Ltl::until(std::move(l), std::move(r));
    }
    if (word_is("R")) {
      advance();
      LtlPtr r = parse_until();
      if (!r) return nullptr;
      return Ltl::release(std::move(l), std::move(r));
    }
    return l;
  }

  LtlPtr parse_unary() {
    if (accept(LtlToken::Bang)) {
      LtlPtr a = parse_unary();
      return a ? Ltl::not_(std::move(a)) : nullptr;
    }
    if (word_is("F")) {
      advance();
      LtlPtr a = parse_unary();
      return a ? Ltl::finally_(std::move(a)) : nullptr;
    }
    if (word_is("G")) {
      advance();
      LtlPtr a = parse_unary();
      return a ? Ltl::globally(std::move(a)) : nullptr;
    }
    if (word_is("X")) {
      advance();
      LtlPtr a = parse_unary();
      return a ? Ltl::next(std::move(a)) : nullptr;
    }
    if (accept(LtlToken::LParen)) {
      LtlPtr f = parse_implies();
      if (!f) return nullptr;
      if (!accept(LtlToken::RParen)) {
        error_here("expected )");
        return nullptr;
      }
      return f;
    }
    if (word_is("true")) {
      advance();
      return Ltl::make_true();
    }
    if (word_is("false")) {
      advance();
      return Ltl::make_false();
    }
    if (cur().kind == LtlToken::Word) {
      if (cur().text == "U" || cur().text == "R") {
        error_here("expected a formula, found operator " + cur().text);
        return nullptr;
      }
      std::string comp = cur().text;
      advance();
      if (!accept(LtlToken::At)) {
        error_here("expected @ after component name " + comp);
        return nullptr;
      }
      if (cur().kind != LtlToken::State && cur().kind != LtlToken::Word) {
        error_here("expected state name after @");
        return nullptr;
      }
      std::string state = cur().text;
      advance();
      return Ltl::atom(std::move(comp), std::move(state));
    }
    error_here("expected a formula");
    return nullptr;
  }
};

}  // namespace

LtlParseResult parse_ltl(std::string_view text) { return LtlParser(text).run(); }

namespace {

LtlPtr nnf(const LtlPtr& f, bool neg) {
  switch (f->kind) {
    case Ltl::Kind::True: return neg ? Ltl::make_false() : Ltl::make_true();
    case Ltl::Kind::False: return neg ? Ltl::make_true() : Ltl::make_false();
    case Ltl::Kind::Atom: {
      LtlPtr a = Ltl::atom(f->comp, f->state);
      return neg ? Ltl::not_(std::move(a)) : a;
    }
    case Ltl::Kind::Not: return nnf(f->lhs, !neg);
    case Ltl::Kind::And: {
      LtlPtr l = nnf(f->lhs, neg), r = nnf(f->rhs, neg);
      return neg ? Ltl::or_(std::move(l), std::move(r)) : Ltl::and_(std::move(l), std::move(r));
    }
    case Ltl::Kind::Or: {
      LtlPtr l = nnf(f->lhs, neg), r = nnf(f->rhs, neg);
      return neg ? Ltl::and_(std::move(l), std::move(r)) : Ltl::or_(std::move(l), std::move(r));
    }
    case Ltl::Kind::Implies: {
      // a -> b == !a || b
      LtlPtr l = nnf(f->lhs, !neg), r = nnf(f->rhs, neg);
      return neg ? Ltl::and_(std::move(l), std::move(r)) : Ltl::or_(std::move(l), std::move(r));
    }
    case Ltl::Kind::Next: return Ltl::next(nnf(f->lhs, neg));
    case Ltl::Kind::Until: {
      LtlPtr l = nnf(f->lhs, neg), r = nnf(f->rhs, neg);
      return neg ? Ltl::release(std::move(l), std::move(r))
                 : Ltl::until(std::move(l), std::move(r));
    }
    case Ltl::Kind::Release: {
      LtlPtr l = nnf(f->lhs, neg), r = nnf(f->rhs, neg);
      return neg ? Ltl::until(std::move(l), std::move(r))
                 : Ltl::release(std::move(l), std::move(r));
    }
    case Ltl::Kind::Finally:  // F a == true U a;  !F a == G !a == false R !a
      return neg ? Ltl::release(Ltl::make_false(), nnf(f->lhs, true))
                 : Ltl::until(Ltl::make_true(), nnf(f->lhs, false));
    case Ltl::Kind::Globally:  // G a == false R a;  !G a == F !a == true U !a
      return neg ? Ltl::until(Ltl::make_true(), nnf(f->lhs, true))
                 : Ltl::release(Ltl::make_false(), nnf(f->lhs, false));
  }
  return Ltl::make_true();
}

}  // namespace

LtlPtr to_nnf(const LtlPtr& f) { return nnf(f, false); }

LtlPtr negate(const LtlPtr& f) { return nnf(f, true); }

namespace {

/// Positions are 0..n-1; position n-1 wraps to `loop`.
size_t next_pos(size_t i, const LassoWord& w) { return i + 1 < w.vals.size() ? i + 1 : w.loop; }

std::vector<char> eval_positions(const LtlPtr& f, const LassoWord& w) {
  const size_t n = w.vals.size();
  std::vector<char> out(n, 0);
  switch (f->kind) {
    case Ltl::Kind::True: std::fill(out.begin(), out.end(), 1); break;
    case Ltl::Kind::False: break;
    case Ltl::Kind::Atom: {
      std::string key = atom_key(f->comp, f->state);
      for (size_t i = 0; i < n; ++i) out[i] = w.vals[i].count(key) ? 1 : 0;
      break;
    }
    case Ltl::Kind::Not: {
      auto a = eval_positions(f->lhs, w);
      for (size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    }
    case Ltl::Kind::And: {
      auto a = eval_positions(f->lhs, w), b = eval_positions(f->rhs, w);
      for (size_t i = 0; i < n; ++i) out[i] = a[i] && b[i];
      break;
    }
    case Ltl::Kind::Or: {
      auto a = eval_positions(f->lhs, w), b = eval_positions(f->rhs, w);
      for (size_t i = 0; i < n; ++i) out[i] = a[i] || b[i];
      break;
    }
    case Ltl::Kind::Implies: {
      auto a = eval_positions(f->lhs, w), b = eval_positions(f->rhs, w);
      for (size_t i = 0; i < n; ++i) out[i] = !a[i] || b[i];
      break;
    }
    case Ltl::Kind::Next: {
      auto a = eval_positions(f->lhs, w);
      for (size_t i = 0; i < n; ++i) out[i] = a[next_pos(i, w)];
      break;
    }
    case Ltl::Kind::Until: {
      auto a = eval_positions(f->lhs, w), b = eval_positions(f->rhs, w);
      // Least fixpoint of out[i] = b[i] || (a[i] && out[next(i)]).
      for (size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (size_t ii = n; ii > 0; --ii) {
          size_t i = ii - 1;
          char v = b[i] || (a[i] && out[next_pos(i, w)]);
          if (v != out[i]) {
            out[i] = v;
            changed = true;
          }
        }
        if (!changed) break;
      }
      break;
    }
    case Ltl::Kind::Release: {
      auto a = eval_positions(f->lhs, w), b = eval_positions(f->rhs, w);
      // Greatest fixpoint of out[i] = b[i] && (a[i] || out[next(i)]).
      std::fill(out.begin(), out.end(), 1);
      for (size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (size_t ii = n; ii > 0; --ii) {
          size_t i = ii - 1;
          char v = b[i] && (a[i] || out[next_pos(i, w)]);
          if (v != out[i]) {
            out[i] = v;
            changed = true;
          }
        }
        if (!changed) break;
      }
      break;
    }
    case Ltl::Kind::Finally: {
      auto a = eval_positions(f->lhs, w);
      for (size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (size_t ii = n; ii > 0; --ii) {
          size_t i = ii - 1;
          char v = a[i] || out[next_pos(i, w)];
          if (v != out[i]) {
            out[i] = v;
            changed = true;
          }
        }
        if (!changed) break;
      }
      break;
    }
    case Ltl::Kind::Globally: {
      auto a = eval_positions(f->lhs, w);
      std::fill(out.begin(), out.end(), 1);
      for (size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (size_t ii = n; ii > 0; --ii) {
          size_t i = ii - 1;
          char v = a[i] && out[next_pos(i, w)];
          if (v != out[i]) {
            out[i] = v;
            changed = true;
          }
        }
        if (!changed) break;
      }
      break;
    }
  }
  return out;
}

}  // namespace

bool eval_word(const LtlPtr& f, const LassoWord& word) {
  if (word.vals.empty() || word.loop >= word.vals.size())
    throw std::invalid_argument("eval_word: malformed lasso word");
  return eval_positions(f, word)[0] != 0;
}

}  // namespace skillmc
