#include <array>
#include <algorithm>

#include "skillmc/lexer.hpp"
#include "skillmc/skillset.hpp"

namespace skillmc {

namespace {

constexpr std::array<std::string_view, 16> kKeywords = {
    "skillset", "resource", "skill",     "state",   "initial",      "transition",
    "all",      "input",    "output",    "precondition", "start",   "invariant",
    "guard",    "interrupt", "effect",   "success",
};
// "failure" is also reserved; kept separate only to keep the array literal tidy.
constexpr std::string_view kFailureKw = "failure";

bool is_keyword(std::string_view s) {
  return s == kFailureKw || std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

struct Parser {
  std::vector<Token> toks;
  size_t at = 0;
  Diagnostics diags;

  explicit Parser(std::string_view text) : toks(scan_tokens(text)) {}

  const Token& cur() const { return toks[at]; }
  const Token& next() const { return toks[std::min(at + 1, toks.size() - 1)]; }
  void bump() {
    if (cur().kind != Tok::End) ++at;
  }

  bool at_ident(std::string_view kw) const { return cur().kind == Tok::Ident && cur().text == kw; }

  [[nodiscard]] bool fail(std::string msg, SourcePos pos) {
    diags.push_back(Diagnostic::error(std::move(msg), pos));
    return false;
  }
  [[nodiscard]] bool fail_here(std::string msg) { return fail(std::move(msg), cur().pos); }

  std::string describe(const Token& t) const {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::Ident: return "'" + std::string(t.text) + "'";
      default: return t.text.empty() ? "token" : "'" + std::string(t.text) + "'";
    }
  }

  bool expect(Tok kind, std::string_view what) {
    if (cur().kind == kind) {
      bump();
      return true;
    }
    return fail_here("expected " + std::string(what) + ", found " + describe(cur()));
  }

  bool expect_kw(std::string_view kw) {
    if (at_ident(kw)) {
      bump();
      return true;
    }
    return fail_here("expected '" + std::string(kw) + "', found " + describe(cur()));
  }

  /// A user-written name: an identifier that is not a keyword and does not use
  /// the reserved `__` prefix.
  bool expect_name(std::string& out, SourcePos& pos, std::string_view what) {
    if (cur().kind != Tok::Ident)
      return fail_here("expected " + std::string(what) + ", found " + describe(cur()));
    if (is_keyword(cur().text))
      return fail_here("reserved word '" + std::string(cur().text) + "' cannot be used as " +
                       std::string(what));
    if (cur().text.size() >= 2 && cur().text[0] == '_' && cur().text[1] == '_')
      return fail_here("names starting with '__' are reserved: '" + std::string(cur().text) + "'");
    out = std::string(cur().text);
    pos = cur().pos;
    bump();
    return true;
  }

  // guard := conj { "||" conj } ; conj := unary { "&&" unary }
  // unary := "!" unary | "(" guard ")" | IDENT ("=="|"!=") IDENT
  bool parse_guard(GuardExpr& out) {
    GuardExpr lhs;
    if (!parse_guard_conj(lhs)) return false;
    while (cur().kind == Tok::OrOr) {
      bump();
      GuardExpr rhs;
      if (!parse_guard_conj(rhs)) return false;
      lhs = GuardExpr::make_or(std::move(lhs), std::move(rhs));
    }
    out = std::move(lhs);
    return true;
  }

  bool parse_guard_conj(GuardExpr& out) {
    GuardExpr lhs;
    if (!parse_guard_unary(lhs)) return false;
    while (cur().kind == Tok::AndAnd) {
      bump();
      GuardExpr rhs;
      if (!parse_guard_unary(rhs)) return false;
      lhs = GuardExpr::make_and(std::move(lhs), std::move(rhs));
    }
    out = std::move(lhs);
    return true;
  }

  bool parse_guard_unary(GuardExpr& out) {
    if (cur().kind == Tok::Bang) {
      bump();
      GuardExpr inner;
      if (!parse_guard_unary(inner)) return false;
      out = GuardExpr::make_not(std::move(inner));
      return true;
    }
    if (cur().kind == Tok::LParen) {
      bump();
      if (!parse_guard(out)) return false;
      return expect(Tok::RParen, "')'");
    }
    GuardAtom atom;
    if (!expect_name(atom.resource, atom.pos, "a resource name")) return false;
    if (cur().kind == Tok::EqEq) {
      atom.equal = true;
    } else if (cur().kind == Tok::NotEq) {
      atom.equal = false;
    } else {
      return fail_here("expected '==' or '!=' in guard atom, found " + describe(cur()));
    }
    bump();
    if (!expect_name(atom.state, atom.state_pos, "a state name")) return false;
    out = GuardExpr::make_atom(std::move(atom));
    return true;
  }

  bool parse_effect(EffectStmt& out) {
    if (!expect_name(out.resource, out.pos, "a resource name")) return false;
    if (!expect(Tok::Arrow, "'->'")) return false;
    return expect_name(out.state, out.state_pos, "a state name");
  }

  // effects inside an `effect { ... }` block, one or more
  bool parse_effect_block(std::vector<EffectStmt>& out) {
    if (!expect_kw("effect")) return false;
    if (!expect(Tok::LBrace, "'{'")) return false;
    do {
      EffectStmt e;
      if (!parse_effect(e)) return false;
      out.push_back(std::move(e));
    } while (cur().kind == Tok::Ident && !is_keyword(cur().text));
    return expect(Tok::RBrace, "'}'");
  }

  bool parse_resource_decl(ResourceDecl& r) {
    if (!expect_name(r.name, r.pos, "a resource name")) return false;
    if (!expect(Tok::LBrace, "'{'")) return false;
    if (!expect_kw("state")) return false;
    if (!expect(Tok::LBrace, "'{'")) return false;
    while (cur().kind != Tok::RBrace) {
      std::string s;
      SourcePos p;
      if (!expect_name(s, p, "a state name")) return false;
      r.states.push_back(std::move(s));
      r.state_pos.push_back(p);
    }
    bump();  // }
    if (r.states.empty()) return fail("resource '" + r.name + "' declares no states", r.pos);
    if (!expect_kw("initial")) return false;
    if (!expect_name(r.initial, r.initial_pos, "a state name")) return false;
    if (!expect_kw("transition")) return false;
    if (at_ident("all")) {
      bump();
      r.transitions.all = true;
    } else if (cur().kind == Tok::LBrace) {
      bump();
      while (cur().kind != Tok::RBrace) {
        std::string from, to;
        SourcePos p, q;
        if (!expect_name(from, p, "a state name")) return false;
        if (!expect(Tok::Arrow, "'->'")) return false;
        if (!expect_name(to, q, "a state name")) return false;
        r.transitions.pairs.emplace_back(std::move(from), std::move(to));
        r.transitions.pair_pos.push_back(p);
      }
      bump();  // }
    } else {
      return fail_here("expected 'all' or '{' after 'transition', found " + describe(cur()));
    }
    return expect(Tok::RBrace, "'}'");
  }

  bool parse_case(std::vector<CaseDecl>& out) {
    if (!expect(Tok::LBrace, "'{'")) return false;
    CaseDecl c;
    if (!expect_name(c.name, c.pos, "a case name")) return false;
    if (!expect(Tok::LBrace, "'{'")) return false;
    if (at_ident("effect")) {  // a case may change no resource at all
      if (!parse_effect_block(c.effects)) return false;
    }
    if (!expect(Tok::RBrace, "'}'")) return false;
    if (!expect(Tok::RBrace, "'}'")) return false;
    out.push_back(std::move(c));
    return true;
  }

  bool parse_skill_decl(SkillDecl& s) {
    if (!expect_name(s.name, s.pos, "a skill name")) return false;
    if (!expect(Tok::LBrace, "'{'")) return false;
    if (at_ident("input")) {
      bump();
      if (!expect(Tok::LBrace, "'{'")) return false;
      while (cur().kind != Tok::RBrace) {
        IoDecl io;
        if (!expect_name(io.name, io.pos, "an input name")) return false;
        if (!expect(Tok::Colon, "':'")) return false;
        SourcePos tp;
        if (!expect_name(io.type, tp, "a type name")) return false;
        s.inputs.push_back(std::move(io));
      }
      bump();  // }
    }
    while (at_ident("output")) {
      bump();
      IoDecl io;
      if (!expect_name(io.name, io.pos, "an output name")) return false;
      if (!expect(Tok::Colon, "':'")) return false;
      SourcePos tp;
      if (!expect_name(io.type, tp, "a type name")) return false;
      s.outputs.push_back(std::move(io));
    }
    if (at_ident("precondition")) {
      bump();
      if (!expect(Tok::LBrace, "'{'")) return false;
      if (!parse_guard(s.precondition)) return false;
      if (!expect(Tok::RBrace, "'}'")) return false;
    }
    while (at_ident("start")) {
      bump();
      EffectStmt e;
      if (!parse_effect(e)) return false;
      s.start_effects.push_back(std::move(e));
    }
    if (at_ident("invariant")) {
      bump();
      if (!expect(Tok::LBrace, "'{'")) return false;
      while (cur().kind != Tok::RBrace) {
        InvariantDecl inv;
        if (!expect_name(inv.name, inv.pos, "an invariant name")) return false;
        if (!expect(Tok::LBrace, "'{'")) return false;
        if (!expect_kw("guard")) return false;
        if (!parse_guard(inv.guard)) return false;
        if (!expect(Tok::RBrace, "'}'")) return false;
        s.invariants.push_back(std::move(inv));
      }
      bump();  // }
    }
    if (at_ident("interrupt")) {
      bump();
      if (!expect(Tok::LBrace, "'{'")) return false;
      if (at_ident("effect")) {  // an interrupt may change no resource
        if (!parse_effect_block(s.interrupt_effects)) return false;
      }
      if (!expect(Tok::RBrace, "'}'")) return false;
    }
    while (at_ident("success")) {
      bump();
      if (!parse_case(s.success_cases)) return false;
    }
    while (at_ident(kFailureKw)) {
      bump();
      if (!parse_case(s.failure_cases)) return false;
    }
    return expect(Tok::RBrace, "'}'");
  }

  bool parse_file(SkillsetAst& ast) {
    if (!expect_kw("skillset")) return false;
    SourcePos np;
    if (!expect_name(ast.name, np, "a skillset name")) return false;
    if (!expect(Tok::LBrace, "'{'")) return false;
    while (cur().kind != Tok::RBrace) {
      if (at_ident("resource")) {
        bump();
        if (!expect(Tok::LBrace, "'{'")) return false;
        while (cur().kind != Tok::RBrace) {
          ResourceDecl r;
          if (!parse_resource_decl(r)) return false;
          ast.resources.push_back(std::move(r));
        }
        bump();  // }
      } else if (at_ident("skill")) {
        bump();
        SkillDecl s;
        if (!parse_skill_decl(s)) return false;
        ast.skills.push_back(std::move(s));
      } else {
        return fail_here("expected 'resource', 'skill' or '}', found " + describe(cur()));
      }
    }
    bump();  // }
    if (cur().kind != Tok::End)
      return fail_here("unexpected trailing input: " + describe(cur()));
    return true;
  }
};

}  // namespace

const ResourceDecl* SkillsetAst::find_resource(std::string_view n) const {
  for (const auto& r : resources)
    if (r.name == n) return &r;
  return nullptr;
}

const SkillDecl* SkillsetAst::find_skill(std::string_view n) const {
  for (const auto& s : skills)
    if (s.name == n) return &s;
  return nullptr;
}

ParseResult parse_skillset(std::string_view text) {
  Parser p(text);
  ParseResult res;
  SkillsetAst ast;
  if (!p.parse_file(ast)) {
    res.diagnostics = std::move(p.diags);
    if (res.diagnostics.empty())  // defensive; parse_file always reports
      res.diagnostics.push_back(Diagnostic::error("syntax error"));
    return res;
  }
  res.diagnostics = validate_skillset(ast);
  if (!has_errors(res.diagnostics)) res.ast = std::move(ast);
  return res;
}

}  // namespace skillmc
