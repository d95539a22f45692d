#include "skillmc/lexer.hpp"

#include <cctype>
#include <sstream>

namespace skillmc {

bool has_errors(const Diagnostics& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  if (d.pos.line > 0) os << d.pos.line << ':' << d.pos.column << ": ";
  os << (d.severity == Severity::Error ? "error: " : "warning: ");
  os << d.message;
  return os.str();
}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> scan_tokens(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;

  auto peek = [&](size_t k = 0) -> char { return i + k < text.size() ? text[i + k] : '\0'; };
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto emit = [&](Tok kind, size_t len, SourcePos pos) {
    out.push_back({kind, text.substr(i, len), pos});
    advance(len);
  };

  while (i < text.size()) {
    char c = text[i];
    SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (is_ident_start(c)) {
      size_t len = 1;
      while (i + len < text.size() && is_ident_char(text[i + len])) ++len;
      emit(Tok::Ident, len, pos);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t len = 1;
      while (i + len < text.size() && std::isdigit(static_cast<unsigned char>(text[i + len]))) ++len;
      emit(Tok::Int, len, pos);
      continue;
    }
    switch (c) {
      case '{': emit(Tok::LBrace, 1, pos); continue;
      case '}': emit(Tok::RBrace, 1, pos); continue;
      case '(': emit(Tok::LParen, 1, pos); continue;
      case ')': emit(Tok::RParen, 1, pos); continue;
      case '[': emit(Tok::LBracket, 1, pos); continue;
      case ']': emit(Tok::RBracket, 1, pos); continue;
      case ',': emit(Tok::Comma, 1, pos); continue;
      case '@': emit(Tok::At, 1, pos); continue;
      case '+': emit(Tok::Plus, 1, pos); continue;
      case '*': emit(Tok::Star, 1, pos); continue;
      case '-':
        if (peek(1) == '>') emit(Tok::Arrow, 2, pos);
        else emit(Tok::Minus, 1, pos);
        continue;
      case ':':
        if (peek(1) == '=') emit(Tok::Assign, 2, pos);
        else emit(Tok::Colon, 1, pos);
        continue;
      case '=':
        if (peek(1) == '=') emit(Tok::EqEq, 2, pos);
        else emit(Tok::Bad, 1, pos);
        continue;
      case '!':
        if (peek(1) == '=') emit(Tok::NotEq, 2, pos);
        else emit(Tok::Bang, 1, pos);
        continue;
      case '<':
        if (peek(1) == '=') emit(Tok::Le, 2, pos);
        else emit(Tok::Lt, 1, pos);
        continue;
      case '>':
        if (peek(1) == '=') emit(Tok::Ge, 2, pos);
        else emit(Tok::Gt, 1, pos);
        continue;
      case '&':
        if (peek(1) == '&') emit(Tok::AndAnd, 2, pos);
        else emit(Tok::Bad, 1, pos);
        continue;
      case '|':
        if (peek(1) == '|') emit(Tok::OrOr, 2, pos);
        else emit(Tok::Bad, 1, pos);
        continue;
      default: emit(Tok::Bad, 1, pos); continue;
    }
  }
  out.push_back({Tok::End, std::string_view{}, SourcePos{line, col}});
  return out;
}

}  // namespace skillmc
