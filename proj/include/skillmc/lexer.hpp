#pragma once

#include <string_view>
#include <vector>

#include "skillmc/diag.hpp"

namespace skillmc {

enum class Tok {
  Ident,
  Int,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Arrow,    // ->
  Colon,    // :
  Assign,   // :=
  Comma,
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
  AndAnd,
  OrOr,
  Bang,
  At,
  Plus,
  Minus,
  Star,
  End,
  Bad,
};

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  SourcePos pos;
};

/// Tokenizes the whole input. Never fails: unrecognized bytes become Bad
/// tokens, and the final token is always End. `//` starts a line comment.
std::vector<Token> scan_tokens(std::string_view text);

}  // namespace skillmc
