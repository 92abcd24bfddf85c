#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "stlcbf/stl/ast.hpp"

namespace stlcbf::stl {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_);
};

// Surface syntax for the supported fragment:
//
//   spec   := clause ("and" clause)*
//   clause := ("G" | "F") "[" num "," num "]" "(" bool ")"
//   bool   := conj ("or" conj)*            -- "and" binds tighter than "or"
//   conj   := term ("and" term)*
//   term   := "not" term | "(" bool ")" | "true" | atom
//   atom   := ("norm1"|"norm2"|"norminf") "(x, [" num,... "])"
//                 ["scale" "[" num,... "]"] cmp num
//           | "x"K cmp num
//           | "|" "x"K [("+"|"-") num] "|" "<=" num
//   cmp    := "<=" | "<" | ">=" | ">"
//   num    := constant expression over literals and "pi" with + - * / ( )
//
// Strict comparisons are treated as non-strict. Nested temporal operators
// and Until are rejected. Horizon defaults to the largest block end.
Specification parse_spec(const std::string& text, int state_dim,
                         std::optional<double> horizon = std::nullopt);

}  // namespace stlcbf::stl
