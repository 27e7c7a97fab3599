#pragma once

#include <stdexcept>
#include <string>

#include "stlswarm/stl/formula.hpp"

namespace stlswarm::stl {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

// Grammar:
//   formula := implication
//   implication := disjunction ('->' implication)?
//   disjunction := conjunction ('|' conjunction)*
//   conjunction := term ('&' term)*
//   term := '!'? atom
//   atom := primary ('U' '[' INT ',' INT ']' primary)*
//   primary := IDENT | '(' formula ')'
//            | ('F' | 'G') '[' INT ',' INT ']' '(' formula ')'
// Identifiers resolve against `regions`. Whitespace is insignificant.
FormulaPtr parse_spec(const std::string& text, const RegionTable& regions);

}  // namespace stlswarm::stl
