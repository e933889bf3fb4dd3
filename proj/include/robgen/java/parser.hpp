#pragma once

#include <string>
#include <string_view>

#include "robgen/java/syntax.hpp"

namespace robgen::java {

// Parses a compilation unit, a class body fragment or a bare method. Syntax
// errors never throw: they become Error nodes plus ParseError entries and the
// rest of the tree is still built.
SyntaxTree parse_source(std::string source);

// Parses a sequence of block statements (a method body without braces).
SyntaxTree parse_statements(std::string source);

// Parses one expression. Trailing tokens are reported as an error.
SyntaxTree parse_expression(std::string source);

}  // namespace robgen::java
