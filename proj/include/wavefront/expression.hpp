#pragma once

#include <string>

#include "wavefront/coeffs.hpp"

namespace wavefront::coeffs {

/**
 * Compile a coefficient expression into a holomorphic evaluator.
 *
 * Grammar (whitespace ignored):
 *   expr   := term { ('+' | '-') term }
 *   term   := unary { ('*' | '/') unary }
 *   unary  := ('+' | '-') unary | power
 *   power  := atom [ '^' integer ]
 *   atom   := number | variable | 'exp' '(' expr ')' | '(' expr ')'
 *   variable := 'x' (n = 1 only) | 'x1' ... 'xn' | 'r2'   (r2 = sum x_j^2)
 *
 * Rational functions and Gaussian factors cover every builtin; anything
 * else is a parse error reported with the offending column.
 */
Evaluator parse_expression(const std::string& text, int n);

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wavefront::coeffs
