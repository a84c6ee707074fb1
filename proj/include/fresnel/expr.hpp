#pragma once

// Small arithmetic expression language used by scenario documents for
// coefficient functions a(t), symbols a(t, xi) and synthetic phases.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := primary ('^' unary)?
//   primary:= number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos exp log sqrt abs pow norm. Constants: e, pi.
// Expressions evaluate over double or Jet, so every derivative is exact.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fresnel/jet.hpp"

namespace fresnel {

class Expr {
public:
    struct Node;

    Expr() = default;
    /// Parses `source`; identifiers must be constants, functions or one of `variables`.
    static Expr parse(const std::string& source, std::vector<std::string> variables);

    const std::string& source() const { return source_; }
    const std::vector<std::string>& variables() const { return variables_; }
    bool valid() const { return root_ != nullptr; }
    /// True when the expression does not reference the named variable.
    bool independent_of(const std::string& variable) const;

    double operator()(std::span<const double> vars) const;
    Jet operator()(std::span<const Jet> vars) const;

private:
    std::string source_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

}  // namespace fresnel
