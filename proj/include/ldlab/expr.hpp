#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldlab/vec.hpp"

namespace ldlab {

/// Error in parsing or evaluating a rate expression; carries the source
/// position for parse errors (0-based offset into the text, -1 otherwise).
struct ExprError : std::runtime_error {
  ExprError(const std::string& what, long pos = -1)
      : std::runtime_error(what), position(pos) {}
  long position;
};

/// Arithmetic expression over state variables x1..xd and named parameters.
/// Grammar: + - * / ^ (right assoc), unary -, min(a,b), max(a,b), log, exp,
/// sin, cos, numeric literals. Evaluation reports domain errors (log of a
/// non-positive number, division by zero) instead of returning NaN.
class Expr {
 public:
  struct Node;  // definition in the implementation file

  Expr() = default;

  static Expr parse(const std::string& text);

  /// evaluate with state vector x (x1 = x[0], ...) and parameter map
  double eval(const Vec& x, const std::map<std::string, double>& params) const;

  /// canonical fully-parenthesized form; parse(print()) == print()
  std::string print() const;

  bool empty() const { return !root_; }

  /// identifiers that are not state variables (callers bind them to params)
  std::vector<std::string> parameter_names() const;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace ldlab
