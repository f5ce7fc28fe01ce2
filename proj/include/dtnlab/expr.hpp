#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dtnlab/types.hpp"

namespace dtnlab {

/// Syntax error in a coefficient expression. column is 1-based within the
/// expression text.
class ExprParseError : public ConfigError {
 public:
  ExprParseError(const std::string& message, int column)
      : ConfigError(message + " at column " + std::to_string(column)), column_(column) {}
  int column() const noexcept { return column_; }

 private:
  int column_;
};

/// Real-valued expression in x and y:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := number | x | y | pi | func '(' expr ')' | '(' expr ')' | '-' factor
///   func   := sin | cos | exp | abs
class Expr {
 public:
  enum class Kind { Number, X, Y, Pi, Func, Add, Sub, Mul, Div, Neg };
  enum class Func { Sin, Cos, Exp, Abs };

  struct Node {
    Kind kind;
    double value = 0.0;
    Func func = Func::Sin;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  static Expr parse(const std::string& text);

  double eval(double x, double y = 0.0) const;
  const std::string& text() const noexcept { return text_; }
  const Node& root() const noexcept { return *root_; }
  int count(Kind kind) const;
  bool uses_y() const;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace dtnlab
