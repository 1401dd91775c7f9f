#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace specflow {

// Small arithmetic expression language for closed-form rules in configs:
// + - * / ^, unary minus, parentheses, numbers, named variables, pi, and the
// functions sin cos tan exp log sqrt abs tanh sinh cosh sech.
class Expr {
 public:
  Expr() = default;
  explicit Expr(const std::string& text);

  double eval(const std::map<std::string, double>& vars) const;
  const std::string& text() const { return text_; }
  // Variable names referenced by the expression.
  std::vector<std::string> variables() const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace specflow
