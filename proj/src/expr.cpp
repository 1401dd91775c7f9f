#include "specflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <set>

#include "specflow/errors.hpp"

namespace specflow {

struct Expr::Node {
  enum Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  double value = 0;
  std::string name;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodeP = std::shared_ptr<const Expr::Node>;

NodeP make(Expr::Node::Kind k, NodeP a = nullptr, NodeP b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodeP parse() {
    NodeP n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) {
    throw ValidationError("expression '" + s_ + "': " + msg + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodeP sum() {
    NodeP n = product();
    for (;;) {
      if (eat('+')) n = make(Expr::Node::Add, n, product());
      else if (eat('-')) n = make(Expr::Node::Sub, n, product());
      else return n;
    }
  }
  NodeP product() {
    NodeP n = unary();
    for (;;) {
      if (eat('*')) n = make(Expr::Node::Mul, n, unary());
      else if (eat('/')) n = make(Expr::Node::Div, n, unary());
      else return n;
    }
  }
  NodeP unary() {
    if (eat('-')) return make(Expr::Node::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodeP power() {
    NodeP base = atom();
    if (eat('^')) return make(Expr::Node::Pow, base, unary());
    return base;
  }
  NodeP atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodeP n = sum();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Num;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      if (eat('(')) {
        NodeP arg = sum();
        if (!eat(')')) fail("missing ')' after argument of " + name);
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Call;
        n->name = name;
        n->a = arg;
        static const std::set<std::string> known = {"sin", "cos", "tan", "exp", "log", "sqrt",
                                                    "abs", "tanh", "sinh", "cosh", "sech"};
        if (!known.count(name)) fail("unknown function " + name);
        return n;
      }
      auto n = std::make_shared<Expr::Node>();
      if (name == "pi") {
        n->kind = Expr::Node::Num;
        n->value = 3.14159265358979323846;
      } else {
        n->kind = Expr::Node::Var;
        n->name = name;
      }
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

double eval_node(const Expr::Node& n, const std::map<std::string, double>& vars) {
  switch (n.kind) {
    case Expr::Node::Num: return n.value;
    case Expr::Node::Var: {
      auto it = vars.find(n.name);
      if (it == vars.end()) throw ValidationError("unbound variable '" + n.name + "' in expression");
      return it->second;
    }
    case Expr::Node::Neg: return -eval_node(*n.a, vars);
    case Expr::Node::Add: return eval_node(*n.a, vars) + eval_node(*n.b, vars);
    case Expr::Node::Sub: return eval_node(*n.a, vars) - eval_node(*n.b, vars);
    case Expr::Node::Mul: return eval_node(*n.a, vars) * eval_node(*n.b, vars);
    case Expr::Node::Div: return eval_node(*n.a, vars) / eval_node(*n.b, vars);
    case Expr::Node::Pow: return std::pow(eval_node(*n.a, vars), eval_node(*n.b, vars));
    case Expr::Node::Call: {
      double x = eval_node(*n.a, vars);
      const std::string& f = n.name;
      if (f == "sin") return std::sin(x);
      if (f == "cos") return std::cos(x);
      if (f == "tan") return std::tan(x);
      if (f == "exp") return std::exp(x);
      if (f == "log") return std::log(x);
      if (f == "sqrt") return std::sqrt(x);
      if (f == "abs") return std::abs(x);
      if (f == "tanh") return std::tanh(x);
      if (f == "sinh") return std::sinh(x);
      if (f == "cosh") return std::cosh(x);
      return 1.0 / std::cosh(x);
    }
  }
  return 0;
}

void collect(const Expr::Node& n, std::set<std::string>& out) {
  if (n.kind == Expr::Node::Var) out.insert(n.name);
  if (n.a) collect(*n.a, out);
  if (n.b) collect(*n.b, out);
}

}  // namespace

Expr::Expr(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expr::eval(const std::map<std::string, double>& vars) const {
  if (!root_) throw ValidationError("empty expression");
  return eval_node(*root_, vars);
}

std::vector<std::string> Expr::variables() const {
  std::set<std::string> s;
  if (root_) collect(*root_, s);
  return {s.begin(), s.end()};
}

}  // namespace specflow
