#include "dtnlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace dtnlab {

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprParseError(msg, static_cast<int>(pos_) + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  static NodePtr make(Expr::Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip();
      if (pos_ >= s_.size()) return lhs;
      const char c = s_[pos_];
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      lhs = make(c == '+' ? Expr::Kind::Add : Expr::Kind::Sub, lhs, term());
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      skip();
      if (pos_ >= s_.size()) return lhs;
      const char c = s_[pos_];
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      lhs = make(c == '*' ? Expr::Kind::Mul : Expr::Kind::Div, lhs, factor());
    }
  }

  NodePtr factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      return make(Expr::Kind::Neg, factor());
    }
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::Number;
    n->value = v;
    return n;
  }

  NodePtr word() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string w = s_.substr(start, pos_ - start);
    if (w == "x") return make(Expr::Kind::X);
    if (w == "y") return make(Expr::Kind::Y);
    if (w == "pi") return make(Expr::Kind::Pi);
    Expr::Func f;
    if (w == "sin") f = Expr::Func::Sin;
    else if (w == "cos") f = Expr::Func::Cos;
    else if (w == "exp") f = Expr::Func::Exp;
    else if (w == "abs") f = Expr::Func::Abs;
    else {
      pos_ = start;
      fail("unknown identifier '" + w + "'");
    }
    expect('(');
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::Func;
    n->func = f;
    n->lhs = expr();
    expect(')');
    return n;
  }
};

double eval_node(const Expr::Node& n, double x, double y) {
  switch (n.kind) {
    case Expr::Kind::Number: return n.value;
    case Expr::Kind::X: return x;
    case Expr::Kind::Y: return y;
    case Expr::Kind::Pi: return kPi;
    case Expr::Kind::Neg: return -eval_node(*n.lhs, x, y);
    case Expr::Kind::Add: return eval_node(*n.lhs, x, y) + eval_node(*n.rhs, x, y);
    case Expr::Kind::Sub: return eval_node(*n.lhs, x, y) - eval_node(*n.rhs, x, y);
    case Expr::Kind::Mul: return eval_node(*n.lhs, x, y) * eval_node(*n.rhs, x, y);
    case Expr::Kind::Div: return eval_node(*n.lhs, x, y) / eval_node(*n.rhs, x, y);
    case Expr::Kind::Func: {
      const double v = eval_node(*n.lhs, x, y);
      switch (n.func) {
        case Expr::Func::Sin: return std::sin(v);
        case Expr::Func::Cos: return std::cos(v);
        case Expr::Func::Exp: return std::exp(v);
        case Expr::Func::Abs: return std::abs(v);
      }
    }
  }
  return 0.0;
}

int count_node(const Expr::Node& n, Expr::Kind k) {
  int c = n.kind == k ? 1 : 0;
  if (n.lhs) c += count_node(*n.lhs, k);
  if (n.rhs) c += count_node(*n.rhs, k);
  return c;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  Parser p(text);
  Expr e;
  e.text_ = text;
  e.root_ = p.parse_all();
  return e;
}

double Expr::eval(double x, double y) const { return eval_node(*root_, x, y); }

int Expr::count(Kind kind) const { return count_node(*root_, kind); }

bool Expr::uses_y() const { return count(Kind::Y) > 0; }

}  // namespace dtnlab
