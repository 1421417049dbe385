#include "homoglab/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "homoglab/error.hpp"

namespace homoglab {

struct Expression::Node {
  enum class Op { constant, var_y1, var_y2, neg, add, sub, mul, div, pow, sin, cos, exp };
  Op op = Op::constant;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double y1, double y2) const {
    switch (op) {
      case Op::constant: return value;
      case Op::var_y1: return y1;
      case Op::var_y2: return y2;
      case Op::neg: return -lhs->eval(y1, y2);
      case Op::add: return lhs->eval(y1, y2) + rhs->eval(y1, y2);
      case Op::sub: return lhs->eval(y1, y2) - rhs->eval(y1, y2);
      case Op::mul: return lhs->eval(y1, y2) * rhs->eval(y1, y2);
      case Op::div: return lhs->eval(y1, y2) / rhs->eval(y1, y2);
      case Op::pow: return std::pow(lhs->eval(y1, y2), rhs->eval(y1, y2));
      case Op::sin: return std::sin(lhs->eval(y1, y2));
      case Op::cos: return std::cos(lhs->eval(y1, y2));
      case Op::exp: return std::exp(lhs->eval(y1, y2));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->value = value;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("expression '" + std::string(text_) + "': " + what + " at offset " +
                          std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::add, lhs, term());
      else if (accept('-')) lhs = make(Op::sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // right-associative; binds tighter than unary minus on the left: -y1^2 = -(y1^2)
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "y1") return make(Op::var_y1);
      if (name == "y2") return make(Op::var_y2);
      if (name == "pi") return make(Op::constant, nullptr, nullptr, std::numbers::pi);
      Op fn;
      if (name == "sin") fn = Op::sin;
      else if (name == "cos") fn = Op::cos;
      else if (name == "exp") fn = Op::exp;
      else fail("unknown identifier '" + std::string(name) + "'");
      if (!accept('(')) fail("expected '(' after function name");
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(fn, arg);
    }
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::string tail(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - tail.c_str());
    return make(Op::constant, nullptr, nullptr, v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  return Expression(Parser(text).parse(), std::string(text));
}

double Expression::operator()(double y1, double y2) const { return root_->eval(y1, y2); }

}  // namespace homoglab
