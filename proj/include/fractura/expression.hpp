#pragma once

// Small closed-form expression evaluator for scalar fields of (x, y).
// Grammar: sum -> product (('+'|'-') product)*, product -> unary (('*'|'/') unary)*,
// unary -> ('-'|'+') unary | power, power -> primary ('^' unary)?,
// primary -> number | name | name '(' sum (',' sum)? ')' | '(' sum ')'.

#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "fractura/errors.hpp"

namespace fractura {

class Expression {
  struct Node {
    enum class Op {
      constant, var_x, var_y,
      add, sub, mul, div, pow, neg,
      sin, cos, tan, sinh, cosh, tanh, exp, log, sqrt, abs, atan,
      atan2, min, max
    };
    Op op = Op::constant;
    double value = 0.0;
    std::unique_ptr<Node> lhs, rhs;
  };

 public:
  Expression() { root_ = std::make_shared<Node>(); }  // constant 0

  static Expression parse(const std::string& text) {
    Parser parser{text, 0};
    Expression e;
    e.text_ = text;
    e.root_ = std::shared_ptr<Node>(parser.parse_sum().release());
    parser.skip_ws();
    if (parser.pos != text.size())
      throw ValidationError("expression parse error at position " + std::to_string(parser.pos) +
                            " in \"" + text + "\"");
    return e;
  }

  double operator()(double x, double y) const { return eval(*root_, x, y); }
  const std::string& text() const { return text_; }

 private:
  struct Parser {
    const std::string& s;
    std::size_t pos;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    [[noreturn]] void fail(const std::string& what) {
      throw ValidationError("expression parse error: " + what + " at position " +
                            std::to_string(pos) + " in \"" + s + "\"");
    }

    std::unique_ptr<Node> parse_sum() {
      auto node = parse_product();
      for (;;) {
        if (eat('+')) node = binary(Node::Op::add, std::move(node), parse_product());
        else if (eat('-')) node = binary(Node::Op::sub, std::move(node), parse_product());
        else return node;
      }
    }

    std::unique_ptr<Node> parse_product() {
      auto node = parse_unary();
      for (;;) {
        if (eat('*')) node = binary(Node::Op::mul, std::move(node), parse_unary());
        else if (eat('/')) node = binary(Node::Op::div, std::move(node), parse_unary());
        else return node;
      }
    }

    // '^' binds tighter than a leading '-': -x^2 is -(x^2).
    std::unique_ptr<Node> parse_unary() {
      if (eat('-')) {
        auto node = std::make_unique<Node>();
        node->op = Node::Op::neg;
        node->lhs = parse_unary();
        return node;
      }
      if (eat('+')) return parse_unary();
      return parse_power();
    }

    std::unique_ptr<Node> parse_power() {
      auto node = parse_primary();
      if (eat('^')) node = binary(Node::Op::pow, std::move(node), parse_unary());
      return node;
    }

    std::unique_ptr<Node> parse_primary() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
      if (eat('(')) {
        auto node = parse_sum();
        if (!eat(')')) fail("expected ')'");
        return node;
      }
      fail(std::string("unexpected character '") + c + "'");
    }

    std::unique_ptr<Node> parse_number() {
      std::size_t end = pos;
      while (end < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' || s[end] == 'e' ||
              s[end] == 'E' ||
              ((s[end] == '+' || s[end] == '-') && (s[end - 1] == 'e' || s[end - 1] == 'E'))))
        ++end;
      auto node = std::make_unique<Node>();
      try {
        std::size_t used = 0;
        node->value = std::stod(s.substr(pos, end - pos), &used);
        pos += used;
      } catch (const std::exception&) {
        fail("bad number literal");
      }
      return node;
    }

    std::unique_ptr<Node> parse_name() {
      std::size_t end = pos;
      while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        ++end;
      const std::string name = s.substr(pos, end - pos);
      pos = end;

      auto leaf = [&](Node::Op op, double v = 0.0) {
        auto node = std::make_unique<Node>();
        node->op = op;
        node->value = v;
        return node;
      };
      if (name == "x") return leaf(Node::Op::var_x);
      if (name == "y") return leaf(Node::Op::var_y);
      if (name == "pi") return leaf(Node::Op::constant, 3.14159265358979323846);
      if (name == "e") return leaf(Node::Op::constant, 2.71828182845904523536);

      static const std::pair<const char*, Node::Op> unary_fns[] = {
          {"sin", Node::Op::sin},   {"cos", Node::Op::cos},   {"tan", Node::Op::tan},
          {"sinh", Node::Op::sinh}, {"cosh", Node::Op::cosh}, {"tanh", Node::Op::tanh},
          {"exp", Node::Op::exp},   {"log", Node::Op::log},   {"sqrt", Node::Op::sqrt},
          {"abs", Node::Op::abs},   {"atan", Node::Op::atan}};
      static const std::pair<const char*, Node::Op> binary_fns[] = {
          {"atan2", Node::Op::atan2}, {"min", Node::Op::min}, {"max", Node::Op::max}};

      for (const auto& [fn, op] : unary_fns)
        if (name == fn) {
          if (!eat('(')) fail("expected '(' after function name");
          auto node = std::make_unique<Node>();
          node->op = op;
          node->lhs = parse_sum();
          if (!eat(')')) fail("expected ')'");
          return node;
        }
      for (const auto& [fn, op] : binary_fns)
        if (name == fn) {
          if (!eat('(')) fail("expected '(' after function name");
          auto node = std::make_unique<Node>();
          node->op = op;
          node->lhs = parse_sum();
          if (!eat(',')) fail("expected ','");
          node->rhs = parse_sum();
          if (!eat(')')) fail("expected ')'");
          return node;
        }
      fail("unknown identifier \"" + name + "\"");
    }

    static std::unique_ptr<Node> binary(Node::Op op, std::unique_ptr<Node> lhs,
                                        std::unique_ptr<Node> rhs) {
      auto node = std::make_unique<Node>();
      node->op = op;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      return node;
    }
  };

  static double eval(const Node& n, double x, double y) {
    using Op = Node::Op;
    switch (n.op) {
      case Op::constant: return n.value;
      case Op::var_x: return x;
      case Op::var_y: return y;
      case Op::add: return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
      case Op::sub: return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
      case Op::mul: return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
      case Op::div: return eval(*n.lhs, x, y) / eval(*n.rhs, x, y);
      case Op::pow: return std::pow(eval(*n.lhs, x, y), eval(*n.rhs, x, y));
      case Op::neg: return -eval(*n.lhs, x, y);
      case Op::sin: return std::sin(eval(*n.lhs, x, y));
      case Op::cos: return std::cos(eval(*n.lhs, x, y));
      case Op::tan: return std::tan(eval(*n.lhs, x, y));
      case Op::sinh: return std::sinh(eval(*n.lhs, x, y));
      case Op::cosh: return std::cosh(eval(*n.lhs, x, y));
      case Op::tanh: return std::tanh(eval(*n.lhs, x, y));
      case Op::exp: return std::exp(eval(*n.lhs, x, y));
      case Op::log: return std::log(eval(*n.lhs, x, y));
      case Op::sqrt: return std::sqrt(eval(*n.lhs, x, y));
      case Op::abs: return std::abs(eval(*n.lhs, x, y));
      case Op::atan: return std::atan(eval(*n.lhs, x, y));
      case Op::atan2: return std::atan2(eval(*n.lhs, x, y), eval(*n.rhs, x, y));
      case Op::min: return std::min(eval(*n.lhs, x, y), eval(*n.rhs, x, y));
      case Op::max: return std::max(eval(*n.lhs, x, y), eval(*n.rhs, x, y));
    }
    return 0.0;
  }

  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace fractura
