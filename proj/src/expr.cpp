#include "ldlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace ldlab {

enum class Op { literal, variable, param, add, sub, mul, div, pow, neg, min, max, log, exp, sin, cos };

struct Expr::Node {
  Op op;
  double value = 0.0;      // literal
  int var_index = -1;      // variable (0-based)
  std::string name;        // param
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) {
    throw ExprError(msg + " at position " + std::to_string(pos),
                    static_cast<long>(pos));
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) { ++pos; return true; }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  // additive <- multiplicative (('+'|'-') multiplicative)*
  NodePtr parse_additive() {
    NodePtr left = parse_multiplicative();
    for (;;) {
      if (eat('+')) left = make(Op::add, left, parse_multiplicative());
      else if (eat('-')) left = make(Op::sub, left, parse_multiplicative());
      else return left;
    }
  }

  NodePtr parse_multiplicative() {
    NodePtr left = parse_unary();
    for (;;) {
      if (eat('*')) left = make(Op::mul, left, parse_unary());
      else if (eat('/')) left = make(Op::div, left, parse_unary());
      else return left;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make(Op::neg, parse_unary());
    return parse_power();
  }

  // power is right-associative and binds tighter than unary minus on the left
  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) {
      NodePtr expo = parse_unary();  // allows 2^-3
      return make(Op::pow, base, expo);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of expression");
    const char c = s[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_additive();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + pos, &end);
      if (end == s.c_str() + pos) fail("bad numeric literal");
      pos = static_cast<std::size_t>(end - s.c_str());
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::literal;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      const std::string ident = s.substr(start, pos - start);
      if (ident == "min" || ident == "max") {
        if (!eat('(')) fail("expected '(' after " + ident);
        NodePtr a = parse_additive();
        if (!eat(',')) fail("expected ',' in " + ident);
        NodePtr b = parse_additive();
        if (!eat(')')) fail("expected ')'");
        return make(ident == "min" ? Op::min : Op::max, a, b);
      }
      if (ident == "log" || ident == "exp" || ident == "sin" || ident == "cos") {
        if (!eat('(')) fail("expected '(' after " + ident);
        NodePtr a = parse_additive();
        if (!eat(')')) fail("expected ')'");
        Op op = ident == "log"   ? Op::log
                : ident == "exp" ? Op::exp
                : ident == "sin" ? Op::sin
                                 : Op::cos;
        return make(op, a);
      }
      // x1, x2, ... are state variables; anything else is a named parameter
      if (ident.size() >= 2 && ident[0] == 'x') {
        bool digits = true;
        for (std::size_t i = 1; i < ident.size(); ++i)
          if (!std::isdigit(static_cast<unsigned char>(ident[i]))) digits = false;
        if (digits) {
          const int idx = std::atoi(ident.c_str() + 1);
          if (idx < 1) fail("state variables are numbered from x1");
          auto n = std::make_shared<Expr::Node>();
          n->op = Op::variable;
          n->var_index = idx - 1;
          return n;
        }
      }
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::param;
      n->name = ident;
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

double eval_node(const Expr::Node& n, const Vec& x,
                 const std::map<std::string, double>& params) {
  switch (n.op) {
    case Op::literal: return n.value;
    case Op::variable:
      if (n.var_index >= static_cast<int>(x.size()))
        throw ExprError("state variable x" + std::to_string(n.var_index + 1) +
                        " out of range for dimension " + std::to_string(x.size()));
      return x[static_cast<std::size_t>(n.var_index)];
    case Op::param: {
      auto it = params.find(n.name);
      if (it == params.end()) throw ExprError("unknown identifier '" + n.name + "'");
      return it->second;
    }
    case Op::add: return eval_node(*n.a, x, params) + eval_node(*n.b, x, params);
    case Op::sub: return eval_node(*n.a, x, params) - eval_node(*n.b, x, params);
    case Op::mul: return eval_node(*n.a, x, params) * eval_node(*n.b, x, params);
    case Op::div: {
      const double d = eval_node(*n.b, x, params);
      if (d == 0.0) throw ExprError("division by zero");
      return eval_node(*n.a, x, params) / d;
    }
    case Op::pow: return std::pow(eval_node(*n.a, x, params), eval_node(*n.b, x, params));
    case Op::neg: return -eval_node(*n.a, x, params);
    case Op::min: return std::min(eval_node(*n.a, x, params), eval_node(*n.b, x, params));
    case Op::max: return std::max(eval_node(*n.a, x, params), eval_node(*n.b, x, params));
    case Op::log: {
      const double a = eval_node(*n.a, x, params);
      if (a <= 0.0) throw ExprError("log of non-positive value");
      return std::log(a);
    }
    case Op::exp: return std::exp(eval_node(*n.a, x, params));
    case Op::sin: return std::sin(eval_node(*n.a, x, params));
    case Op::cos: return std::cos(eval_node(*n.a, x, params));
  }
  throw ExprError("corrupt expression node");
}

void print_node(const Expr::Node& n, std::ostringstream& out) {
  auto binary = [&](const char* sym) {
    out << '(';
    print_node(*n.a, out);
    out << sym;
    print_node(*n.b, out);
    out << ')';
  };
  auto call = [&](const char* fn) {
    out << fn << '(';
    print_node(*n.a, out);
    if (n.b) {
      out << ',';
      print_node(*n.b, out);
    }
    out << ')';
  };
  switch (n.op) {
    case Op::literal: {
      std::ostringstream num;
      num.precision(17);
      num << n.value;
      out << num.str();
      return;
    }
    case Op::variable: out << 'x' << (n.var_index + 1); return;
    case Op::param: out << n.name; return;
    case Op::add: binary("+"); return;
    case Op::sub: binary("-"); return;
    case Op::mul: binary("*"); return;
    case Op::div: binary("/"); return;
    case Op::pow: binary("^"); return;
    case Op::neg:
      out << "(-";
      print_node(*n.a, out);
      out << ')';
      return;
    case Op::min: call("min"); return;
    case Op::max: call("max"); return;
    case Op::log: call("log"); return;
    case Op::exp: call("exp"); return;
    case Op::sin: call("sin"); return;
    case Op::cos: call("cos"); return;
  }
}

void collect_params(const Expr::Node& n, std::set<std::string>& out) {
  if (n.op == Op::param) out.insert(n.name);
  if (n.a) collect_params(*n.a, out);
  if (n.b) collect_params(*n.b, out);
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  if (text.empty()) throw ExprError("empty expression", 0);
  Parser p(text);
  NodePtr root = p.parse_additive();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  Expr e;
  e.root_ = std::move(root);
  return e;
}

double Expr::eval(const Vec& x, const std::map<std::string, double>& params) const {
  if (!root_) throw ExprError("evaluating empty expression");
  return eval_node(*root_, x, params);
}

std::string Expr::print() const {
  if (!root_) return "";
  std::ostringstream out;
  print_node(*root_, out);
  return out.str();
}

std::vector<std::string> Expr::parameter_names() const {
  std::set<std::string> names;
  if (root_) collect_params(*root_, names);
  return {names.begin(), names.end()};
}

}  // namespace ldlab
