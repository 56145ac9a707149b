#pragma once

// A small arithmetic expression language over (u, v) and named parameters.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' exponent)*
//   exponent:= '-'? primary            (must not depend on u or v)
//   primary := number | identifier | identifier '(' expr ')' | '(' expr ')'
//
// Identifiers are u, v, pi, a parameter name, or one of the unary
// functions sin cos sinh cosh exp log sqrt.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "lightcone/jets.hpp"

namespace lightcone {

enum class NodeKind { constant, parameter, var_u, var_v, neg, func, add, sub, mul, div, pow };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double value = 0.0;      // constant
  std::string name;        // parameter or function name
  Elementary fn = Elementary::exp;
  Expr lhs;                // unary operand / left child
  Expr rhs;                // right child
  std::size_t offset = 0;  // byte offset in the source
};

using ParamTable = std::map<std::string, double>;

class ParseError : public GeometryError {
 public:
  ParseError(ErrorKind kind, const std::string& msg, std::size_t offset)
      : GeometryError(kind, msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

inline bool function_named(std::string_view name, Elementary& fn) {
  static const std::map<std::string_view, Elementary> table{
      {"sin", Elementary::sin},   {"cos", Elementary::cos}, {"sinh", Elementary::sinh},
      {"cosh", Elementary::cosh}, {"exp", Elementary::exp}, {"log", Elementary::log},
      {"sqrt", Elementary::sqrt}};
  auto it = table.find(name);
  if (it == table.end()) return false;
  fn = it->second;
  return true;
}

inline bool depends_on_uv(const Expr& e) {
  if (!e) return false;
  if (e->kind == NodeKind::var_u || e->kind == NodeKind::var_v) return true;
  return depends_on_uv(e->lhs) || depends_on_uv(e->rhs);
}

class Parser {
 public:
  Parser(std::string_view text, const ParamTable* params) : s_(text), params_(params) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(ErrorKind::parse, "unexpected character", pos_);
    return e;
  }

 private:
  static Expr make(NodeKind k, std::size_t off, Expr l = nullptr, Expr r = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    n->offset = off;
    return n;
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

  Expr expr() {
    Expr e = term();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (eat('+')) e = make(NodeKind::add, at, e, term());
      else if (eat('-')) e = make(NodeKind::sub, at, e, term());
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (eat('*')) e = make(NodeKind::mul, at, e, unary());
      else if (eat('/')) e = make(NodeKind::div, at, e, unary());
      else return e;
    }
  }

  Expr unary() {
    skip();
    const std::size_t at = pos_;
    if (eat('-')) return make(NodeKind::neg, at, unary());
    return power();
  }

  Expr power() {
    Expr e = primary();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (!eat('^')) return e;
      skip();
      const std::size_t eat_at = pos_;
      Expr ex = eat('-') ? make(NodeKind::neg, eat_at, primary()) : primary();
      if (depends_on_uv(ex))
        throw ParseError(ErrorKind::parse, "exponent must be constant", ex->offset);
      e = make(NodeKind::pow, at, e, ex);
    }
  }

  Expr primary() {
    skip();
    const std::size_t at = pos_;
    if (pos_ >= s_.size()) throw ParseError(ErrorKind::parse, "unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!eat(')')) throw ParseError(ErrorKind::parse, "expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
        ++end;
      std::string name(s_.substr(pos_, end - pos_));
      pos_ = end;
      Elementary fn;
      if (function_named(name, fn)) {
        if (!eat('(')) throw ParseError(ErrorKind::arity, "function '" + name + "' needs (", pos_);
        Expr arg = expr();
        skip();
        if (eat(',')) throw ParseError(ErrorKind::arity, "function '" + name + "' takes one argument", pos_ - 1);
        if (!eat(')')) throw ParseError(ErrorKind::parse, "expected ')'", pos_);
        auto n = std::make_shared<ExprNode>();
        n->kind = NodeKind::func;
        n->fn = fn;
        n->name = name;
        n->lhs = arg;
        n->offset = at;
        return n;
      }
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(')
        throw ParseError(ErrorKind::unknown_identifier, "unknown function '" + name + "'", at);
      if (name == "u") return make(NodeKind::var_u, at);
      if (name == "v") return make(NodeKind::var_v, at);
      auto n = std::make_shared<ExprNode>();
      n->offset = at;
      if (name == "pi") {
        n->kind = NodeKind::constant;
        n->value = M_PI;
        n->name = "pi";
        return n;
      }
      if (params_ && !params_->count(name))
        throw ParseError(ErrorKind::unknown_identifier, "unknown identifier '" + name + "'", at);
      n->kind = NodeKind::parameter;
      n->name = name;
      return n;
    }
    throw ParseError(ErrorKind::parse, std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.'))
      ++end;
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
        end = k;
        while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
      }
    }
    std::string tok(s_.substr(pos_, end - pos_));
    std::size_t used = 0;
    double val = 0;
    try {
      val = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ParseError(ErrorKind::parse, "malformed number", at);
    }
    if (used != tok.size()) throw ParseError(ErrorKind::parse, "malformed number", at);
    pos_ = end;
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::constant;
    n->value = val;
    n->offset = at;
    return n;
  }

  std::string_view s_;
  const ParamTable* params_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an expression. With a parameter table, unknown identifiers are
/// rejected at parse time; without one they are accepted as parameters.
inline Expr parse_expr(std::string_view text, const ParamTable* params = nullptr) {
  return detail::Parser(text, params).parse();
}

/// Fully parenthesized rendering; parses back to the same tree.
inline std::string print_expr(const Expr& e) {
  std::ostringstream os;
  os.precision(17);
  switch (e->kind) {
    case NodeKind::constant:
      if (e->name == "pi") os << "pi";
      else os << e->value;
      break;
    case NodeKind::parameter: os << e->name; break;
    case NodeKind::var_u: os << "u"; break;
    case NodeKind::var_v: os << "v"; break;
    case NodeKind::neg: os << "(-" << print_expr(e->lhs) << ")"; break;
    case NodeKind::func: os << e->name << "(" << print_expr(e->lhs) << ")"; break;
    case NodeKind::add: os << "(" << print_expr(e->lhs) << " + " << print_expr(e->rhs) << ")"; break;
    case NodeKind::sub: os << "(" << print_expr(e->lhs) << " - " << print_expr(e->rhs) << ")"; break;
    case NodeKind::mul: os << "(" << print_expr(e->lhs) << " * " << print_expr(e->rhs) << ")"; break;
    case NodeKind::div: os << "(" << print_expr(e->lhs) << " / " << print_expr(e->rhs) << ")"; break;
    case NodeKind::pow: os << "(" << print_expr(e->lhs) << " ^ " << print_expr(e->rhs) << ")"; break;
  }
  return os.str();
}

inline bool same_structure(const Expr& a, const Expr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == NodeKind::constant && a->value != b->value) return false;
  if ((a->kind == NodeKind::parameter || a->kind == NodeKind::func) && a->name != b->name)
    return false;
  return same_structure(a->lhs, b->lhs) && same_structure(a->rhs, b->rhs);
}

namespace detail {

inline double lookup(const ExprNode& n, const ParamTable& params) {
  auto it = params.find(n.name);
  if (it == params.end())
    throw ParseError(ErrorKind::unknown_identifier, "unknown identifier '" + n.name + "'", n.offset);
  return it->second;
}

inline double eval_scalar(const Expr& e, double u, double v, const ParamTable& params) {
  auto domain = [&](bool ok, const char* what) {
    if (!ok) throw ParseError(ErrorKind::jet_domain, what, e->offset);
  };
  switch (e->kind) {
    case NodeKind::constant: return e->value;
    case NodeKind::parameter: return lookup(*e, params);
    case NodeKind::var_u: return u;
    case NodeKind::var_v: return v;
    case NodeKind::neg: return -eval_scalar(e->lhs, u, v, params);
    case NodeKind::add: return eval_scalar(e->lhs, u, v, params) + eval_scalar(e->rhs, u, v, params);
    case NodeKind::sub: return eval_scalar(e->lhs, u, v, params) - eval_scalar(e->rhs, u, v, params);
    case NodeKind::mul: return eval_scalar(e->lhs, u, v, params) * eval_scalar(e->rhs, u, v, params);
    case NodeKind::div: {
      const double d = eval_scalar(e->rhs, u, v, params);
      domain(std::abs(d) > 1e-300, "division by zero");
      return eval_scalar(e->lhs, u, v, params) / d;
    }
    case NodeKind::pow: {
      const double b = eval_scalar(e->lhs, u, v, params);
      const double x = eval_scalar(e->rhs, u, v, params);
      domain(b > 0 || std::abs(x - std::round(x)) < 1e-15, "non-integer power of nonpositive value");
      return std::pow(b, x);
    }
    case NodeKind::func: {
      const double a = eval_scalar(e->lhs, u, v, params);
      switch (e->fn) {
        case Elementary::sin: return std::sin(a);
        case Elementary::cos: return std::cos(a);
        case Elementary::sinh: return std::sinh(a);
        case Elementary::cosh: return std::cosh(a);
        case Elementary::exp: return std::exp(a);
        case Elementary::log: domain(a > 0, "log of nonpositive value"); return std::log(a);
        case Elementary::sqrt: domain(a > 0, "sqrt of nonpositive value"); return std::sqrt(a);
        case Elementary::pow_const: break;
      }
    }
  }
  throw GeometryError(ErrorKind::internal, "bad expression node");
}

inline ScalarJet eval_jet(const Expr& e, double u0, double v0, int order, const ParamTable& params) {
  auto c = [&](double x) { return ScalarJet::constant(order, x, u0, v0); };
  try {
    switch (e->kind) {
      case NodeKind::constant: return c(e->value);
      case NodeKind::parameter: return c(lookup(*e, params));
      case NodeKind::var_u: return variable_u(order, u0, v0);
      case NodeKind::var_v: return variable_v(order, u0, v0);
      case NodeKind::neg: return -eval_jet(e->lhs, u0, v0, order, params);
      case NodeKind::add:
        return eval_jet(e->lhs, u0, v0, order, params) + eval_jet(e->rhs, u0, v0, order, params);
      case NodeKind::sub:
        return eval_jet(e->lhs, u0, v0, order, params) - eval_jet(e->rhs, u0, v0, order, params);
      case NodeKind::mul:
        return eval_jet(e->lhs, u0, v0, order, params) * eval_jet(e->rhs, u0, v0, order, params);
      case NodeKind::div:
        return eval_jet(e->lhs, u0, v0, order, params) / eval_jet(e->rhs, u0, v0, order, params);
      case NodeKind::pow: {
        const double x = eval_scalar(e->rhs, u0, v0, params);
        return elementary(eval_jet(e->lhs, u0, v0, order, params), Elementary::pow_const, x);
      }
      case NodeKind::func:
        return elementary(eval_jet(e->lhs, u0, v0, order, params), e->fn);
    }
  } catch (const ParseError&) {
    throw;
  } catch (const GeometryError& err) {
    if (err.kind() == ErrorKind::jet_domain) throw ParseError(ErrorKind::jet_domain, err.what(), e->offset);
    throw;
  }
  throw GeometryError(ErrorKind::internal, "bad expression node");
}

}  // namespace detail

/// Value of the expression at (u, v).
inline double eval_expr(const Expr& e, double u, double v, const ParamTable& params = {}) {
  return detail::eval_scalar(e, u, v, params);
}

/// Jet of the expression at (u0, v0); parameters are constants.
inline ScalarJet eval_expr_jet(const Expr& e, double u0, double v0, int order,
                               const ParamTable& params = {}) {
  if (order < 0 || order > kMaxJetOrder)
    throw GeometryError(ErrorKind::jet_order, "jet order out of range");
  return detail::eval_jet(e, u0, v0, order, params);
}

}  // namespace lightcone
