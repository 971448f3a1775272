#include "cmekit/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "cmekit/error.hpp"

namespace cmekit {

struct RateExpression::Node {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;
  std::string name;
  std::size_t index = 0;
  RateExpression lhs_expr;
  RateExpression rhs_expr;
};

namespace {

bool is_binary(ExprKind k) {
  return k == ExprKind::add || k == ExprKind::subtract || k == ExprKind::multiply ||
         k == ExprKind::divide;
}

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::add:
    case ExprKind::subtract:
      return 1;
    case ExprKind::multiply:
    case ExprKind::divide:
      return 2;
    default:
      return 3;
  }
}

char op_char(ExprKind k) {
  switch (k) {
    case ExprKind::add: return '+';
    case ExprKind::subtract: return '-';
    case ExprKind::multiply: return '*';
    default: return '/';
  }
}

}  // namespace

RateExpression::RateExpression() : node_(nullptr) {}

RateExpression::RateExpression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

RateExpression RateExpression::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::constant;
  n->value = value;
  return RateExpression(std::move(n));
}

RateExpression RateExpression::parameter(std::string name, std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::parameter;
  n->name = std::move(name);
  n->index = index;
  return RateExpression(std::move(n));
}

RateExpression RateExpression::species(std::string name, std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::species;
  n->name = std::move(name);
  n->index = index;
  return RateExpression(std::move(n));
}

RateExpression RateExpression::mass_action(RateExpression coefficient) {
  if (coefficient.kind() != ExprKind::constant && coefficient.kind() != ExprKind::parameter) {
    throw InvalidArgument("mass_action coefficient must be a number or a parameter");
  }
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::mass_action;
  n->lhs_expr = std::move(coefficient);
  return RateExpression(std::move(n));
}

RateExpression RateExpression::binary(ExprKind kind, RateExpression lhs, RateExpression rhs) {
  if (!is_binary(kind)) throw InvalidArgument("binary() needs an arithmetic operator kind");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs_expr = std::move(lhs);
  n->rhs_expr = std::move(rhs);
  return RateExpression(std::move(n));
}

ExprKind RateExpression::kind() const noexcept {
  return node_ ? node_->kind : ExprKind::constant;
}
double RateExpression::value() const noexcept { return node_ ? node_->value : 0.0; }
const std::string& RateExpression::name() const noexcept {
  static const std::string empty;
  return node_ ? node_->name : empty;
}
std::size_t RateExpression::index() const noexcept { return node_ ? node_->index : 0; }

const RateExpression& RateExpression::lhs() const {
  if (!node_ || (!is_binary(node_->kind) && node_->kind != ExprKind::mass_action)) {
    throw InvalidArgument("expression node has no operands");
  }
  return node_->lhs_expr;
}

const RateExpression& RateExpression::rhs() const {
  if (!node_ || !is_binary(node_->kind)) throw InvalidArgument("expression node has no operands");
  return node_->rhs_expr;
}

bool RateExpression::is_leaf() const noexcept {
  const auto k = kind();
  return k == ExprKind::constant || k == ExprKind::parameter || k == ExprKind::species;
}

double RateExpression::evaluate(std::span<const double> species,
                                std::span<const double> params) const {
  switch (kind()) {
    case ExprKind::constant:
      return value();
    case ExprKind::parameter:
      if (index() >= params.size()) throw EvaluationError("parameter '" + name() + "' out of range");
      return params[index()];
    case ExprKind::species:
      if (index() >= species.size()) throw EvaluationError("species '" + name() + "' out of range");
      return species[index()];
    case ExprKind::add:
      return lhs().evaluate(species, params) + rhs().evaluate(species, params);
    case ExprKind::subtract:
      return lhs().evaluate(species, params) - rhs().evaluate(species, params);
    case ExprKind::multiply:
      return lhs().evaluate(species, params) * rhs().evaluate(species, params);
    case ExprKind::divide: {
      const double den = rhs().evaluate(species, params);
      if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
      return lhs().evaluate(species, params) / den;
    }
    case ExprKind::mass_action:
      throw EvaluationError("mass_action must be expanded against its reaction before evaluation");
  }
  return 0.0;
}

std::vector<std::size_t> RateExpression::species_read() const {
  std::set<std::size_t> out;
  std::function<void(const RateExpression&)> walk = [&](const RateExpression& e) {
    if (e.kind() == ExprKind::species) out.insert(e.index());
    if (is_binary(e.kind())) {
      walk(e.lhs());
      walk(e.rhs());
    }
  };
  walk(*this);
  return {out.begin(), out.end()};
}

std::vector<std::string> RateExpression::parameters_read() const {
  std::vector<std::string> out;
  std::function<void(const RateExpression&)> walk = [&](const RateExpression& e) {
    if (e.kind() == ExprKind::parameter &&
        std::find(out.begin(), out.end(), e.name()) == out.end()) {
      out.push_back(e.name());
    }
    if (is_binary(e.kind())) {
      walk(e.lhs());
      walk(e.rhs());
    } else if (e.kind() == ExprKind::mass_action) {
      walk(e.coefficient());
    }
  };
  walk(*this);
  return out;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, res.ptr);
  return s;
}

std::string RateExpression::to_string() const {
  switch (kind()) {
    case ExprKind::constant:
      return value() < 0 ? "(" + format_number(value()) + ")" : format_number(value());
    case ExprKind::parameter:
    case ExprKind::species:
      return name();
    case ExprKind::mass_action:
      return "mass_action(" + coefficient().to_string() + ")";
    default:
      break;
  }
  const int p = precedence(kind());
  std::string l = lhs().to_string();
  std::string r = rhs().to_string();
  if (precedence(lhs().kind()) < p) l = "(" + l + ")";
  // Same-precedence right operands need parentheses to keep the tree shape
  // under left-associative reparsing.
  if (precedence(rhs().kind()) <= p) r = "(" + r + ")";
  return l + " " + op_char(kind()) + " " + r;
}

bool operator==(const RateExpression& a, const RateExpression& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::constant:
      return a.value() == b.value();
    case ExprKind::parameter:
    case ExprKind::species:
      return a.name() == b.name() && a.index() == b.index();
    case ExprKind::mass_action:
      return a.coefficient() == b.coefficient();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

RateExpression operator+(const RateExpression& a, const RateExpression& b) {
  return RateExpression::binary(ExprKind::add, a, b);
}
RateExpression operator-(const RateExpression& a, const RateExpression& b) {
  return RateExpression::binary(ExprKind::subtract, a, b);
}
RateExpression operator*(const RateExpression& a, const RateExpression& b) {
  return RateExpression::binary(ExprKind::multiply, a, b);
}
RateExpression operator/(const RateExpression& a, const RateExpression& b) {
  return RateExpression::binary(ExprKind::divide, a, b);
}

namespace {

bool is_const(const RateExpression& e, double v) {
  return e.kind() == ExprKind::constant && e.value() == v;
}

RateExpression fold_add(const RateExpression& a, const RateExpression& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a.kind() == ExprKind::constant && b.kind() == ExprKind::constant) {
    return RateExpression::constant(a.value() + b.value());
  }
  return a + b;
}

RateExpression fold_sub(const RateExpression& a, const RateExpression& b) {
  if (is_const(b, 0.0)) return a;
  if (a.kind() == ExprKind::constant && b.kind() == ExprKind::constant) {
    return RateExpression::constant(a.value() - b.value());
  }
  return a - b;
}

RateExpression fold_mul(const RateExpression& a, const RateExpression& b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return RateExpression::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a.kind() == ExprKind::constant && b.kind() == ExprKind::constant) {
    return RateExpression::constant(a.value() * b.value());
  }
  return a * b;
}

RateExpression fold_div(const RateExpression& a, const RateExpression& b) {
  if (is_const(a, 0.0)) return RateExpression::constant(0.0);
  if (is_const(b, 1.0)) return a;
  return a / b;
}

}  // namespace

RateExpression differentiate(const RateExpression& expr, std::size_t species_index) {
  switch (expr.kind()) {
    case ExprKind::constant:
    case ExprKind::parameter:
      return RateExpression::constant(0.0);
    case ExprKind::species:
      return RateExpression::constant(expr.index() == species_index ? 1.0 : 0.0);
    case ExprKind::mass_action:
      throw UnsupportedError("differentiate: expand mass_action against its reaction first");
    case ExprKind::add:
      return fold_add(differentiate(expr.lhs(), species_index),
                      differentiate(expr.rhs(), species_index));
    case ExprKind::subtract:
      return fold_sub(differentiate(expr.lhs(), species_index),
                      differentiate(expr.rhs(), species_index));
    case ExprKind::multiply: {
      const auto& u = expr.lhs();
      const auto& v = expr.rhs();
      return fold_add(fold_mul(differentiate(u, species_index), v),
                      fold_mul(u, differentiate(v, species_index)));
    }
    case ExprKind::divide: {
      const auto& u = expr.lhs();
      const auto& v = expr.rhs();
      auto du = differentiate(u, species_index);
      auto dv = differentiate(v, species_index);
      if (is_const(dv, 0.0)) return fold_div(du, v);
      return fold_div(fold_sub(fold_mul(du, v), fold_mul(u, dv)), fold_mul(v, v));
    }
  }
  return RateExpression::constant(0.0);
}

}  // namespace cmekit
