#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cmekit {

enum class ExprKind {
  constant,
  parameter,
  species,
  add,
  subtract,
  multiply,
  divide,
  mass_action,
};

/// Immutable arithmetic expression tree over parameters and species counts.
///
/// Nodes are shared, so copies are cheap. Parameter and species references
/// carry both the identifier and the position it resolved to in the owning
/// network. A `mass_action` node wraps a single constant or parameter
/// coefficient; its meaning depends on the reaction's reactant vector and the
/// network's multiplicity convention, so it is expanded by the model layer
/// rather than evaluated here.
class RateExpression {
 public:
  RateExpression();  // constant 0

  static RateExpression constant(double value);
  static RateExpression parameter(std::string name, std::size_t index);
  static RateExpression species(std::string name, std::size_t index);
  static RateExpression mass_action(RateExpression coefficient);
  static RateExpression binary(ExprKind kind, RateExpression lhs, RateExpression rhs);

  ExprKind kind() const noexcept;
  double value() const noexcept;
  const std::string& name() const noexcept;
  std::size_t index() const noexcept;
  const RateExpression& lhs() const;
  const RateExpression& rhs() const;
  /// Coefficient of a mass_action node.
  const RateExpression& coefficient() const { return lhs(); }

  bool is_mass_action() const noexcept { return kind() == ExprKind::mass_action; }
  bool is_leaf() const noexcept;

  /// Evaluates with species values taken from `species` (counts or
  /// concentrations) and parameter values by index. Throws EvaluationError on
  /// mass_action nodes and on out-of-range references. Division by zero yields
  /// a non-finite value; callers decide how to report it.
  double evaluate(std::span<const double> species, std::span<const double> params) const;

  /// Indices of species read anywhere in the tree, sorted and unique.
  std::vector<std::size_t> species_read() const;
  /// Parameter names referenced anywhere in the tree.
  std::vector<std::string> parameters_read() const;

  /// Canonical text with minimal parentheses; reparses to an identical tree.
  std::string to_string() const;

  friend bool operator==(const RateExpression& a, const RateExpression& b);

 private:
  struct Node;
  explicit RateExpression(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

RateExpression operator+(const RateExpression& a, const RateExpression& b);
RateExpression operator-(const RateExpression& a, const RateExpression& b);
RateExpression operator*(const RateExpression& a, const RateExpression& b);
RateExpression operator/(const RateExpression& a, const RateExpression& b);

/// Symbolic partial derivative with respect to species `species_index` by the
/// sum, product and quotient rules. Trivial identities (0·x, 1·x, x+0) are
/// folded. mass_action nodes must be expanded first.
RateExpression differentiate(const RateExpression& expr, std::size_t species_index);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace cmekit
