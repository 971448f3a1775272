#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cmekit {

/// Exponent vector, one entry per variable.
using Monomial = std::vector<int>;

/// Sparse multivariate polynomial with real coefficients. Zero coefficients
/// are never stored.
class Polynomial {
 public:
  explicit Polynomial(std::size_t variables = 0) : nvars_(variables) {}

  static Polynomial constant(std::size_t variables, double c);
  static Polynomial variable(std::size_t variables, std::size_t which);

  std::size_t variables() const noexcept { return nvars_; }
  const std::map<Monomial, double>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  double constant_term() const;
  double coefficient(const Monomial& m) const;
  int degree() const;

  void add_term(const Monomial& m, double c);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }

  double evaluate(std::span<const double> x) const;

  /// Each monomial of total degree d is multiplied by factor^d, i.e. the
  /// substitution x -> factor·x.
  Polynomial scaled_by_degree(double factor) const;

 private:
  std::size_t nvars_;
  std::map<Monomial, double> terms_;
};

/// Expanded falling factorial x(x-1)...(x-k+1) in variable `which`.
Polynomial falling_factorial(std::size_t variables, std::size_t which, int k);

/// Numerator/denominator pair with the denominator normalized so that a
/// constant denominator is exactly 1.
struct RationalForm {
  Polynomial numerator;
  Polynomial denominator;
  bool is_polynomial() const { return denominator.is_constant(); }
};

}  // namespace cmekit
