#include "cmekit/polynomial.hpp"

#include <cmath>
#include <numeric>

#include "cmekit/error.hpp"

namespace cmekit {

Polynomial Polynomial::constant(std::size_t variables, double c) {
  Polynomial p(variables);
  p.add_term(Monomial(variables, 0), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t variables, std::size_t which) {
  if (which >= variables) throw InvalidArgument("polynomial variable out of range");
  Polynomial p(variables);
  Monomial m(variables, 0);
  m[which] = 1;
  p.add_term(m, 1.0);
  return p;
}

bool Polynomial::is_constant() const noexcept {
  for (const auto& [m, c] : terms_) {
    for (int e : m) {
      if (e != 0) return false;
    }
  }
  return true;
}

double Polynomial::constant_term() const { return coefficient(Monomial(nvars_, 0)); }

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, std::accumulate(m.begin(), m.end(), 0));
  return d;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (m.size() != nvars_) throw InvalidArgument("monomial arity mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.nvars_ != nvars_) throw InvalidArgument("polynomial arity mismatch");
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.nvars_ != nvars_) throw InvalidArgument("polynomial arity mismatch");
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.nvars_ != b.nvars_) throw InvalidArgument("polynomial arity mismatch");
  Polynomial out(a.nvars_);
  Monomial m(a.nvars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      out.add_term(m, ca * cb);
    }
  }
  return out;
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (x.size() != nvars_) throw InvalidArgument("polynomial evaluation arity mismatch");
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < nvars_; ++i) {
      for (int e = 0; e < m[i]; ++e) t *= x[i];
    }
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::scaled_by_degree(double factor) const {
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    const int d = std::accumulate(m.begin(), m.end(), 0);
    out.add_term(m, c * std::pow(factor, d));
  }
  return out;
}

Polynomial falling_factorial(std::size_t variables, std::size_t which, int k) {
  Polynomial p = Polynomial::constant(variables, 1.0);
  const Polynomial x = Polynomial::variable(variables, which);
  for (int j = 0; j < k; ++j) {
    p = p * (x - Polynomial::constant(variables, static_cast<double>(j)));
  }
  return p;
}

}  // namespace cmekit
