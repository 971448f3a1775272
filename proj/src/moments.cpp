#include "cmekit/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "cmekit/error.hpp"

namespace cmekit {

int moment_order(const MomentIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

std::string moment_name(const std::vector<std::string>& species, const MomentIndex& a) {
  std::string s = "E[";
  bool first = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    if (!first) s += '*';
    first = false;
    s += species[i];
    if (a[i] > 1) s += "^" + std::to_string(a[i]);
  }
  return s + "]";
}

std::vector<std::string> MomentSystem::names() const {
  std::vector<std::string> out;
  for (const auto& a : tracked) out.push_back(moment_name(species, a));
  return out;
}

std::vector<double> MomentSystem::evaluate(std::span<const double> mu) const {
  if (!self_contained()) {
    throw UnsupportedError("moment system references untracked higher moments; apply a closure");
  }
  std::vector<double> d(rhs.size());
  for (std::size_t e = 0; e < rhs.size(); ++e) d[e] = rhs[e].evaluate(mu);
  return d;
}

namespace {

/// All multi-indices of total order d over m species, first species
/// highest first (R^2, R*P, P^2).
void compositions(std::size_t m, int d, std::vector<MomentIndex>& out) {
  MomentIndex a(m, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == m) {
      a[i] = left;
      out.push_back(a);
      return;
    }
    for (int v = left; v >= 0; --v) {
      a[i] = v;
      rec(i + 1, left - v);
    }
  };
  if (m > 0) rec(0, d);
}

Polynomial power_of_shift(std::size_t m, std::size_t i, int xi, int power) {
  // (X_i + ξ)^power
  Polynomial base(m);
  base.add_term(Monomial(m, 0), xi);
  base += Polynomial::variable(m, i);
  Polynomial out = Polynomial::constant(m, 1.0);
  for (int p = 0; p < power; ++p) out = out * base;
  return out;
}

std::map<MomentIndex, std::size_t> tracked_map(const MomentSystem& s) {
  std::map<MomentIndex, std::size_t> idx;
  for (std::size_t i = 0; i < s.tracked.size(); ++i) idx[s.tracked[i]] = i;
  return idx;
}

/// Linear (unclosed) right-hand side as a polynomial over tracked moments.
Polynomial linear_rhs(const MomentSystem& s, const std::map<MomentIndex, double>& raw,
                      const std::map<MomentIndex, std::size_t>& idx,
                      const std::function<Polynomial(const MomentIndex&)>& higher) {
  const std::size_t nv = s.tracked.size();
  Polynomial p(nv);
  for (const auto& [beta, c] : raw) {
    if (moment_order(beta) == 0) {
      p.add_term(Monomial(nv, 0), c);
    } else if (auto it = idx.find(beta); it != idx.end()) {
      Monomial m(nv, 0);
      m[it->second] = 1;
      p.add_term(m, c);
    } else {
      p += higher(beta) * c;
    }
  }
  return p;
}

/// Every set partition of {0..n-1}, as block lists.
void set_partitions(std::size_t n, const std::function<void(const std::vector<std::vector<std::size_t>>&)>& visit) {
  std::vector<std::vector<std::size_t>> blocks;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      visit(blocks);
      return;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].push_back(i);
      rec(i + 1);
      blocks[b].pop_back();
    }
    blocks.push_back({i});
    rec(i + 1);
    blocks.pop_back();
  };
  rec(0);
}

MomentIndex index_of(const std::vector<std::size_t>& vars, std::size_t m) {
  MomentIndex a(m, 0);
  for (std::size_t v : vars) ++a[v];
  return a;
}

class CumulantAlgebra {
 public:
  CumulantAlgebra(const MomentSystem& s) : s_(s), idx_(tracked_map(s)), nv_(s.tracked.size()) {}

  Polynomial raw_moment(const MomentIndex& a) const {
    if (moment_order(a) == 0) return Polynomial::constant(nv_, 1.0);
    auto it = idx_.find(a);
    if (it == idx_.end()) throw UnsupportedError("moment above the tracked order inside a cumulant");
    return Polynomial::variable(nv_, it->second);
  }

  /// Joint cumulant of the listed variables (order ≤ n) in tracked moments.
  const Polynomial& cumulant(std::vector<std::size_t> vars) {
    std::sort(vars.begin(), vars.end());
    auto it = memo_.find(vars);
    if (it != memo_.end()) return it->second;
    Polynomial k(nv_);
    set_partitions(vars.size(), [&](const std::vector<std::vector<std::size_t>>& pi) {
      const std::size_t b = pi.size();
      double coef = std::tgamma(static_cast<double>(b));  // (b-1)!
      if ((b - 1) % 2 == 1) coef = -coef;
      Polynomial term = Polynomial::constant(nv_, coef);
      for (const auto& block : pi) {
        std::vector<std::size_t> v;
        for (std::size_t pos : block) v.push_back(vars[pos]);
        term = term * raw_moment(index_of(v, s_.species.size()));
      }
      k += term;
    });
    return memo_.emplace(vars, std::move(k)).first->second;
  }

  Polynomial closed_moment(const MomentIndex& a) {
    if (moment_order(a) <= s_.order) return raw_moment(a);
    std::vector<std::size_t> vars;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int c = 0; c < a[i]; ++c) vars.push_back(i);
    }
    Polynomial total(nv_);
    set_partitions(vars.size(), [&](const std::vector<std::vector<std::size_t>>& pi) {
      for (const auto& block : pi) {
        if (static_cast<int>(block.size()) > s_.order) return;
      }
      Polynomial term = Polynomial::constant(nv_, 1.0);
      for (const auto& block : pi) {
        std::vector<std::size_t> v;
        for (std::size_t pos : block) v.push_back(vars[pos]);
        term = term * cumulant(v);
      }
      total += term;
    });
    return total;
  }

 private:
  const MomentSystem& s_;
  std::map<MomentIndex, std::size_t> idx_;
  std::size_t nv_;
  std::map<std::vector<std::size_t>, Polynomial> memo_;
};

Polynomial derivative(const Polynomial& p, std::size_t var) {
  Polynomial d(p.variables());
  for (const auto& [m, c] : p.terms()) {
    if (m[var] == 0) continue;
    Monomial n = m;
    --n[var];
    d.add_term(n, c * m[var]);
  }
  return d;
}

}  // namespace

MomentSystem moment_odes(const ReactionNetwork& net, int order) {
  if (order < 1) throw InvalidArgument("moment order must be at least 1");
  const std::size_t m = net.species_count();
  MomentSystem sys;
  sys.order = order;
  for (const auto& s : net.species()) sys.species.push_back(s.name);
  for (int d = 1; d <= order; ++d) compositions(m, d, sys.tracked);

  std::vector<Polynomial> props;
  for (std::size_t k = 0; k < net.reaction_count(); ++k) {
    const RationalForm rf = propensity_rational(net, k);
    if (!rf.is_polynomial()) {
      throw UnsupportedError("reaction '" + net.reaction(k).name +
                             "' has a rational propensity; moment equations need polynomial "
                             "rates (use the FSP solver for this model)");
    }
    props.push_back(rf.numerator * (1.0 / rf.denominator.constant_term()));
  }

  sys.raw.resize(sys.tracked.size());
  std::map<MomentIndex, int> higher;
  for (std::size_t e = 0; e < sys.tracked.size(); ++e) {
    const MomentIndex& alpha = sys.tracked[e];
    Polynomial total(m);
    for (std::size_t k = 0; k < props.size(); ++k) {
      const auto& xi = net.reaction(k).net_change;
      Polynomial shifted = Polynomial::constant(m, 1.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (alpha[i] > 0) shifted = shifted * power_of_shift(m, i, xi[i], alpha[i]);
      }
      Monomial xa(alpha.begin(), alpha.end());
      Polynomial diff = shifted;
      diff.add_term(xa, -1.0);
      total += diff * props[k];
    }
    for (const auto& [beta, c] : total.terms()) {
      sys.raw[e][beta] += c;
      if (moment_order(beta) > order) higher[beta] = 1;
    }
  }
  for (const auto& [beta, _] : higher) sys.higher.push_back(beta);

  if (sys.higher.empty()) {
    const auto idx = tracked_map(sys);
    for (const auto& r : sys.raw) {
      sys.rhs.push_back(linear_rhs(sys, r, idx, [](const MomentIndex&) -> Polynomial {
        throw UnsupportedError("unexpected higher moment");
      }));
    }
  }
  return sys;
}

Polynomial normal_closure_polynomial(const MomentSystem& system, const MomentIndex& alpha) {
  if (moment_order(alpha) - system.order > 2) {
    throw UnsupportedError("normal closure supports moments at most two orders above the tracked order");
  }
  CumulantAlgebra alg(system);
  return alg.closed_moment(alpha);
}

MomentSystem close_normal(const MomentSystem& system) {
  if (system.higher.empty()) return system;
  for (const auto& beta : system.higher) {
    if (moment_order(beta) - system.order > 2) {
      throw UnsupportedError("propensity degree too high for normal closure: " +
                             moment_name(system.species, beta) + " is more than two orders above " +
                             "the tracked order");
    }
  }
  MomentSystem out = system;
  out.closure = Closure::normal;
  out.rhs.clear();
  CumulantAlgebra alg(system);
  const auto idx = tracked_map(system);
  for (const auto& r : system.raw) {
    out.rhs.push_back(linear_rhs(system, r, idx, [&](const MomentIndex& b) { return alg.closed_moment(b); }));
  }
  return out;
}

std::vector<double> point_moments(const MomentSystem& system, const SystemState& x0) {
  if (x0.size() != system.species.size()) throw InvalidArgument("state length does not match species count");
  std::vector<double> mu;
  for (const auto& a : system.tracked) {
    double v = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) v *= std::pow(static_cast<double>(x0[i]), a[i]);
    mu.push_back(v);
  }
  return mu;
}

std::vector<std::vector<double>> integrate_moments(const MomentSystem& system,
                                                   std::span<const double> init,
                                                   std::span<const double> t_grid,
                                                   const OdeOptions& options) {
  if (init.size() != system.size()) throw InvalidArgument("initial moment vector has the wrong length");
  if (!system.self_contained()) {
    throw UnsupportedError("moment system references untracked higher moments; apply a closure");
  }
  return integrate_rhs(
      [&](const std::vector<double>& y, std::vector<double>& dy) { dy = system.evaluate(y); },
      std::vector<double>(init.begin(), init.end()), t_grid, options);
}

std::vector<double> stationary_moments(const MomentSystem& system, std::span<const double> guess) {
  if (!system.self_contained()) {
    throw UnsupportedError("moment system references untracked higher moments; apply a closure");
  }
  const std::size_t n = system.size();
  bool affine = true;
  for (const auto& p : system.rhs) affine = affine && p.degree() <= 1;
  if (affine) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t e = 0; e < n; ++e) {
      b[e] = -system.rhs[e].constant_term();
      for (std::size_t j = 0; j < n; ++j) {
        Monomial m(n, 0);
        m[j] = 1;
        A(e, j) = system.rhs[e].coefficient(m);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw NumericError("moment equations have no unique stationary solution");
    const Eigen::VectorXd x = lu.solve(b);
    return {x.data(), x.data() + n};
  }

  std::vector<double> mu;
  if (guess.empty()) {
    const double grid[] = {0.0, 1e3};
    mu = integrate_moments(system, std::vector<double>(n, 0.0), grid).back();
  } else {
    if (guess.size() != n) throw InvalidArgument("guess has the wrong length");
    mu.assign(guess.begin(), guess.end());
  }
  std::vector<std::vector<Polynomial>> jac(n, std::vector<Polynomial>(n));
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t j = 0; j < n; ++j) jac[e][j] = derivative(system.rhs[e], j);
  }
  for (int it = 0; it < 200; ++it) {
    const auto f = system.evaluate(mu);
    Eigen::Map<const Eigen::VectorXd> fv(f.data(), n);
    double scale = 1.0;
    for (double v : mu) scale = std::max(scale, std::abs(v));
    if (fv.lpNorm<Eigen::Infinity>() <= 1e-12 * scale) return mu;
    Eigen::MatrixXd J(n, n);
    for (std::size_t e = 0; e < n; ++e) {
      for (std::size_t j = 0; j < n; ++j) J(e, j) = jac[e][j].evaluate(mu);
    }
    const Eigen::VectorXd dx = J.fullPivLu().solve(-fv);
    if (!dx.allFinite()) break;
    for (std::size_t i = 0; i < n; ++i) mu[i] += dx[i];
    if (dx.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) return mu;
  }
  const auto f = system.evaluate(mu);
  double worst = 0.0;
  for (double v : f) worst = std::max(worst, std::abs(v));
  if (!(worst < 1e-8)) throw NumericError("stationary moment solve did not converge");
  return mu;
}

MomentSummary summarize_moments(const MomentSystem& system, std::span<const double> mu) {
  const std::size_t m = system.species.size();
  const auto idx = tracked_map(system);
  MomentSummary s;
  s.mean.assign(m, 0.0);
  s.variance.assign(m, std::numeric_limits<double>::quiet_NaN());
  s.covariance = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < m; ++i) {
    MomentIndex a(m, 0);
    a[i] = 1;
    s.mean[i] = mu[idx.at(a)];
  }
  if (system.order >= 2) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        MomentIndex a(m, 0);
        ++a[i];
        ++a[j];
        s.covariance(i, j) = mu[idx.at(a)] - s.mean[i] * s.mean[j];
      }
      s.variance[i] = s.covariance(i, i);
    }
  }
  return s;
}

Model1Equilibrium model1_equilibrium(double tau_r, double lambda_r, double tau_p, double lambda_p) {
  if (!(tau_r > 0 && lambda_r > 0 && tau_p > 0 && lambda_p > 0)) {
    throw InvalidArgument("all rates must be positive");
  }
  Model1Equilibrium e;
  e.mean_r = tau_r / lambda_r;
  e.var_r = e.mean_r;
  e.mean_p = tau_r * tau_p / (lambda_r * lambda_p);
  e.var_p = e.mean_p * (1.0 + tau_p / (lambda_p + lambda_r));
  return e;
}

namespace {

SummaryStats finish(double mean, double var) {
  SummaryStats s;
  s.mean = mean;
  s.variance = var;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.fano = mean != 0.0 ? var / mean : nan;
  s.cv2 = mean != 0.0 ? var / (mean * mean) : nan;
  return s;
}

}  // namespace

SummaryStats summary_stats(std::span<const double> samples) {
  if (samples.empty()) throw InvalidArgument("no samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double var = samples.size() > 1 ? ss / static_cast<double>(samples.size() - 1) : 0.0;
  return finish(mean, var);
}

SummaryStats summary_stats_pmf(std::span<const double> pmf) {
  if (pmf.empty()) throw InvalidArgument("empty distribution");
  double mass = 0.0, mean = 0.0;
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    mass += pmf[x];
    mean += static_cast<double>(x) * pmf[x];
  }
  if (!(mass > 0.0)) throw InvalidArgument("distribution has no mass");
  mean /= mass;
  double var = 0.0;
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    const double d = static_cast<double>(x) - mean;
    var += d * d * pmf[x];
  }
  return finish(mean, var / mass);
}

}  // namespace cmekit
