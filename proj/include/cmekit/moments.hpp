#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cmekit/continuum.hpp"
#include "cmekit/fsp.hpp"
#include "cmekit/model.hpp"
#include "cmekit/polynomial.hpp"

namespace cmekit {

/// Multi-index α over species; order = Σα.
using MomentIndex = Monomial;

int moment_order(const MomentIndex& a);

enum class Closure { none, normal };

/// dμ/dt for every tracked raw moment E[X^α], 1 ≤ |α| ≤ n.
///
/// `raw[e]` is the right-hand side of equation e as a linear combination of
/// raw moments (order 0 is the constant 1). Terms of order ≤ n form C_n; the
/// rest form C*_n and are listed in `higher`. After close_normal, `rhs[e]` is
/// a polynomial in the tracked moments (variable i = tracked[i]); it is also
/// filled for systems that need no closure.
struct MomentSystem {
  std::vector<std::string> species;
  int order = 0;
  std::vector<MomentIndex> tracked;
  std::vector<std::map<MomentIndex, double>> raw;
  std::vector<MomentIndex> higher;
  Closure closure = Closure::none;
  std::vector<Polynomial> rhs;

  bool self_contained() const { return higher.empty() || closure != Closure::none; }
  std::size_t size() const { return tracked.size(); }
  /// Column names such as E[R], E[R*P], E[P^2].
  std::vector<std::string> names() const;
  std::vector<double> evaluate(std::span<const double> mu) const;
};

std::string moment_name(const std::vector<std::string>& species, const MomentIndex& a);

/// Builds the moment equations up to order n. Rational propensities raise
/// UnsupportedError.
MomentSystem moment_odes(const ReactionNetwork& network, int order);

/// Replaces every moment above the tracked order by its value under zero
/// cumulants of order > n. Excess degree above 2 raises UnsupportedError.
MomentSystem close_normal(const MomentSystem& system);

/// E[X^α] for |α| ≤ n+2 as a polynomial in the tracked moments, assuming all
/// cumulants of order > n vanish.
Polynomial normal_closure_polynomial(const MomentSystem& system, const MomentIndex& alpha);

/// Moments of a point mass at x0, in tracked order.
std::vector<double> point_moments(const MomentSystem& system, const SystemState& x0);

std::vector<std::vector<double>> integrate_moments(const MomentSystem& system,
                                                   std::span<const double> init,
                                                   std::span<const double> t_grid,
                                                   const OdeOptions& options = {});

/// Solves rhs(μ) = 0. Affine systems are solved directly; otherwise Newton's
/// method from `guess` (the moments reached by integrating from a point mass at
/// the origin when empty).
std::vector<double> stationary_moments(const MomentSystem& system,
                                       std::span<const double> guess = {});

/// Per-species mean and variance pulled out of a tracked moment vector.
struct MomentSummary {
  std::vector<double> mean;
  std::vector<double> variance;
  Eigen::MatrixXd covariance;
};
MomentSummary summarize_moments(const MomentSystem& system, std::span<const double> mu);

struct Model1Equilibrium {
  double mean_r, var_r, mean_p, var_p;
};
Model1Equilibrium model1_equilibrium(double tau_r, double lambda_r, double tau_p, double lambda_p);

struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;
  double fano = 0.0;  // NaN when mean is 0
  double cv2 = 0.0;   // NaN when mean is 0
};

/// Sample statistics with the unbiased variance.
SummaryStats summary_stats(std::span<const double> samples);
/// Exact statistics of a pmf indexed by count.
SummaryStats summary_stats_pmf(std::span<const double> pmf);

}  // namespace cmekit
