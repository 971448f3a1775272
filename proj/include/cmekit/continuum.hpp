#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cmekit/model.hpp"
#include "cmekit/rng.hpp"

namespace cmekit {

/// Concentrations x = X/Ω; equal to counts when Ω = 1.
using ConcentrationState = std::vector<double>;

RateExpression differentiate_rate(const RateExpression& expr, std::size_t species_index);

/// Macroscopic propensity f_k(x) = a_k(Ωx)/Ω and its gradient, built once from
/// symbolic derivatives of the count-space rates.
class MacroscopicModel {
 public:
  explicit MacroscopicModel(const ReactionNetwork& network);

  const ReactionNetwork& network() const { return net_; }
  std::size_t species() const { return net_.species_count(); }
  std::size_t reactions() const { return net_.reaction_count(); }

  /// f_k(x) for every k. Throws EvaluationError on non-finite values.
  std::vector<double> rates(std::span<const double> x) const;
  /// Σ_k ξ_k f_k(x).
  std::vector<double> rhs(std::span<const double> x) const;
  /// ∂f_k/∂x_j as a K × M matrix.
  Eigen::MatrixXd rate_jacobian(std::span<const double> x) const;

 private:
  ReactionNetwork net_;
  std::vector<RateExpression> count_rates_;
  std::vector<std::vector<RateExpression>> gradient_;  // [k][j]
};

std::vector<double> macroscopic_rhs(const ReactionNetwork& network, std::span<const double> x);

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  std::size_t max_steps = 5'000'000;
};

using OdeRhs = std::function<void(const std::vector<double>& y, std::vector<double>& dy)>;

/// Generic autonomous system y' = f(y) on t_grid with the same integrator and
/// error mapping as integrate_ode. Returns one state per grid point.
std::vector<std::vector<double>> integrate_rhs(const OdeRhs& f, std::vector<double> y0,
                                               std::span<const double> t_grid,
                                               const OdeOptions& options = {});

/// Dormand–Prince 5(4) with dense output, sampled at t_grid (increasing,
/// t_grid[0] is the initial time). Throws StiffnessError when the step size
/// collapses or the right-hand side stops being finite.
std::vector<ConcentrationState> integrate_ode(const ReactionNetwork& network,
                                              const ConcentrationState& x0,
                                              std::span<const double> t_grid,
                                              const OdeOptions& options = {});

struct LnaMatrices {
  Eigen::MatrixXd A;  // Σ_k ξ_ki ∂f_k/∂x_j
  Eigen::MatrixXd B;  // Σ_k ξ_ki ξ_kj f_k
};

LnaMatrices lna_matrices(const ReactionNetwork& network, std::span<const double> x);

/// Mean path and fluctuation covariance Σ. In counts, E[X] ≈ Ωx and
/// Cov(X) ≈ ΩΣ.
struct LnaState {
  std::vector<double> times;
  std::vector<ConcentrationState> mean;
  std::vector<Eigen::MatrixXd> covariance;
};

/// Integrates dx/dt = Σξf and dΣ/dt = AΣ + ΣAᵀ + B together. Σ(t_grid[0]) is
/// `sigma0` (zero when empty).
LnaState solve_lna(const ReactionNetwork& network, const ConcentrationState& x0,
                   std::span<const double> t_grid, const Eigen::MatrixXd& sigma0 = {},
                   const OdeOptions& options = {});

struct LnaStationary {
  ConcentrationState mean;
  Eigen::MatrixXd covariance;
};

/// Fixed point of the macroscopic equation found by Newton's method from
/// `guess`, then the Lyapunov equation AΣ + ΣAᵀ + B = 0 solved directly.
/// Throws NumericError if Newton fails or the fixed point is not stable.
LnaStationary solve_lna_stationary(const ReactionNetwork& network, const ConcentrationState& guess);

struct RealTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

struct CleOptions {
  std::size_t stride = 1;     // record every stride-th step
  double noise_scale = 1.0;   // 0 turns the diffusion term off
};

/// Euler–Maruyama on dX = Σξ_k a_k dt + Σξ_k √a_k dW_k in counts. Propensities
/// are evaluated at the nonnegative part of X and clamped at 0. The last step
/// is shortened so the path ends exactly at t_end.
RealTrajectory simulate_cle(const ReactionNetwork& network, const std::vector<double>& x0,
                            double t_end, double dt, RngStream& rng,
                            const CleOptions& options = {});

}  // namespace cmekit
