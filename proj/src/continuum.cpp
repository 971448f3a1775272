#include "cmekit/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Eigenvalues>

#include "cmekit/error.hpp"

namespace cmekit {

namespace odeint = boost::numeric::odeint;

RateExpression differentiate_rate(const RateExpression& expr, std::size_t species_index) {
  return differentiate(expr, species_index);
}

MacroscopicModel::MacroscopicModel(const ReactionNetwork& network) : net_(network) {
  const std::size_t K = net_.reaction_count(), M = net_.species_count();
  count_rates_.reserve(K);
  gradient_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    count_rates_.push_back(count_space_rate(net_, k));
    for (std::size_t j = 0; j < M; ++j) gradient_[k].push_back(differentiate(count_rates_[k], j));
  }
}

namespace {

std::vector<double> to_counts(std::span<const double> x, double omega) {
  std::vector<double> X(x.begin(), x.end());
  for (double& v : X) v *= omega;
  return X;
}

}  // namespace

std::vector<double> MacroscopicModel::rates(std::span<const double> x) const {
  const double omega = net_.volume();
  const auto X = to_counts(x, omega);
  std::vector<double> f(count_rates_.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = count_rates_[k].evaluate(X, net_.parameter_values()) / omega;
    if (!std::isfinite(f[k])) {
      throw EvaluationError("reaction '" + net_.reaction(k).name +
                            "': macroscopic rate undefined at the current state");
    }
  }
  return f;
}

std::vector<double> MacroscopicModel::rhs(std::span<const double> x) const {
  const auto f = rates(x);
  std::vector<double> dx(species(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto& xi = net_.reaction(k).net_change;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += xi[i] * f[k];
  }
  return dx;
}

Eigen::MatrixXd MacroscopicModel::rate_jacobian(std::span<const double> x) const {
  const auto X = to_counts(x, net_.volume());
  Eigen::MatrixXd J(reactions(), species());
  for (std::size_t k = 0; k < reactions(); ++k) {
    for (std::size_t j = 0; j < species(); ++j) {
      J(k, j) = gradient_[k][j].evaluate(X, net_.parameter_values());
    }
  }
  return J;
}

std::vector<double> macroscopic_rhs(const ReactionNetwork& network, std::span<const double> x) {
  if (x.size() != network.species_count()) throw InvalidArgument("state length does not match species count");
  return MacroscopicModel(network).rhs(x);
}

namespace {

Eigen::MatrixXd stoichiometry(const ReactionNetwork& net) {
  Eigen::MatrixXd xi(net.reaction_count(), net.species_count());
  for (std::size_t k = 0; k < net.reaction_count(); ++k) {
    for (std::size_t i = 0; i < net.species_count(); ++i) xi(k, i) = net.reaction(k).net_change[i];
  }
  return xi;
}

LnaMatrices lna_from(const MacroscopicModel& mm, const Eigen::MatrixXd& xi,
                     std::span<const double> x) {
  const std::size_t M = mm.species();
  LnaMatrices out;
  out.A = xi.transpose() * mm.rate_jacobian(x);
  const auto f = mm.rates(x);
  out.B = Eigen::MatrixXd::Zero(M, M);
  for (std::size_t k = 0; k < f.size(); ++k) out.B += f[k] * xi.row(k).transpose() * xi.row(k);
  return out;
}

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw InvalidArgument("time grid is empty");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("time grid must be increasing");
  }
}

/// Integrates y' = f(y) on t_grid with dense-output dopri5.
template <class System>
std::vector<std::vector<double>> integrate(System&& sys, std::vector<double> y0,
                                           std::span<const double> t_grid,
                                           const OdeOptions& opt) {
  check_grid(t_grid);
  std::vector<std::vector<double>> out;
  out.reserve(t_grid.size());
  if (t_grid.size() == 1) {
    out.push_back(std::move(y0));
    return out;
  }
  auto wrapped = [&](const std::vector<double>& y, std::vector<double>& dy, double) {
    sys(y, dy);
    for (double v : dy) {
      if (!std::isfinite(v)) throw StiffnessError("right-hand side is not finite; integration abandoned");
    }
  };
  auto stepper = odeint::make_dense_output(opt.atol, opt.rtol,
                                           odeint::runge_kutta_dopri5<std::vector<double>>());
  const double span = t_grid.back() - t_grid.front();
  try {
    odeint::integrate_times(stepper, wrapped, y0, t_grid.begin(), t_grid.end(), span * 1e-6,
                            [&](const std::vector<double>& y, double) { out.push_back(y); },
                            odeint::max_step_checker(opt.max_steps));
  } catch (const StiffnessError&) {
    throw;
  } catch (const odeint::odeint_error& e) {
    throw StiffnessError(std::string("step size control failed: ") + e.what());
  }
  if (out.size() != t_grid.size()) throw StiffnessError("integration stopped before the final time");
  return out;
}

}  // namespace

std::vector<std::vector<double>> integrate_rhs(const OdeRhs& f, std::vector<double> y0,
                                               std::span<const double> t_grid,
                                               const OdeOptions& options) {
  return integrate(f, std::move(y0), t_grid, options);
}

std::vector<ConcentrationState> integrate_ode(const ReactionNetwork& network,
                                              const ConcentrationState& x0,
                                              std::span<const double> t_grid,
                                              const OdeOptions& options) {
  if (x0.size() != network.species_count()) throw InvalidArgument("state length does not match species count");
  const MacroscopicModel mm(network);
  return integrate(
      [&](const std::vector<double>& y, std::vector<double>& dy) { dy = mm.rhs(y); }, x0, t_grid,
      options);
}

LnaMatrices lna_matrices(const ReactionNetwork& network, std::span<const double> x) {
  if (x.size() != network.species_count()) throw InvalidArgument("state length does not match species count");
  return lna_from(MacroscopicModel(network), stoichiometry(network), x);
}

LnaState solve_lna(const ReactionNetwork& network, const ConcentrationState& x0,
                   std::span<const double> t_grid, const Eigen::MatrixXd& sigma0,
                   const OdeOptions& options) {
  const std::size_t M = network.species_count();
  if (x0.size() != M) throw InvalidArgument("state length does not match species count");
  const MacroscopicModel mm(network);
  const Eigen::MatrixXd xi = stoichiometry(network);
  std::vector<double> y0(M + M * M, 0.0);
  std::copy(x0.begin(), x0.end(), y0.begin());
  if (sigma0.size() != 0) {
    if (sigma0.rows() != static_cast<Eigen::Index>(M) || sigma0.cols() != static_cast<Eigen::Index>(M)) {
      throw InvalidArgument("initial covariance has the wrong shape");
    }
    Eigen::Map<Eigen::MatrixXd>(y0.data() + M, M, M) = sigma0;
  }
  auto sys = [&](const std::vector<double>& y, std::vector<double>& dy) {
    dy.assign(y.size(), 0.0);
    std::span<const double> x(y.data(), M);
    const auto d = mm.rhs(x);
    std::copy(d.begin(), d.end(), dy.begin());
    const LnaMatrices m = lna_from(mm, xi, x);
    Eigen::Map<const Eigen::MatrixXd> S(y.data() + M, M, M);
    Eigen::Map<Eigen::MatrixXd>(dy.data() + M, M, M) = m.A * S + S * m.A.transpose() + m.B;
  };
  const auto path = integrate(sys, y0, t_grid, options);
  LnaState out;
  out.times.assign(t_grid.begin(), t_grid.end());
  for (const auto& y : path) {
    out.mean.emplace_back(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(M));
    Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(y.data() + M, M, M);
    out.covariance.push_back(0.5 * (S + S.transpose()));
  }
  return out;
}

namespace {

bool newton(const MacroscopicModel& mm, const Eigen::MatrixXd& xi, std::vector<double>& x) {
  const std::size_t M = mm.species();
  for (int it = 0; it < 100; ++it) {
    const auto g = mm.rhs(x);
    Eigen::Map<const Eigen::VectorXd> gv(g.data(), M);
    double scale = 1.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    if (gv.lpNorm<Eigen::Infinity>() <= 1e-13 * scale) return true;
    const Eigen::MatrixXd A = xi.transpose() * mm.rate_jacobian(x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd dx = lu.solve(-gv);
    double step = 1.0;
    for (std::size_t i = 0; i < M; ++i) {
      // Keep concentrations nonnegative.
      if (x[i] + step * dx[i] < 0.0) step = std::min(step, 0.9 * x[i] / -dx[i]);
    }
    for (std::size_t i = 0; i < M; ++i) x[i] += step * dx[i];
    if (dx.lpNorm<Eigen::Infinity>() * step <= 1e-15 * scale) return true;
  }
  const auto g = mm.rhs(x);
  double worst = 0.0;
  for (double v : g) worst = std::max(worst, std::abs(v));
  return worst <= 1e-9;
}

}  // namespace

LnaStationary solve_lna_stationary(const ReactionNetwork& network, const ConcentrationState& guess) {
  const std::size_t M = network.species_count();
  if (guess.size() != M) throw InvalidArgument("state length does not match species count");
  const MacroscopicModel mm(network);
  const Eigen::MatrixXd xi = stoichiometry(network);
  std::vector<double> x = guess;
  if (!newton(mm, xi, x)) {
    // Relax along the flow first, then polish.
    x = guess;
    const double grid[] = {0.0, 1e4};
    x = integrate_ode(network, x, grid).back();
    if (!newton(mm, xi, x)) throw NumericError("no fixed point of the macroscopic equation found");
  }
  const LnaMatrices m = lna_from(mm, xi, x);
  Eigen::EigenSolver<Eigen::MatrixXd> es(m.A, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (!(es.eigenvalues()[i].real() < 0.0)) {
      throw NumericError("fixed point is not asymptotically stable; no stationary covariance");
    }
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M * M, M * M);
  // vec(AΣ) = (I⊗A)vec(Σ), vec(ΣAᵀ) = (A⊗I)vec(Σ), column-major.
  for (std::size_t a = 0; a < M; ++a) {
    for (std::size_t b = 0; b < M; ++b) {
      L.block(a * M, b * M, M, M) += I(a, b) * m.A;
      L.block(a * M, b * M, M, M) += m.A(a, b) * I;
    }
  }
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(m.B.data(), M * M);
  Eigen::VectorXd s = L.fullPivLu().solve(rhs);
  Eigen::MatrixXd S = Eigen::Map<Eigen::MatrixXd>(s.data(), M, M);
  LnaStationary out;
  out.mean = x;
  out.covariance = 0.5 * (S + S.transpose());
  return out;
}

RealTrajectory simulate_cle(const ReactionNetwork& net, const std::vector<double>& x0,
                            double t_end, double dt, RngStream& rng, const CleOptions& opt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
  const std::size_t M = net.species_count(), K = net.reaction_count();
  if (x0.size() != M) throw InvalidArgument("state length does not match species count");
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  RealTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  std::vector<double> x = x0, xpos(M), a(K);
  std::normal_distribution<double> normal(0.0, 1.0);
  double t = 0.0;
  std::size_t step = 0;
  while (t < t_end) {
    const double h = std::min(dt, t_end - t);
    for (std::size_t i = 0; i < M; ++i) xpos[i] = std::max(0.0, x[i]);
    for (std::size_t k = 0; k < K; ++k) {
      const double v = propensity_at(net, xpos, k);
      if (!std::isfinite(v)) {
        throw EvaluationError("reaction '" + net.reaction(k).name + "': propensity undefined");
      }
      a[k] = std::max(0.0, v);
    }
    const double sq = std::sqrt(h);
    for (std::size_t k = 0; k < K; ++k) {
      const double dw = normal(rng) * sq;
      const double incr = a[k] * h + opt.noise_scale * std::sqrt(a[k]) * dw;
      const auto& xi = net.reaction(k).net_change;
      for (std::size_t i = 0; i < M; ++i) x[i] += xi[i] * incr;
    }
    t = h < dt ? t_end : t + h;
    ++step;
    if (step % stride == 0 || t >= t_end) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

}  // namespace cmekit
