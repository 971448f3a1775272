#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmekit/model.hpp"
#include "cmekit/netparse.hpp"

namespace cmekit {

/// Snapshot count data: for each time point, one count vector per cell over
/// the observed species (network indices in `species`).
struct Dataset {
  std::vector<std::size_t> species;
  std::vector<double> times;                        // ignored when steady_state
  std::vector<std::vector<SystemState>> observations;
  bool steady_state = false;

  std::size_t cells() const;
  /// Counts of observed species `col` at time point `t`.
  std::vector<Count> column(std::size_t t, std::size_t col) const;
};

/// Free parameters and their search boxes. Parameters not listed keep the
/// template's values.
struct ParameterSpec {
  std::vector<std::string> names;
  std::vector<double> low;
  std::vector<double> high;

  std::size_t size() const { return names.size(); }
  /// Throws InvalidArgument for unknown names or empty boxes.
  void check(const ReactionNetwork& network) const;
  ReactionNetwork apply(const ReactionNetwork& network, std::span<const double> theta) const;
};

/// Parses "tau_R=0.2:5,lam_R=0.05:0.5".
ParameterSpec parse_parameter_spec(std::string_view text);

/// 1-D distribution over counts 0, 1, 2, ...
using Pmf = std::vector<double>;

Pmf empirical_pmf(std::span<const Count> samples);

/// sup_k |F_a(k) − F_b(k)| for two pmfs (normalised internally).
double kolmogorov_distance(std::span<const double> a, std::span<const double> b);
double kolmogorov_distance(std::span<const Count> a, std::span<const Count> b);

struct TracePoint {
  std::vector<double> theta;
  double objective = 0.0;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimate;
  double objective = 0.0;
  /// Largest Kolmogorov distance between data and model marginals at the
  /// estimate (FSP fits) or the weighted residual norm (moment matching).
  double mismatch = 0.0;
  std::vector<TracePoint> trace;  // best point after each simplex iteration
  bool underdetermined = false;
  std::vector<std::string> warnings;
  std::vector<double> residuals;  // moment matching: model − observed, per target
};

enum class FspObjective { negative_log_likelihood, l1 };

struct FitConfig {
  FspObjective objective = FspObjective::negative_log_likelihood;
  std::size_t restarts = 5;
  std::size_t max_iterations = 400;
  double simplex_tol = 1e-8;
  double fsp_eps = 1e-6;
  std::size_t state_cap = 1'000'000;
};

/// Maximum-likelihood (or L1) fit of FSP distributions to snapshot data,
/// minimised with Nelder–Mead from quasi-random interior starts.
FitResult fit_fsp_mle(const ModelDocument& model, const ParameterSpec& spec, const Dataset& data,
                      const FitConfig& config = {});

/// Model distribution used by the FSP fit: per time point, the marginal pmf of
/// each observed species. Steady-state data use the stationary solution.
std::vector<std::vector<Pmf>> model_marginals(const ModelDocument& model, const Dataset& data,
                                              double eps, std::size_t state_cap);

struct AbcConfig {
  double epsilon = 0.05;
  std::size_t particles = 1000;
  std::size_t cells = 2000;  // simulated cells per particle
  std::uint64_t seed = 1;
  std::optional<double> horizon;  // default 10 / smallest degradation rate
  unsigned workers = 1;
};

struct AbcResult {
  std::vector<std::string> names;
  std::vector<std::vector<double>> particles;  // every proposal, index order
  std::vector<double> distances;
  std::vector<char> accepted;
  double acceptance_rate = 0.0;
  double min_distance = 0.0;
  std::vector<std::string> warnings;

  std::vector<std::vector<double>> posterior() const;
};

/// Rejection ABC on steady-state data. Particle i uses RngStream(seed, i) for
/// its prior draw and all of its simulated cells. Accepts when d ≤ ε.
AbcResult abc_rejection(const ModelDocument& model, const ParameterSpec& spec, const Dataset& data,
                        const AbcConfig& config);

/// Relaxation horizon 10 / min rate over first-order degradation reactions
/// (one reactant, no products).
double default_relaxation_horizon(const ReactionNetwork& network);

struct MomentTarget {
  std::size_t species = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_weight = 1.0;
  double variance_weight = 1.0;
};

/// Weighted relative least squares between observed and stationary model
/// moments (order-2 system, normal closure when needed).
FitResult moment_match(const ReactionNetwork& network, const ParameterSpec& spec,
                       std::span<const MomentTarget> targets, const FitConfig& config = {});

struct GammaBurst {
  double a = 0.0;  // burst frequency ≈ τ_R/λ_P
  double b = 0.0;  // burst size ≈ τ_P/λ_R
};

/// Method of moments with the unbiased sample variance. Needs n ≥ 10 and a
/// positive variance.
GammaBurst fit_gamma_burst(std::span<const double> samples);

}  // namespace cmekit
