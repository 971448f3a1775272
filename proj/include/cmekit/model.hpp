#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmekit/expression.hpp"
#include "cmekit/polynomial.hpp"

namespace cmekit {

using Count = std::int64_t;

/// Copy numbers, one entry per species, in network species order.
using SystemState = std::vector<Count>;

struct Species {
  std::string name;
  std::size_t index = 0;
  bool operator==(const Species&) const = default;
};

struct Parameter {
  std::string name;
  double value = 0.0;
  bool operator==(const Parameter&) const = default;
};

/// How mass-action propensities count reactant combinations:
/// power gives τ·∏X^b, factorial gives τ·∏X!/(X-b)!.
enum class Convention { power, factorial };

struct Reaction {
  std::string name;
  std::vector<int> reactants;   // b
  std::vector<int> products;    // c
  std::vector<int> net_change;  // ξ = c - b
  RateExpression rate;

  /// Σ b_i.
  int order() const;
  bool operator==(const Reaction& o) const;
};

/// Builds a reaction and fills in its net change. Throws ModelError when both
/// sides are empty, sizes disagree, or a coefficient is negative.
Reaction make_reaction(std::string name, std::vector<int> reactants, std::vector<int> products,
                       RateExpression rate);

/// A CME system definition. Immutable once built; `with_*` methods return
/// modified copies.
///
/// Volume semantics: mass_action constants are the microscopic (count-space)
/// constants and are used as stored. Expression rates are read as macroscopic
/// rate laws F(x) in concentrations, so the count-space propensity is
/// Ω·F(X/Ω). At Ω = 1 both readings coincide.
class ReactionNetwork {
 public:
  ReactionNetwork() = default;
  ReactionNetwork(std::vector<std::string> species, std::vector<Parameter> parameters,
                  std::vector<Reaction> reactions, double volume = 1.0,
                  Convention convention = Convention::power);

  std::size_t species_count() const noexcept { return species_.size(); }
  std::size_t reaction_count() const noexcept { return reactions_.size(); }
  const std::vector<Species>& species() const noexcept { return species_; }
  const std::vector<Parameter>& parameters() const noexcept { return parameters_; }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
  const Reaction& reaction(std::size_t k) const { return reactions_.at(k); }
  std::span<const double> parameter_values() const noexcept { return values_; }
  double volume() const noexcept { return volume_; }
  Convention convention() const noexcept { return convention_; }

  std::optional<std::size_t> species_index(std::string_view name) const;
  std::optional<std::size_t> parameter_index(std::string_view name) const;
  double parameter(std::string_view name) const;

  /// Species whose counts the propensity of reaction k reads.
  const std::vector<std::size_t>& species_read(std::size_t k) const { return reads_.at(k); }

  ReactionNetwork with_parameter(std::string_view name, double value) const;
  ReactionNetwork with_volume(double volume) const;

  bool operator==(const ReactionNetwork& o) const;

 private:
  struct MassActionCache {
    bool active = false;
    bool coefficient_is_parameter = false;
    std::size_t parameter = 0;
    double constant = 0.0;
    std::vector<std::pair<std::size_t, int>> reactants;
  };

  void rebuild_caches();

  std::vector<Species> species_;
  std::vector<Parameter> parameters_;
  std::vector<Reaction> reactions_;
  std::vector<double> values_;
  double volume_ = 1.0;
  Convention convention_ = Convention::power;
  std::vector<std::vector<std::size_t>> reads_;
  std::vector<MassActionCache> mass_action_;

  friend double evaluate_propensity(const ReactionNetwork&, std::span<const Count>, std::size_t);
  friend double propensity_at(const ReactionNetwork&, std::span<const double>, std::size_t);
};

/// a_k(X). Throws EvaluationError (naming the reaction) for undefined values
/// and ModelError for negative results.
double evaluate_propensity(const ReactionNetwork& network, std::span<const Count> state,
                           std::size_t reaction_index);

/// Fills `out` (size K) with every propensity and returns their sum.
double evaluate_propensities(const ReactionNetwork& network, std::span<const Count> state,
                             std::span<double> out);

/// a_k at a real-valued count vector (continuum and midpoint leaping). The
/// same formula as evaluate_propensity; factorial products are clamped at 0.
/// No sign check is applied.
double propensity_at(const ReactionNetwork& network, std::span<const double> counts,
                     std::size_t reaction_index);

/// Returns state + ξ; throws NegativePopulationError if an entry would drop
/// below zero.
SystemState apply_reaction(std::span<const Count> state, const Reaction& reaction);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Structural and thermodynamic checks. Never throws for model defects; they
/// are reported.
ValidationReport validate_network(const ReactionNetwork& network);

/// Count-space propensity of reaction k as an explicit expression tree (mass
/// action expanded, volume substitution applied). Used for symbolic
/// differentiation.
RateExpression count_space_rate(const ReactionNetwork& network, std::size_t reaction_index);

/// Count-space propensity of reaction k as a rational function of the counts.
RationalForm propensity_rational(const ReactionNetwork& network, std::size_t reaction_index);

/// Rational form of a bare expression (parameters substituted, species as
/// variables, no volume handling). mass_action nodes are rejected.
RationalForm to_rational(const RateExpression& expr, std::span<const double> params,
                         std::size_t species_count);

/// Rate constants of the repressor motif (dimerisation, dimer-promoter
/// binding, promoter switching).
struct QssaMotifParams {
  double k_on = 0.0;
  double k_off = 0.0;
  double k1 = 0.0;
  double k_m1 = 0.0;
  double k2 = 0.0;
  double k_m2 = 0.0;
};

/// Coefficients of the reduced activity F(X) = b0 / (1 + c1·X²) obtained by
/// putting the dimer and gene states at quasi-equilibrium.
struct MotifReduction {
  double b0 = 0.0;
  double c1 = 0.0;
  double activity(double repressor) const { return b0 / (1.0 + c1 * repressor * repressor); }
};

MotifReduction reduce_two_state_motif(const QssaMotifParams& p);

/// Rescales every mass-action constant by (Ω_new/Ω_old)^{1-Σb} and records
/// the new volume. Under the power convention a(Ω·x) = Ω·a_1(x) holds exactly
/// for a network at Ω_old = 1. Expression rates are rejected.
ReactionNetwork scale_to_volume(const ReactionNetwork& network, double volume);

/// Conjunction of threshold tests on species counts.
struct StatePredicate {
  enum class Op { ge, gt, le, lt, eq };
  struct Clause {
    std::size_t species = 0;
    Op op = Op::ge;
    Count threshold = 0;
  };
  std::vector<Clause> clauses;

  bool operator()(std::span<const Count> state) const;
};

/// Parses "X>=25", "A>3 && B<=2" against the network's species names.
StatePredicate parse_predicate(const ReactionNetwork& network, std::string_view text);

}  // namespace cmekit
