#include "cmekit/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cmekit/error.hpp"

namespace cmekit {

int Reaction::order() const {
  int s = 0;
  for (int b : reactants) s += b;
  return s;
}

bool Reaction::operator==(const Reaction& o) const {
  return name == o.name && reactants == o.reactants && products == o.products &&
         net_change == o.net_change && rate == o.rate;
}

Reaction make_reaction(std::string name, std::vector<int> reactants, std::vector<int> products,
                       RateExpression rate) {
  if (reactants.size() != products.size()) {
    throw ModelError("reaction '" + name + "': reactant and product vectors differ in length");
  }
  bool any = false;
  for (std::size_t i = 0; i < reactants.size(); ++i) {
    if (reactants[i] < 0 || products[i] < 0) {
      throw ModelError("reaction '" + name + "': negative stoichiometric coefficient");
    }
    any = any || reactants[i] != 0 || products[i] != 0;
  }
  if (!any) throw ModelError("reaction '" + name + "': both sides are empty");
  Reaction r;
  r.name = std::move(name);
  r.net_change.resize(reactants.size());
  for (std::size_t i = 0; i < reactants.size(); ++i) r.net_change[i] = products[i] - reactants[i];
  r.reactants = std::move(reactants);
  r.products = std::move(products);
  r.rate = std::move(rate);
  return r;
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species,
                                 std::vector<Parameter> parameters,
                                 std::vector<Reaction> reactions, double volume,
                                 Convention convention)
    : parameters_(std::move(parameters)),
      reactions_(std::move(reactions)),
      volume_(volume),
      convention_(convention) {
  species_.reserve(species.size());
  for (std::size_t i = 0; i < species.size(); ++i) species_.push_back({std::move(species[i]), i});
  for (const auto& r : reactions_) {
    if (r.reactants.size() != species_.size() || r.products.size() != species_.size() ||
        r.net_change.size() != species_.size()) {
      throw ModelError("reaction '" + r.name + "': stoichiometry length does not match species count");
    }
  }
  rebuild_caches();
}

void ReactionNetwork::rebuild_caches() {
  values_.clear();
  for (const auto& p : parameters_) values_.push_back(p.value);
  reads_.assign(reactions_.size(), {});
  mass_action_.assign(reactions_.size(), {});
  for (std::size_t k = 0; k < reactions_.size(); ++k) {
    const auto& r = reactions_[k];
    if (r.rate.is_mass_action()) {
      auto& c = mass_action_[k];
      c.active = true;
      const auto& coef = r.rate.coefficient();
      if (coef.kind() == ExprKind::parameter) {
        c.coefficient_is_parameter = true;
        c.parameter = coef.index();
      } else {
        c.constant = coef.value();
      }
      for (std::size_t i = 0; i < r.reactants.size(); ++i) {
        if (r.reactants[i] > 0) {
          c.reactants.emplace_back(i, r.reactants[i]);
          reads_[k].push_back(i);
        }
      }
    } else {
      reads_[k] = r.rate.species_read();
    }
  }
}

std::optional<std::size_t> ReactionNetwork::species_index(std::string_view name) const {
  for (const auto& s : species_) {
    if (s.name == name) return s.index;
  }
  return std::nullopt;
}

std::optional<std::size_t> ReactionNetwork::parameter_index(std::string_view name) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    if (parameters_[i].name == name) return i;
  }
  return std::nullopt;
}

double ReactionNetwork::parameter(std::string_view name) const {
  auto i = parameter_index(name);
  if (!i) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
  return parameters_[*i].value;
}

ReactionNetwork ReactionNetwork::with_parameter(std::string_view name, double value) const {
  auto i = parameter_index(name);
  if (!i) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
  ReactionNetwork copy = *this;
  copy.parameters_[*i].value = value;
  copy.values_[*i] = value;
  return copy;
}

ReactionNetwork ReactionNetwork::with_volume(double volume) const {
  if (!(volume > 0.0) || !std::isfinite(volume)) throw InvalidArgument("volume must be positive");
  ReactionNetwork copy = *this;
  copy.volume_ = volume;
  return copy;
}

bool ReactionNetwork::operator==(const ReactionNetwork& o) const {
  return species_ == o.species_ && parameters_ == o.parameters_ && reactions_ == o.reactions_ &&
         volume_ == o.volume_ && convention_ == o.convention_;
}

namespace {

std::string describe_state(std::span<const Count> state) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < state.size(); ++i) os << (i ? "," : "") << state[i];
  os << ')';
  return os.str();
}

}  // namespace

double evaluate_propensity(const ReactionNetwork& network, std::span<const Count> state,
                           std::size_t k) {
  const auto& cache = network.mass_action_[k];
  double a;
  if (cache.active) {
    a = cache.coefficient_is_parameter ? network.values_[cache.parameter] : cache.constant;
    const bool power = network.convention_ == Convention::power;
    for (const auto& [i, b] : cache.reactants) {
      const double x = static_cast<double>(state[i]);
      if (power) {
        for (int j = 0; j < b; ++j) a *= x;
      } else {
        for (int j = 0; j < b; ++j) a *= (x - j);
      }
    }
  } else {
    thread_local std::vector<double> scaled;
    scaled.resize(state.size());
    const double omega = network.volume_;
    for (std::size_t i = 0; i < state.size(); ++i) scaled[i] = static_cast<double>(state[i]) / omega;
    a = omega * network.reactions_[k].rate.evaluate(scaled, network.values_);
  }
  if (!std::isfinite(a)) {
    throw EvaluationError("reaction '" + network.reactions_[k].name +
                          "': propensity undefined at state " + describe_state(state));
  }
  if (a < 0.0) {
    throw ModelError("reaction '" + network.reactions_[k].name +
                     "': negative propensity at state " + describe_state(state));
  }
  return a;
}

double evaluate_propensities(const ReactionNetwork& network, std::span<const Count> state,
                             std::span<double> out) {
  double total = 0.0;
  for (std::size_t k = 0; k < network.reaction_count(); ++k) {
    out[k] = evaluate_propensity(network, state, k);
    total += out[k];
  }
  return total;
}

double propensity_at(const ReactionNetwork& network, std::span<const double> counts,
                     std::size_t k) {
  const auto& cache = network.mass_action_[k];
  if (cache.active) {
    double a = cache.coefficient_is_parameter ? network.values_[cache.parameter] : cache.constant;
    const bool power = network.convention_ == Convention::power;
    for (const auto& [i, b] : cache.reactants) {
      const double x = counts[i];
      for (int j = 0; j < b; ++j) a *= power ? x : std::max(x - j, 0.0);
    }
    return a;
  }
  thread_local std::vector<double> scaled;
  scaled.resize(counts.size());
  const double omega = network.volume_;
  for (std::size_t i = 0; i < counts.size(); ++i) scaled[i] = counts[i] / omega;
  const double a = omega * network.reactions_[k].rate.evaluate(scaled, network.values_);
  if (!std::isfinite(a)) {
    throw EvaluationError("reaction '" + network.reactions_[k].name + "': propensity undefined");
  }
  return a;
}

SystemState apply_reaction(std::span<const Count> state, const Reaction& reaction) {
  if (state.size() != reaction.net_change.size()) {
    throw InvalidArgument("state length does not match reaction");
  }
  SystemState out(state.begin(), state.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += reaction.net_change[i];
    if (out[i] < 0) {
      throw NegativePopulationError("reaction '" + reaction.name + "' drives species " +
                                    std::to_string(i) + " negative from state " +
                                    describe_state(state));
    }
  }
  return out;
}

RationalForm to_rational(const RateExpression& expr, std::span<const double> params,
                         std::size_t n) {
  const Polynomial one = Polynomial::constant(n, 1.0);
  RationalForm out;
  switch (expr.kind()) {
    case ExprKind::constant:
      return {Polynomial::constant(n, expr.value()), one};
    case ExprKind::parameter:
      if (expr.index() >= params.size()) throw ModelError("unknown parameter '" + expr.name() + "'");
      return {Polynomial::constant(n, params[expr.index()]), one};
    case ExprKind::species:
      if (expr.index() >= n) throw ModelError("unknown species '" + expr.name() + "'");
      return {Polynomial::variable(n, expr.index()), one};
    case ExprKind::mass_action:
      throw UnsupportedError("mass_action has no standalone rational form");
    default:
      break;
  }
  RationalForm a = to_rational(expr.lhs(), params, n);
  RationalForm b = to_rational(expr.rhs(), params, n);
  switch (expr.kind()) {
    case ExprKind::add:
      if (a.is_polynomial() && b.is_polynomial()) {
        out = {a.numerator + b.numerator, one};
      } else {
        out = {a.numerator * b.denominator + b.numerator * a.denominator,
               a.denominator * b.denominator};
      }
      break;
    case ExprKind::subtract:
      if (a.is_polynomial() && b.is_polynomial()) {
        out = {a.numerator - b.numerator, one};
      } else {
        out = {a.numerator * b.denominator - b.numerator * a.denominator,
               a.denominator * b.denominator};
      }
      break;
    case ExprKind::multiply:
      out = {a.numerator * b.numerator, a.denominator * b.denominator};
      break;
    default:  // divide
      out = {a.numerator * b.denominator, a.denominator * b.numerator};
      break;
  }
  if (out.denominator.is_zero()) throw ModelError("division by zero in rate expression");
  if (out.denominator.is_constant()) {
    const double c = out.denominator.constant_term();
    out.numerator *= 1.0 / c;
    out.denominator = one;
  } else {
    bool all_nonpositive = true;
    for (const auto& [m, c] : out.denominator.terms()) all_nonpositive = all_nonpositive && c <= 0;
    if (all_nonpositive) {
      out.numerator *= -1.0;
      out.denominator *= -1.0;
    }
  }
  return out;
}

RationalForm propensity_rational(const ReactionNetwork& network, std::size_t k) {
  const auto& r = network.reaction(k);
  const std::size_t n = network.species_count();
  if (r.rate.is_mass_action()) {
    const auto& coef = r.rate.coefficient();
    const double tau = coef.kind() == ExprKind::parameter
                           ? network.parameter_values()[coef.index()]
                           : coef.value();
    Polynomial p = Polynomial::constant(n, tau);
    for (std::size_t i = 0; i < n; ++i) {
      if (r.reactants[i] == 0) continue;
      if (network.convention() == Convention::power) {
        Monomial m(n, 0);
        m[i] = r.reactants[i];
        Polynomial x(n);
        x.add_term(m, 1.0);
        p = p * x;
      } else {
        p = p * falling_factorial(n, i, r.reactants[i]);
      }
    }
    return {p, Polynomial::constant(n, 1.0)};
  }
  RationalForm f = to_rational(r.rate, network.parameter_values(), n);
  const double omega = network.volume();
  if (omega == 1.0) return f;
  // a(X) = Ω·N(X/Ω) / D(X/Ω)
  Polynomial num = f.numerator.scaled_by_degree(1.0 / omega) * omega;
  Polynomial den = f.denominator.scaled_by_degree(1.0 / omega);
  return {num, den};
}

namespace {

RateExpression substitute_species(const RateExpression& e, double omega) {
  switch (e.kind()) {
    case ExprKind::species:
      return e / RateExpression::constant(omega);
    case ExprKind::constant:
    case ExprKind::parameter:
      return e;
    case ExprKind::mass_action:
      throw UnsupportedError("nested mass_action");
    default:
      return RateExpression::binary(e.kind(), substitute_species(e.lhs(), omega),
                                    substitute_species(e.rhs(), omega));
  }
}

}  // namespace

RateExpression count_space_rate(const ReactionNetwork& network, std::size_t k) {
  const auto& r = network.reaction(k);
  if (r.rate.is_mass_action()) {
    RateExpression out = r.rate.coefficient();
    for (std::size_t i = 0; i < network.species_count(); ++i) {
      const auto x = RateExpression::species(network.species()[i].name, i);
      for (int j = 0; j < r.reactants[i]; ++j) {
        if (network.convention() == Convention::factorial && j > 0) {
          out = out * (x - RateExpression::constant(j));
        } else {
          out = out * x;
        }
      }
    }
    return out;
  }
  const double omega = network.volume();
  if (omega == 1.0) return r.rate;
  return RateExpression::constant(omega) * substitute_species(r.rate, omega);
}

namespace {

void check_references(const RateExpression& e, const ReactionNetwork& net,
                      const std::string& where, bool top, ValidationReport& rep) {
  switch (e.kind()) {
    case ExprKind::constant:
      if (!std::isfinite(e.value())) rep.errors.push_back(where + ": non-finite constant");
      return;
    case ExprKind::parameter: {
      auto idx = net.parameter_index(e.name());
      if (!idx || *idx != e.index()) {
        rep.errors.push_back(where + ": unknown parameter '" + e.name() + "'");
      }
      return;
    }
    case ExprKind::species: {
      if (e.index() >= net.species_count() || net.species()[e.index()].name != e.name()) {
        rep.errors.push_back(where + ": unknown species '" + e.name() + "'");
      }
      return;
    }
    case ExprKind::mass_action:
      if (!top) rep.errors.push_back(where + ": mass_action must be the whole rate");
      check_references(e.coefficient(), net, where, false, rep);
      return;
    default:
      check_references(e.lhs(), net, where, false, rep);
      check_references(e.rhs(), net, where, false, rep);
  }
}

std::string monomial_text(const ReactionNetwork& net, const Monomial& m) {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!s.empty()) s += "*";
    s += net.species()[i].name;
    if (m[i] > 1) s += "^" + std::to_string(m[i]);
  }
  return s.empty() ? "1" : s;
}

}  // namespace

ValidationReport validate_network(const ReactionNetwork& network) {
  ValidationReport rep;
  std::set<std::string> names;
  for (const auto& s : network.species()) {
    if (s.name.empty()) rep.errors.push_back("species with empty name");
    if (!names.insert(s.name).second) rep.errors.push_back("duplicate name '" + s.name + "'");
  }
  for (const auto& p : network.parameters()) {
    if (!names.insert(p.name).second) rep.errors.push_back("duplicate name '" + p.name + "'");
    if (!(p.value > 0.0) || !std::isfinite(p.value)) {
      rep.errors.push_back("parameter '" + p.name + "' must be a positive finite number");
    }
  }
  if (!(network.volume() > 0.0) || !std::isfinite(network.volume())) {
    rep.errors.push_back("volume must be positive");
  }
  const std::size_t n = network.species_count();
  for (std::size_t k = 0; k < network.reaction_count(); ++k) {
    const auto& r = network.reaction(k);
    const std::string where =
        "reaction " + (r.name.empty() ? "#" + std::to_string(k + 1) : "'" + r.name + "'");
    if (r.reactants.size() != n || r.products.size() != n || r.net_change.size() != n) {
      rep.errors.push_back(where + ": stoichiometry length does not match species count");
      continue;
    }
    bool any = false;
    bool bad = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (r.reactants[i] < 0 || r.products[i] < 0) bad = true;
      if (r.net_change[i] != r.products[i] - r.reactants[i]) bad = true;
      any = any || r.reactants[i] != 0 || r.products[i] != 0;
    }
    if (bad) rep.errors.push_back(where + ": malformed stoichiometry");
    if (!any) rep.errors.push_back(where + ": both sides empty");

    const std::size_t before = rep.errors.size();
    check_references(r.rate, network, where, true, rep);
    if (rep.errors.size() != before || r.rate.is_mass_action()) continue;

    RationalForm f;
    try {
      f = to_rational(r.rate, network.parameter_values(), n);
    } catch (const Error& e) {
      rep.errors.push_back(where + ": " + e.what());
      continue;
    }
    if (!f.is_polynomial()) {
      bool nonneg = true;
      for (const auto& [m, c] : f.denominator.terms()) nonneg = nonneg && c >= 0.0;
      if (!(f.denominator.constant_term() > 0.0) || !nonneg) {
        rep.errors.push_back(where +
                             ": denominator must have a positive constant term and "
                             "nonnegative coefficients");
        continue;
      }
      for (const auto& [m, c] : f.numerator.terms()) {
        if (c > f.denominator.coefficient(m)) {
          rep.warnings.push_back(where + ": numerator coefficient of " + monomial_text(network, m) +
                                 " (" + format_number(c) + ") exceeds the denominator's (" +
                                 format_number(f.denominator.coefficient(m)) + ")");
        }
      }
    }
    for (const auto& [m, c] : f.numerator.terms()) {
      if (c < 0.0) {
        rep.warnings.push_back(where + ": negative coefficient for " + monomial_text(network, m) +
                               "; the rate may evaluate negative");
        break;
      }
    }
  }
  return rep;
}

MotifReduction reduce_two_state_motif(const QssaMotifParams& p) {
  for (double v : {p.k_on, p.k_off, p.k1, p.k_m1, p.k2, p.k_m2}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("motif rate constants must be positive");
    }
  }
  const double off_on = p.k_off / p.k_on;
  MotifReduction out;
  out.b0 = 1.0 / (1.0 + off_on);
  out.c1 = off_on * (p.k2 / p.k_m2) * (p.k1 / p.k_m1) * out.b0;
  return out;
}

ReactionNetwork scale_to_volume(const ReactionNetwork& network, double volume) {
  if (!(volume > 0.0) || !std::isfinite(volume)) throw InvalidArgument("volume must be positive");
  for (const auto& r : network.reactions()) {
    if (!r.rate.is_mass_action()) {
      throw UnsupportedError("reaction '" + r.name +
                             "': volume scaling is only defined for mass-action rates");
    }
  }
  const double ratio = volume / network.volume();
  // Parameters shared by reactions of different order cannot be scaled in
  // place; those reactions get literal coefficients instead.
  std::map<std::size_t, std::set<int>> orders_by_param;
  for (const auto& r : network.reactions()) {
    if (r.rate.coefficient().kind() == ExprKind::parameter) {
      orders_by_param[r.rate.coefficient().index()].insert(r.order());
    }
  }
  std::vector<Parameter> params = network.parameters();
  for (const auto& [idx, orders] : orders_by_param) {
    if (orders.size() == 1) params[idx].value *= std::pow(ratio, 1 - *orders.begin());
  }
  std::vector<Reaction> reactions = network.reactions();
  for (auto& r : reactions) {
    const double f = std::pow(ratio, 1 - r.order());
    const auto& coef = r.rate.coefficient();
    if (coef.kind() == ExprKind::constant) {
      r.rate = RateExpression::mass_action(RateExpression::constant(coef.value() * f));
    } else if (orders_by_param[coef.index()].size() > 1) {
      r.rate = RateExpression::mass_action(
          RateExpression::constant(network.parameter_values()[coef.index()] * f));
    }
  }
  std::vector<std::string> names;
  for (const auto& s : network.species()) names.push_back(s.name);
  return ReactionNetwork(std::move(names), std::move(params), std::move(reactions), volume,
                         network.convention());
}

bool StatePredicate::operator()(std::span<const Count> state) const {
  for (const auto& c : clauses) {
    const Count x = state[c.species];
    bool ok = false;
    switch (c.op) {
      case Op::ge: ok = x >= c.threshold; break;
      case Op::gt: ok = x > c.threshold; break;
      case Op::le: ok = x <= c.threshold; break;
      case Op::lt: ok = x < c.threshold; break;
      case Op::eq: ok = x == c.threshold; break;
    }
    if (!ok) return false;
  }
  return true;
}

StatePredicate parse_predicate(const ReactionNetwork& network, std::string_view text) {
  StatePredicate pred;
  std::string s(text);
  for (std::size_t pos; (pos = s.find("&&")) != std::string::npos;) s.replace(pos, 2, ",");
  std::stringstream parts(s);
  std::string clause;
  while (std::getline(parts, clause, ',')) {
    std::string c;
    for (char ch : clause) {
      if (!std::isspace(static_cast<unsigned char>(ch))) c += ch;
    }
    if (c.empty()) continue;
    const auto op_pos = c.find_first_of("<>=");
    if (op_pos == std::string::npos || op_pos == 0) {
      throw InvalidArgument("predicate clause '" + clause + "' needs <, <=, >, >= or ==");
    }
    const std::string name = c.substr(0, op_pos);
    std::string op;
    std::size_t rest = op_pos;
    while (rest < c.size() && (c[rest] == '<' || c[rest] == '>' || c[rest] == '=')) op += c[rest++];
    StatePredicate::Clause cl;
    auto idx = network.species_index(name);
    if (!idx) throw InvalidArgument("predicate refers to unknown species '" + name + "'");
    cl.species = *idx;
    if (op == ">=") cl.op = StatePredicate::Op::ge;
    else if (op == ">") cl.op = StatePredicate::Op::gt;
    else if (op == "<=") cl.op = StatePredicate::Op::le;
    else if (op == "<") cl.op = StatePredicate::Op::lt;
    else if (op == "==") cl.op = StatePredicate::Op::eq;
    else throw InvalidArgument("unknown comparison '" + op + "'");
    try {
      std::size_t used = 0;
      cl.threshold = std::stoll(c.substr(rest), &used);
      if (used != c.size() - rest) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("predicate threshold in '" + clause + "' is not an integer");
    }
    pred.clauses.push_back(cl);
  }
  if (pred.clauses.empty()) throw InvalidArgument("empty predicate");
  return pred;
}

}  // namespace cmekit
