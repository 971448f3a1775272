#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmekit/netparse.hpp"

namespace cmekit {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// "a:b:s" read as the inclusive grid a, a+s, ..., b.
std::vector<double> parse_time_grid(std::string_view text);

/// Comma-separated reals ("1.2,1,1").
std::vector<double> parse_number_list(std::string_view text);

/// What a subcommand produced: `data` is the main CSV/JSON payload, `report`
/// a short JSON summary.
struct AppOutput {
  std::string data;
  std::string report;
  std::vector<std::string> warnings;
};

struct ValidateOptions {
  std::string emit;  // "", "dsl" or "json"
};
AppOutput run_validate(const ModelDocument& model, const ValidateOptions& options);

struct SimulateOptions {
  std::string method = "direct";  // direct nrm tau rleap cle ode wssa
  std::optional<double> t_end;
  std::size_t n = 1;
  std::uint64_t seed = kDefaultSeed;
  std::string record;  // time grid; empty records every event
  unsigned workers = 1;
  double epsilon = 0.03;
  bool midpoint = false;
  std::uint64_t r = 10;
  double dt = 1e-3;
  std::size_t stride = 1;
  std::uint64_t max_events = 100'000'000;
  std::string predicate;  // wssa
  std::string bias;       // wssa, one γ per reaction
};
AppOutput run_simulate(const ModelDocument& model, const SimulateOptions& options);

struct FspAppOptions {
  bool stationary = false;
  std::optional<double> t;
  double eps = 1e-6;
  std::string box;       // "40,800" upper bounds for a stationary solve
  std::string hit;       // predicate: absorbing hitting probability by t
  std::string marginal;  // species name
  std::size_t state_cap = 1'000'000;
};
AppOutput run_fsp(const ModelDocument& model, const FspAppOptions& options);

struct MomentsAppOptions {
  int order = 2;
  std::string closure = "none";  // none or normal
  bool stationary = false;
  std::optional<double> t_end;
  std::string record;
};
AppOutput run_moments(const ModelDocument& model, const MomentsAppOptions& options);

struct LnaAppOptions {
  bool stationary = false;
  std::optional<double> t_end;
  std::string record;
  std::string guess;  // starting counts for the stationary Newton solve
};
AppOutput run_lna(const ModelDocument& model, const LnaAppOptions& options);

struct InferAppOptions {
  std::string method;  // abc fsp-mle moment gamma
  std::string data;    // CSV text
  std::string params;  // "tau_R=0.2:5,..."
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
  double epsilon = 0.05;
  std::size_t particles = 1000;
  std::size_t cells = 2000;
  std::optional<double> horizon;
  std::string objective = "nll";  // nll or l1
  std::size_t restarts = 5;
  double fsp_eps = 1e-6;
  std::size_t state_cap = 1'000'000;
  std::string targets;  // "R=10:10,P=400:5733.3"; empty: taken from data
  std::string weights;  // "R=1:0,..." mean:variance weights
  std::string species;  // gamma: column to fit
};
AppOutput run_infer(const ModelDocument& model, const InferAppOptions& options);

}  // namespace cmekit
