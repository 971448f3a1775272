#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cmekit/error.hpp"
#include "cmekit/model.hpp"

namespace cmekit {

/// A parsed model file: the network, its initial state, and where each
/// declaration came from. Equality ignores source positions.
struct ModelDocument {
  ReactionNetwork network;
  SystemState initial_state;

  std::vector<SourcePos> species_pos;
  std::vector<SourcePos> parameter_pos;
  std::vector<SourcePos> reaction_pos;

  bool operator==(const ModelDocument& o) const {
    return network == o.network && initial_state == o.initial_state;
  }
};

/// Parses the reaction-network DSL:
///
///   species R P
///   param tau_R = 1.0        # comments run to end of line
///   volume 1
///   convention power         # or factorial
///   reaction tx: 0 -> R @ mass_action(tau_R)
///   reaction dimer: 2 P -> D @ k1 * P * (P - 1)
///   init R = 0, P = 0
///
/// "0" is the empty side. Identifiers may be used before they are declared.
/// The first syntax error aborts; semantic errors are collected and thrown
/// together. The resulting network passes validate_network without errors.
ModelDocument parse_model(std::string_view text);

/// Parses the JSON mirror produced by serialize_model(..., json).
ModelDocument parse_model_json(std::string_view text);

/// Loads a file, choosing the JSON reader when the first non-blank character
/// is '{'.
ModelDocument load_model(const std::string& path);

/// Parses a standalone rate expression. Identifiers resolve against the given
/// species names first, then parameter names.
RateExpression parse_rate_expression(std::string_view text,
                                     const std::vector<std::string>& species,
                                     const std::vector<std::string>& parameters);

enum class ModelFormat { dsl, json };

std::string serialize_model(const ModelDocument& doc, ModelFormat format);

}  // namespace cmekit
