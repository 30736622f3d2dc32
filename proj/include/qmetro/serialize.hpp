#pragma once

#include "qmetro/optimizer.hpp"
#include "qmetro/states.hpp"

#include "json.hpp"

namespace qmetro {

using Json = nlohmann::json;

// Matrices serialize as {"rows", "cols", "data"} with data a row-major list
// of [re, im] pairs; deserialization validates shape and, for states, the
// density-matrix invariants.
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const PartitionLayout& layout);
PartitionLayout layout_from_json(const Json& j);

Json to_json(const StateWithLayout& s);
StateWithLayout state_from_json(const Json& j);

Json to_json(const GainReport& r);

// Missing keys keep their defaults, so a config file may specify only the
// fields it cares about.
Json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_config_from_json(const Json& j);

} // namespace qmetro
