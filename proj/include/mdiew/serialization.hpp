#pragma once

// JSON forms of the data types, the canonical encoding used for content
// digests, and file helpers.
//
// Complex matrices are nested row arrays of [re, im] pairs.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mdiew/programs.hpp"
#include "mdiew/scenario.hpp"
#include "mdiew/simulate.hpp"

namespace mdiew {

using Json = nlohmann::json;

Json to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const Json& j);

Json to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);

Json to_json(const ProbabilityTable& table);
ProbabilityTable probability_table_from_json(const Json& j);

Json to_json(const CountTable& counts);
CountTable count_table_from_json(const Json& j);

Json to_json(const Witness& witness);
Witness witness_from_json(const Json& j);

// Sorted keys, no whitespace, floats with 17 significant digits.
std::string canonical_json(const Json& j);
std::string sha256_hex(const std::string& bytes);

std::string scenario_digest(const Scenario& scenario);
// Digest of the canonical JSON of any value.
std::string json_digest(const Json& j);

// Throw SchemaError on unreadable or malformed files.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace mdiew
