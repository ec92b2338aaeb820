#pragma once

#include <set>
#include <string>
#include <tuple>

#include <json.hpp>

namespace goalnet::testing {

// (rule code, subject id, message)
using DiagnosticKey = std::tuple<std::string, std::string, std::string>;

// Re-derives every modelling rule straight from an exported document, without
// touching the model or validation code.
std::multiset<DiagnosticKey> brute_force_diagnostics(const nlohmann::json& exported);

}  // namespace goalnet::testing
