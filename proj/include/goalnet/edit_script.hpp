#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "goalnet/telemetry.hpp"

namespace goalnet {

/// Applies a batch of editing operations given as a JSON array, e.g.
///
///   [{"op": "add_state", "label": "s", "name": "Start"},
///    {"op": "add_transition", "label": "t", "name": "Go"},
///    {"op": "add_arc", "source": "@s", "target": "@t"}]
///
/// Entity references are UUIDs or "@label" for ids created earlier in the
/// same script. Returns label -> id. Stops at the first failing step; the
/// error message names the step and its field path is "[i].<field>".
std::map<std::string, EntityId> apply_edit_script(EditSession& session, const nlohmann::json& script);

}  // namespace goalnet
