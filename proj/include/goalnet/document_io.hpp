#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "goalnet/model.hpp"
#include "goalnet/validation.hpp"

namespace goalnet {

inline constexpr std::string_view kDocumentFormat = "goalnet/1";
inline constexpr std::string_view kDocumentExtension = ".gnet.json";

/// Canonical interchange form: eight sections (meta, net, states,
/// transitions, arcs, functions, tasks, associations), arrays sorted by id,
/// object keys sorted, two-space indent, LF line endings, trailing newline.
/// Byte-identical for identical document content.
std::string export_document(const GoalNetDocument& doc);
nlohmann::json document_to_json(const GoalNetDocument& doc);

/// Inverse of export_document; keeps every id as written. Throws Error with
/// field() naming the offending path (e.g. "states[2].kind").
GoalNetDocument import_document(std::string_view bytes);
GoalNetDocument document_from_json(const nlohmann::json& j);

/// Deterministic SVG 1.1 drawing. Every state, transition and arc is one
/// `<g>` element carrying `data-id`; composite boundaries are dashed lines.
std::string export_svg(const GoalNetDocument& doc);

/// Machine-readable report: {"diagnostics": [{severity, rule, message,
/// subject_kind, subject_id, subject_name}], "error_count", "warning_count"}.
nlohmann::json report_to_json(const ValidationReport& report);
nlohmann::json diagnostic_to_json(const Diagnostic& d);

/// Serializes JSON canonically (sorted keys, compact, no trailing newline).
std::string canonical_json(const nlohmann::json& j);

}  // namespace goalnet
