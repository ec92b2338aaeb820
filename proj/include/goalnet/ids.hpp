#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace goalnet {

/// Lowercase hyphenated RFC-4122 UUID.
class EntityId {
 public:
  EntityId() = default;

  /// Throws Error(InvalidArgument) unless `text` is a lowercase hyphenated UUID.
  static EntityId parse(std::string_view text);
  static bool is_valid(std::string_view text) noexcept;

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const EntityId&) const = default;
  bool operator==(const EntityId&) const = default;

 private:
  explicit EntityId(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

/// Random version-4 UUID from a per-thread generator seeded by the OS.
EntityId new_uuid();

using UserId = std::string;

}  // namespace goalnet

template <>
struct std::hash<goalnet::EntityId> {
  std::size_t operator()(const goalnet::EntityId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
