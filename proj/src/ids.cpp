#include "goalnet/ids.hpp"

#include <array>
#include <cstdint>
#include <random>

#include "goalnet/error.hpp"

namespace goalnet {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "version_conflict";
    case ErrorCode::AccessDenied: return "access_denied";
    case ErrorCode::Config: return "config_error";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Runtime: return "runtime_error";
    case ErrorCode::Storage: return "storage_error";
  }
  return "unknown";
}

bool EntityId::is_valid(std::string_view text) noexcept {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (c != '-') return false;
    } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return true;
}

EntityId EntityId::parse(std::string_view text) {
  if (!is_valid(text)) {
    throw Error(ErrorCode::InvalidArgument, "not a lowercase UUID: '" + std::string(text) + "'");
  }
  return EntityId(std::string(text));
}

EntityId new_uuid() {
  static thread_local std::mt19937_64 rng = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }();
  std::uint64_t hi = rng();
  std::uint64_t lo = rng();
  hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;  // variant 10xx

  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(36);
  auto put = [&](std::uint64_t v, int nibbles) {
    for (int i = nibbles - 1; i >= 0; --i) out.push_back(kHex[(v >> (4 * i)) & 0xF]);
  };
  put(hi >> 32, 8);
  out.push_back('-');
  put(hi >> 16, 4);
  out.push_back('-');
  put(hi, 4);
  out.push_back('-');
  put(lo >> 48, 4);
  out.push_back('-');
  put(lo, 12);
  return EntityId::parse(out);
}

}  // namespace goalnet
