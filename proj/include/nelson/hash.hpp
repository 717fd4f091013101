#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace nelson {

// 64-bit FNV-1a. Stable across platforms and runs, which std::hash is not;
// used for provenance tags and cache keys.
class ContentHash {
 public:
  ContentHash& add(std::string_view bytes);
  ContentHash& add(double value);
  ContentHash& add(std::int64_t value);
  ContentHash& add(std::uint64_t value);
  ContentHash& add(int value) { return add(static_cast<std::int64_t>(value)); }
  ContentHash& add(std::span<const double> values);

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace nelson
