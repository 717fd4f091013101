#include "nelson/hash.hpp"

#include <bit>
#include <cstdio>

namespace nelson {

namespace {
constexpr std::uint64_t kPrime = 0x100000001b3ULL;
}

ContentHash& ContentHash::add(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= kPrime;
  }
  // Length separator so ("ab","c") and ("a","bc") differ.
  return add(static_cast<std::uint64_t>(bytes.size()));
}

ContentHash& ContentHash::add(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xffU;
    state_ *= kPrime;
  }
  return *this;
}

ContentHash& ContentHash::add(std::int64_t value) {
  return add(static_cast<std::uint64_t>(value));
}

ContentHash& ContentHash::add(double value) {
  if (value == 0.0) value = 0.0;  // fold -0.0 onto +0.0
  return add(std::bit_cast<std::uint64_t>(value));
}

ContentHash& ContentHash::add(std::span<const double> values) {
  add(static_cast<std::uint64_t>(values.size()));
  for (double v : values) add(v);
  return *this;
}

std::string ContentHash::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

}  // namespace nelson
