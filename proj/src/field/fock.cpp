#include <algorithm>
#include <cmath>
#include <limits>

#include "nelson/errors.hpp"
#include "nelson/field.hpp"
#include "nelson/hash.hpp"

namespace nelson::field {

namespace {

constexpr std::uint64_t kSaturate = std::uint64_t{1} << 62;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return std::min(kSaturate, a + b); }

// table[r * (total_max + 1) + s] = number of length-r tuples with entries in
// [0, n_max] summing to exactly s.
std::vector<std::uint64_t> tuple_counts(std::size_t modes, int n_max, int total_max) {
  const std::size_t width = static_cast<std::size_t>(total_max) + 1;
  std::vector<std::uint64_t> table((modes + 1) * width, 0);
  table[0] = 1;
  for (std::size_t r = 1; r <= modes; ++r) {
    for (int s = 0; s <= total_max; ++s) {
      std::uint64_t acc = 0;
      for (int v = 0; v <= std::min(s, n_max); ++v) {
        acc = sat_add(acc, table[(r - 1) * width + static_cast<std::size_t>(s - v)]);
      }
      table[r * width + static_cast<std::size_t>(s)] = acc;
    }
  }
  return table;
}

void check_caps(std::size_t modes, int n_max, int total_max) {
  if (modes < 1) throw Error("Fock space needs at least one mode");
  if (n_max < 1 || n_max > 255) throw Error("per-mode cap must be in [1, 255]");
  if (total_max < 1 || total_max > 65535) throw Error("total-number cap must be in [1, 65535]");
}

}  // namespace

std::uint64_t FockSpace::count(std::size_t modes, int n_max, int total_max) {
  check_caps(modes, n_max, total_max);
  const auto table = tuple_counts(modes, n_max, total_max);
  const std::size_t width = static_cast<std::size_t>(total_max) + 1;
  std::uint64_t dim = 0;
  for (int s = 0; s <= total_max; ++s) dim = sat_add(dim, table[modes * width + static_cast<std::size_t>(s)]);
  return dim;
}

FockSpace::FockSpace(std::size_t modes, int n_max, int total_max, std::size_t max_dim)
    : modes_(modes), n_max_(n_max), total_max_(total_max) {
  const std::uint64_t expected = count(modes, n_max, total_max);
  const std::uint64_t limit =
      std::min<std::uint64_t>(max_dim, static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()));
  if (expected > limit) {
    throw CapacityError("Fock space dimension " + std::to_string(expected) +
                            " exceeds the budget of " + std::to_string(limit),
                        static_cast<std::size_t>(expected));
  }
  tuples_ = tuple_counts(modes, n_max, total_max);
  const std::size_t width = static_cast<std::size_t>(total_max) + 1;
  block_offset_.assign(width + 1, 0);
  for (std::size_t s = 0; s < width; ++s) {
    block_offset_[s + 1] = block_offset_[s] + tuples_[modes * width + s];
  }

  const auto dim = static_cast<std::size_t>(expected);
  occupations_.reserve(dim * modes);
  totals_.reserve(dim);

  // Depth-first generation in descending lexicographic order within each
  // total-number block.
  std::vector<int> current(modes, 0);
  auto emit = [&](int total) {
    for (int v : current) occupations_.push_back(static_cast<std::uint8_t>(v));
    totals_.push_back(static_cast<std::uint16_t>(total));
  };
  auto fill = [&](auto&& self, std::size_t pos, int remaining, int total) -> void {
    if (pos + 1 == modes) {
      if (remaining <= n_max) {
        current[pos] = remaining;
        emit(total);
      }
      return;
    }
    for (int v = std::min(remaining, n_max); v >= 0; --v) {
      const std::size_t rest = modes - pos - 1;
      if (tuples_[rest * width + static_cast<std::size_t>(remaining - v)] == 0) continue;
      current[pos] = v;
      self(self, pos + 1, remaining - v, total);
    }
    current[pos] = 0;
  };
  for (int total = 0; total <= total_max; ++total) fill(fill, 0, total, total);

  raised_.assign(dim * modes, -1);
  lowered_.assign(dim * modes, -1);
  std::vector<int> work(modes);
  for (std::size_t i = 0; i < dim; ++i) {
    const int total = totals_[i];
    if (total >= total_max) continue;
    for (std::size_t j = 0; j < modes; ++j) {
      if (occupation(i, j) >= n_max) continue;
      for (std::size_t m = 0; m < modes; ++m) work[m] = occupation(i, m);
      work[j] += 1;
      const auto target = static_cast<std::int32_t>(rank(work, total + 1));
      raised_[j * dim + i] = target;
      lowered_[j * dim + static_cast<std::size_t>(target)] = static_cast<std::int32_t>(i);
    }
  }

  ContentHash h;
  h.add("fock").add(static_cast<std::uint64_t>(modes)).add(n_max).add(total_max);
  hash_ = h.value();
}

std::uint64_t FockSpace::rank(std::span<const int> config, int total) const {
  const std::size_t width = static_cast<std::size_t>(total_max_) + 1;
  std::uint64_t pos = block_offset_[static_cast<std::size_t>(total)];
  int remaining = total;
  for (std::size_t i = 0; i < modes_; ++i) {
    const std::size_t rest = modes_ - i - 1;
    for (int v = std::min(remaining, n_max_); v > config[i]; --v) {
      pos += tuples_[rest * width + static_cast<std::size_t>(remaining - v)];
    }
    remaining -= config[i];
  }
  return pos;
}

std::int64_t FockSpace::index_of(std::span<const int> config) const {
  if (config.size() != modes_) return -1;
  int total = 0;
  for (int v : config) {
    if (v < 0 || v > n_max_) return -1;
    total += v;
  }
  if (total > total_max_) return -1;
  return static_cast<std::int64_t>(rank(config, total));
}

FockSpace enumerate_fock(std::size_t modes, int n_max, int total_max, std::size_t max_dim) {
  return FockSpace(modes, n_max, total_max, max_dim);
}

StateVector apply_annihilation(std::size_t j, const StateVector& v, const FockSpace& fs) {
  if (static_cast<std::size_t>(v.size()) != fs.dim()) throw Error("state size does not match Fock space");
  StateVector out = StateVector::Zero(v.size());
  for (std::size_t i = 0; i < fs.dim(); ++i) {
    const auto src = fs.raised(i, j);
    if (src >= 0) out(static_cast<Eigen::Index>(i)) = std::sqrt(fs.occupation(i, j) + 1.0) * v(src);
  }
  return out;
}

StateVector apply_creation(std::size_t j, const StateVector& v, const FockSpace& fs) {
  if (static_cast<std::size_t>(v.size()) != fs.dim()) throw Error("state size does not match Fock space");
  StateVector out = StateVector::Zero(v.size());
  for (std::size_t i = 0; i < fs.dim(); ++i) {
    const auto src = fs.lowered(i, j);
    if (src >= 0) out(static_cast<Eigen::Index>(i)) = std::sqrt(static_cast<double>(fs.occupation(i, j))) * v(src);
  }
  return out;
}

StateVector apply_number(const StateVector& v, const FockSpace& fs) {
  if (static_cast<std::size_t>(v.size()) != fs.dim()) throw Error("state size does not match Fock space");
  StateVector out(v.size());
  for (std::size_t i = 0; i < fs.dim(); ++i) {
    out(static_cast<Eigen::Index>(i)) = static_cast<double>(fs.total(i)) * v(static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace nelson::field
