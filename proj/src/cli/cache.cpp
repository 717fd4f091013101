#include <array>
#include <cstring>
#include <fstream>
#include <system_error>

#include "nelson/cli.hpp"
#include "nelson/errors.hpp"

namespace nelson::cli {

namespace {

// Native byte order; the cache is a local accelerator, not an exchange format.
constexpr std::array<char, 8> kMagic{'N', 'L', 'G', 'S', 'T', 'A', 'T', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("ground-state cache: truncated record");
  return v;
}

}  // namespace

void write_ground_state(std::ostream& out, const model::GroundState& gs) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(gs.psi.size()));
  put(out, gs.energy);
  put(out, gs.eig_residual);
  put<std::uint64_t>(out, gs.iterations);
  put(out, gs.tail_weight);
  put(out, gs.gap_estimate);
  out.write(reinterpret_cast<const char*>(gs.psi.data()),
            static_cast<std::streamsize>(gs.psi.size() * sizeof(std::complex<double>)));
  if (!out) throw Error("ground-state cache: write failed");
}

model::GroundState read_ground_state(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("ground-state cache: bad header");
  model::GroundState gs;
  const auto n = get<std::uint64_t>(in);
  gs.energy = get<double>(in);
  gs.eig_residual = get<double>(in);
  gs.iterations = get<std::uint64_t>(in);
  gs.tail_weight = get<double>(in);
  gs.gap_estimate = get<double>(in);
  gs.psi.resize(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(gs.psi.data()), static_cast<std::streamsize>(n * sizeof(std::complex<double>)));
  if (!in) throw Error("ground-state cache: truncated state vector");
  return gs;
}

FileGroundStateStore::FileGroundStateStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<model::GroundState> FileGroundStateStore::load(const std::string& key) {
  const auto path = dir_ / (key + ".gs");
  std::ifstream in(path, std::ios::binary);
  std::optional<model::GroundState> gs;
  if (in) {
    try {
      gs = read_ground_state(in);
    } catch (const Error&) {
      gs.reset();  // unreadable entries are recomputed and overwritten
    }
  }
  std::lock_guard lock(mutex_);
  ++(gs ? hits_ : misses_);
  return gs;
}

void FileGroundStateStore::store(const std::string& key, const model::GroundState& gs) {
  const auto path = dir_ / (key + ".gs");
  const auto tmp = dir_ / (key + ".gs.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("ground-state cache: cannot write " + tmp.string());
    write_ground_state(out, gs);
  }
  std::filesystem::rename(tmp, path);
}

std::size_t FileGroundStateStore::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t FileGroundStateStore::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace nelson::cli
