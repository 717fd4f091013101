#pragma once

// Run configuration, presets, ground-state cache and report emission behind
// the nelson_lab command line tool.

#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nelson/ircheck.hpp"
#include "nelson/model.hpp"

namespace nelson::cli {

// ---------------------------------------------------------------- TOML subset

// Tables, dotted keys, inline tables, arrays, strings, integers, floats and
// booleans. Dates and array-of-tables are rejected.
nlohmann::json parse_toml(std::string_view text);

// ---------------------------------------------------------------- configuration

struct OracleSpec {
  std::vector<double> omegas{1.0};
  std::vector<double> couplings{0.1};  // g_j, already including sqrt(weight)
  int n_max = 10;
};

struct RunConfig {
  model::ModelConfig model;
  std::string potential_file;  // set for tabulated potentials
  std::vector<double> kappas;
  std::string out = "out";
  bool cache = true;
  std::size_t jobs = 1;
  double tail_gate = 1e-4;
  ircheck::CheckFlags checks;
  double c0 = 0.0;
  double n0 = 0.0;
  OracleSpec oracle;

  void validate() const;
};

// Throws ConfigError with a dotted field path on schema violations.
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const RunConfig& cfg);
// Canonical TOML text; parse_config(emit_toml(c)) reproduces c.
std::string emit_toml(const RunConfig& cfg);

enum class ConfigFormat { toml, json };
RunConfig parse_config(std::string_view text, ConfigFormat format, const std::filesystem::path& base_dir = {});
// Format from the extension: .json is JSON, anything else TOML.
RunConfig load_config(const std::filesystem::path& path);

bool operator==(const RunConfig& a, const RunConfig& b);

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
std::string_view preset_text(std::string_view name);
RunConfig load_preset(std::string_view name);

// ---------------------------------------------------------------- cache

// One binary file per ground state under `dir`, named by the content key.
class FileGroundStateStore final : public ircheck::GroundStateStore {
 public:
  explicit FileGroundStateStore(std::filesystem::path dir);

  std::optional<model::GroundState> load(const std::string& key) override;
  void store(const std::string& key, const model::GroundState& gs) override;

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

void write_ground_state(std::ostream& out, const model::GroundState& gs);
model::GroundState read_ground_state(std::istream& in);

// ---------------------------------------------------------------- reports

// Round-trip decimal text for doubles (%.17g; nan and inf spelled out).
std::string format_double(double v);

void write_sweep_csv(std::ostream& out, const ircheck::SweepReport& rep);
nlohmann::json sweep_summary(const RunConfig& cfg, const ircheck::SweepReport& rep,
                             const std::vector<ircheck::BindingReport>& binding);
// Compact JSON with doubles in round-trip form and a trailing newline.
std::string dump_json(const nlohmann::json& doc);

// ---------------------------------------------------------------- subcommands

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitTheorem = 4;

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
};

// Each writes its CSV/JSON into cfg.out; errors from the numerical modules
// propagate, except per-point sweep failures which are recorded.
RunOutcome run_atomic(const RunConfig& cfg, std::ostream& log);
RunOutcome run_oracle(const RunConfig& cfg, std::ostream& log);
RunOutcome run_sweep(const RunConfig& cfg, std::ostream& log);
RunOutcome run_verify(const RunConfig& cfg, std::ostream& log);

// Dispatches by name and maps exceptions onto exit codes.
int run_command(std::string_view command, const RunConfig& cfg, std::ostream& log);

}  // namespace nelson::cli
