#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "nelson/cli.hpp"
#include "nelson/errors.hpp"

namespace nelson::cli {

namespace {

using json = nlohmann::json;

#include "nelson/presets.inc"

// A config table whose keys are consumed one by one; whatever is left over
// when the table is closed is reported as an unknown field.
class Table {
 public:
  Table(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a table");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::optional<Table> table(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return Table(*v, field(key));
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_number(*v, field(key));
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_number((*v)[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  void close() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!used_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> used_;

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
    return d;
  }
};

atomic::PotentialClass class_from_string(const std::string& s, const std::string& path) {
  if (s == "c1" || s == "C1") return atomic::PotentialClass::c1;
  if (s == "c2" || s == "C2") return atomic::PotentialClass::c2;
  if (s == "unclassified") return atomic::PotentialClass::unclassified;
  throw ConfigError(path, "unknown potential class '" + s + "' (expected c1, c2 or unclassified)");
}

std::string class_name(atomic::PotentialClass cls) {
  switch (cls) {
    case atomic::PotentialClass::c1:
      return "c1";
    case atomic::PotentialClass::c2:
      return "c2";
    case atomic::PotentialClass::unclassified:
      break;
  }
  return "unclassified";
}

int to_int(long long v, const std::string& path) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(path, "out of range");
  }
  return static_cast<int>(v);
}

std::size_t to_size(long long v, const std::string& path) {
  if (v < 0) throw ConfigError(path, "must be >= 0");
  return static_cast<std::size_t>(v);
}

void read_potential(Table& t, RunConfig& cfg) {
  const std::string kind = t.string("kind", "harmonic");
  atomic::PotentialSpec p;
  if (kind == "harmonic") {
    p = atomic::PotentialSpec::harmonic(t.number("omega0", 1.0));
  } else if (kind == "gaussian_well") {
    p = atomic::PotentialSpec::gaussian_well(t.number("depth", 5.0), t.number("width", 1.0));
  } else if (kind == "free") {
    p = atomic::PotentialSpec::free();
  } else if (kind == "table") {
    cfg.potential_file = t.string("file", "");
    if (cfg.potential_file.empty()) throw ConfigError(t.field("file"), "required for a tabulated potential");
    p.kind = atomic::Free{};  // replaced once the grid is known
  } else {
    throw ConfigError(t.field("kind"), "unknown potential '" + kind + "' (expected harmonic, gaussian_well, table or free)");
  }
  if (kind == "table" && !t.find("class")) throw ConfigError(t.field("class"), "required for a tabulated potential");
  if (const json* cls = t.find("class")) {
    if (!cls->is_string()) throw ConfigError(t.field("class"), "expected a string");
    p.declared_class = class_from_string(cls->get<std::string>(), t.field("class"));
  }
  const json* c1 = t.find("c1");
  const json* c2 = t.find("c2");
  if (c1 || c2) {
    if (!c1 || !c2) throw ConfigError(t.field(c1 ? "c2" : "c1"), "c1 and c2 must be given together");
    p.c1_constants_override = std::make_pair(t.number("c1", 0.0), t.number("c2", 0.0));
  }
  t.close();
  cfg.model.potential = std::move(p);
}

void load_table_potential(RunConfig& cfg, const std::filesystem::path& base_dir) {
  std::filesystem::path file = cfg.potential_file;
  if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
  std::ifstream in(file);
  if (!in) throw ConfigError("potential.file", "cannot open " + file.string());
  const auto cls = cfg.model.potential.declared_class;
  const auto c12 = cfg.model.potential.c1_constants_override;
  try {
    cfg.model.potential = atomic::read_potential_table(in, cfg.model.grid, cls, c12);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("potential.file", e.what());
  }
}

json potential_to_json(const RunConfig& cfg) {
  const auto& p = cfg.model.potential;
  json out = json::object();
  if (const auto* h = std::get_if<atomic::Harmonic>(&p.kind)) {
    out["kind"] = "harmonic";
    out["omega0"] = h->omega0;
  } else if (const auto* g = std::get_if<atomic::GaussianWell>(&p.kind)) {
    out["kind"] = "gaussian_well";
    out["depth"] = g->depth;
    out["width"] = g->width;
  } else if (std::holds_alternative<atomic::Tabulated>(p.kind)) {
    out["kind"] = "table";
    out["file"] = cfg.potential_file;
  } else {
    out["kind"] = "free";
  }
  out["class"] = class_name(p.declared_class);
  if (p.c1_constants_override) {
    out["c1"] = p.c1_constants_override->first;
    out["c2"] = p.c1_constants_override->second;
  }
  return out;
}

std::string toml_scalar(const json& v) {
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : v.get<std::string>()) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    return out + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    std::string s = format_double(v.get<double>());
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += toml_scalar(v[i]);
    }
    return out + "]";
  }
  throw Error("toml emitter: unsupported value");
}

}  // namespace

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("model", e.what());
  }
  if (!kappas.empty()) {
    try {
      ircheck::validate_kappas(kappas, model.lambda);
    } catch (const ConfigError& e) {
      throw ConfigError("sweep." + e.field_path(), std::string(e.what()).substr(e.field_path().size() + 2));
    }
  }
  if (jobs < 1) throw ConfigError("output.jobs", "must be >= 1");
  if (!(tail_gate > 0.0)) throw ConfigError("sweep.tail_gate", "must be positive");
  if (!(c0 >= 0.0)) throw ConfigError("localization.c0", "must be >= 0");
  if (!(n0 >= 0.0)) throw ConfigError("localization.n0", "must be >= 0");
  if (oracle.omegas.empty() || oracle.omegas.size() != oracle.couplings.size()) {
    throw ConfigError("oracle.couplings", "need one coupling per frequency");
  }
  for (std::size_t i = 0; i < oracle.omegas.size(); ++i) {
    if (!(oracle.omegas[i] > 0.0)) throw ConfigError("oracle.omegas[" + std::to_string(i) + "]", "must be positive");
  }
  if (oracle.n_max < 1) throw ConfigError("oracle.n_max", "must be >= 1");
  if (out.empty()) throw ConfigError("output.dir", "must not be empty");
}

RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  Table root(doc, "");
  auto& m = cfg.model;

  if (auto t = root.table("model")) {
    const std::string kind = t->string("kind", "coupled");
    if (kind == "coupled") {
      m.kind = model::ModelKind::coupled;
    } else if (kind == "van_hove") {
      m.kind = model::ModelKind::van_hove;
    } else {
      throw ConfigError(t->field("kind"), "unknown model '" + kind + "' (expected coupled or van_hove)");
    }
    m.q = t->number("q", m.q);
    m.levels = to_size(t->integer("levels", static_cast<long long>(m.levels)), t->field("levels"));
    m.frozen_energy = t->number("frozen_energy", m.frozen_energy);
    t->close();
  }
  if (auto t = root.table("potential")) read_potential(*t, cfg);
  if (auto t = root.table("grid")) {
    m.grid.dim = to_int(t->integer("dim", m.grid.dim), t->field("dim"));
    m.grid.half_extent = t->number("half_extent", m.grid.half_extent);
    m.grid.points = to_int(t->integer("points", m.grid.points), t->field("points"));
    t->close();
  }
  if (auto t = root.table("modes")) {
    m.lambda = t->number("lambda", m.lambda);
    m.shells_per_decade = to_int(t->integer("shells_per_decade", m.shells_per_decade), t->field("shells_per_decade"));
    m.shells = to_int(t->integer("shells", m.shells), t->field("shells"));
    m.directions = to_int(t->integer("directions", m.directions), t->field("directions"));
    const std::string spacing = t->string("spacing", field::to_string(m.spacing));
    try {
      m.spacing = field::spacing_from_string(spacing);
    } catch (const Error& e) {
      throw ConfigError(t->field("spacing"), e.what());
    }
    m.generalized = t->boolean("generalized", m.generalized);
    m.mu = t->number("mu", m.mu);
    m.nu = t->number("nu", m.nu);
    t->close();
  }
  if (auto t = root.table("fock")) {
    m.n_max = to_int(t->integer("n_max", m.n_max), t->field("n_max"));
    m.total_max = to_int(t->integer("total_max", m.total_max), t->field("total_max"));
    m.max_dim = to_size(t->integer("max_dim", static_cast<long long>(m.max_dim)), t->field("max_dim"));
    t->close();
  }
  if (auto t = root.table("solver")) {
    auto& s = m.tol;
    s.eig_tol = t->number("eig_tol", s.eig_tol);
    s.eig_max_iter = to_size(t->integer("eig_max_iter", static_cast<long long>(s.eig_max_iter)), t->field("eig_max_iter"));
    s.krylov_dim = to_size(t->integer("krylov_dim", static_cast<long long>(s.krylov_dim)), t->field("krylov_dim"));
    s.shift_tol = t->number("shift_tol", s.shift_tol);
    s.shift_max_iter = to_size(t->integer("shift_max_iter", static_cast<long long>(s.shift_max_iter)), t->field("shift_max_iter"));
    s.atomic_tol = t->number("atomic_tol", s.atomic_tol);
    t->close();
  }
  if (auto t = root.table("sweep")) {
    if (auto k = t->numbers("kappas")) cfg.kappas = std::move(*k);
    cfg.tail_gate = t->number("tail_gate", cfg.tail_gate);
    t->close();
  }
  if (auto t = root.table("checks")) {
    auto& c = cfg.checks;
    c.pull_through = t->boolean("pull_through", c.pull_through);
    c.ine1 = t->boolean("ine1", c.ine1);
    c.binding = t->boolean("binding", c.binding);
    c.localization = t->boolean("localization", c.localization);
    c.constants = t->boolean("constants", c.constants);
    t->close();
  }
  if (auto t = root.table("localization")) {
    cfg.c0 = t->number("c0", cfg.c0);
    cfg.n0 = t->number("n0", cfg.n0);
    t->close();
  }
  if (auto t = root.table("oracle")) {
    if (auto w = t->numbers("omegas")) cfg.oracle.omegas = std::move(*w);
    if (auto g = t->numbers("couplings")) cfg.oracle.couplings = std::move(*g);
    cfg.oracle.n_max = to_int(t->integer("n_max", cfg.oracle.n_max), t->field("n_max"));
    t->close();
  }
  if (auto t = root.table("output")) {
    cfg.out = t->string("dir", cfg.out);
    cfg.cache = t->boolean("cache", cfg.cache);
    const long long jobs = t->integer("jobs", static_cast<long long>(cfg.jobs));
    if (jobs < 1) throw ConfigError(t->field("jobs"), "must be >= 1");
    cfg.jobs = static_cast<std::size_t>(jobs);
    t->close();
  }
  root.close();

  try {
    m.grid.validate();
  } catch (const Error& e) {
    throw ConfigError("grid", e.what());
  }
  if (!cfg.potential_file.empty()) load_table_potential(cfg, base_dir);
  cfg.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  const auto& m = cfg.model;
  json doc;
  doc["model"] = {{"kind", m.kind == model::ModelKind::coupled ? "coupled" : "van_hove"},
                  {"q", m.q},
                  {"levels", m.levels},
                  {"frozen_energy", m.frozen_energy}};
  doc["potential"] = potential_to_json(cfg);
  doc["grid"] = {{"dim", m.grid.dim}, {"half_extent", m.grid.half_extent}, {"points", m.grid.points}};
  doc["modes"] = {{"lambda", m.lambda},
                  {"shells_per_decade", m.shells_per_decade},
                  {"shells", m.shells},
                  {"directions", m.directions},
                  {"spacing", field::to_string(m.spacing)},
                  {"generalized", m.generalized},
                  {"mu", m.mu},
                  {"nu", m.nu}};
  doc["fock"] = {{"n_max", m.n_max}, {"total_max", m.total_max}, {"max_dim", m.max_dim}};
  doc["solver"] = {{"eig_tol", m.tol.eig_tol},
                   {"eig_max_iter", m.tol.eig_max_iter},
                   {"krylov_dim", m.tol.krylov_dim},
                   {"shift_tol", m.tol.shift_tol},
                   {"shift_max_iter", m.tol.shift_max_iter},
                   {"atomic_tol", m.tol.atomic_tol}};
  json kappas = json::array();
  for (double k : cfg.kappas) kappas.push_back(k);
  doc["sweep"] = {{"kappas", kappas}, {"tail_gate", cfg.tail_gate}};
  doc["checks"] = {{"pull_through", cfg.checks.pull_through},
                   {"ine1", cfg.checks.ine1},
                   {"binding", cfg.checks.binding},
                   {"localization", cfg.checks.localization},
                   {"constants", cfg.checks.constants}};
  doc["localization"] = {{"c0", cfg.c0}, {"n0", cfg.n0}};
  doc["oracle"] = {{"omegas", cfg.oracle.omegas}, {"couplings", cfg.oracle.couplings}, {"n_max", cfg.oracle.n_max}};
  doc["output"] = {{"dir", cfg.out}, {"cache", cfg.cache}, {"jobs", cfg.jobs}};
  return doc;
}

std::string emit_toml(const RunConfig& cfg) {
  static const char* const order[] = {"model", "potential", "grid", "modes", "fock", "solver",
                                      "sweep", "checks", "localization", "oracle", "output"};
  const json doc = config_to_json(cfg);
  std::ostringstream out;
  bool first = true;
  for (const char* section : order) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, value] : doc.at(section).items()) out << key << " = " << toml_scalar(value) << '\n';
  }
  return out.str();
}

RunConfig parse_config(std::string_view text, ConfigFormat format, const std::filesystem::path& base_dir) {
  json doc;
  if (format == ConfigFormat::json) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<json>", e.what());
    }
  } else {
    doc = parse_toml(text);
  }
  return config_from_json(doc, base_dir);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const auto format = path.extension() == ".json" ? ConfigFormat::json : ConfigFormat::toml;
  return parse_config(text.str(), format, path.parent_path());
}

bool operator==(const RunConfig& a, const RunConfig& b) { return config_to_json(a) == config_to_json(b); }

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : kPresets) names.emplace_back(name);
  return names;
}

std::string_view preset_text(std::string_view name) {
  for (const auto& [n, text] : kPresets) {
    if (n == name) return text;
  }
  throw ConfigError("--preset", "unknown preset '" + std::string(name) + "'");
}

RunConfig load_preset(std::string_view name) { return parse_config(preset_text(name), ConfigFormat::toml); }

}  // namespace nelson::cli
