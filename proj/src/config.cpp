#include "fowt/config.hpp"

#include "fowt/errors.hpp"
#include "fowt/log.hpp"
#include "fowt/random.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fowt {

using nlohmann::json;

namespace {

/// Walks a JSON object, collecting every problem instead of stopping at the first.
class Reader
{
public:
  Reader(const json& root, std::vector<std::string>& errors, std::string path = "")
    : root_(root), errors_(errors), path_(std::move(path))
  {
    if (!root_.is_object())
      errors_.push_back(where("") + "must be an object");
  }

  ~Reader()
  {
    if (!root_.is_object())
      return;
    for (const auto& [key, value] : root_.items())
      if (!seen_.count(key))
        errors_.push_back(where(key) + "unknown key");
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  const json* find(const std::string& key)
  {
    seen_.insert(key);
    if (!root_.is_object() || !root_.contains(key) || root_[key].is_null())
      return nullptr;
    return &root_[key];
  }

  template<typename T>
  void number(const std::string& key, T& out, double lo, double hi, bool lo_open = false)
  {
    const json* v = find(key);
    if (!v)
      return;
    if (!v->is_number()) {
      errors_.push_back(where(key) + "must be a number");
      return;
    }
    const double x = v->get<double>();
    if (x < lo || x > hi || (lo_open && x == lo)) {
      std::ostringstream msg;
      msg << where(key) << "value " << x << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
      errors_.push_back(msg.str());
      return;
    }
    if constexpr (std::is_integral_v<T>) {
      if (v->is_number_float() && x != static_cast<double>(static_cast<long long>(x))) {
        errors_.push_back(where(key) + "must be an integer");
        return;
      }
      out = static_cast<T>(v->get<long long>());
    } else {
      out = static_cast<T>(x);
    }
  }

  void seed(const std::string& key, std::uint64_t& out)
  {
    const json* v = find(key);
    if (!v)
      return;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      errors_.push_back(where(key) + "must be a non-negative integer");
      return;
    }
    out = v->get<std::uint64_t>();
  }

  void string(const std::string& key, std::optional<std::string>& out)
  {
    const json* v = find(key);
    if (!v)
      return;
    if (!v->is_string()) {
      errors_.push_back(where(key) + "must be a string");
      return;
    }
    out = v->get<std::string>();
  }

  template<std::size_t N>
  bool array(const std::string& key, std::array<double, N>& out)
  {
    const json* v = find(key);
    if (!v)
      return false;
    if (!v->is_array() || v->size() != N) {
      errors_.push_back(where(key) + "must be an array of " + std::to_string(N) + " numbers");
      return false;
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!(*v)[i].is_number()) {
        errors_.push_back(where(key) + "must be an array of " + std::to_string(N) + " numbers");
        return false;
      }
      out[i] = (*v)[i].get<double>();
    }
    return true;
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  std::string where(const std::string& key) const
  {
    const std::string p = key.empty() ? path_ : child_path(key);
    return "config: '" + (p.empty() ? std::string("<root>") : p) + "': ";
  }

  const json& root_;
  std::vector<std::string>& errors_;
  std::string path_;
  std::set<std::string> seen_;
};

const json kEmptyObject = json::object();

const json& section(Reader& r, const std::string& key, std::vector<std::string>& errors)
{
  const json* v = r.find(key);
  if (!v)
    return kEmptyObject;
  if (!v->is_object()) {
    errors.push_back("config: '" + key + "': must be an object");
    return kEmptyObject;
  }
  return *v;
}

std::string resolve(const std::string& base_dir, const std::string& p)
{
  namespace fs = std::filesystem;
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base_dir) / path).lexically_normal().string();
}

} // namespace

RunConfig RunConfig::from_json(const std::string& text, const std::string& base_dir)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }

  RunConfig c;
  std::vector<std::string> errors;
  {
    Reader r(root, errors);
    int version = -1;
    r.number("schema_version", version, 0, 1e6);
    if (version != kSchemaVersion)
      errors.push_back("config: 'schema_version' must be " + std::to_string(kSchemaVersion));
    r.seed("master_seed", c.master_seed);
    std::optional<std::string> out_dir;
    r.string("output_dir", out_dir);
    if (out_dir)
      c.output_dir = resolve(base_dir, *out_dir);
    else
      c.output_dir = resolve(base_dir, c.output_dir);

    {
      Reader m(section(r, "metocean", errors), errors, "metocean");
      m.string("file", c.metocean_file);
      m.number("synthetic_years", c.synthetic_years, 0.0, 1000.0, true);
      m.number("z_hub", c.hub.z_hub, 0.0, 1e4, true);
      m.number("z_ref", c.hub.z_ref, 0.0, 1e4, true);
      m.number("alpha", c.hub.alpha, 0.0, 1.0);
      m.array("bin_edges", c.bins.edges);
      std::array<double, kWindBins> speeds{};
      if (m.array("bin_speeds", speeds))
        c.bins.representatives = speeds;
      m.number("kde_hs_points", c.kde.n_hs, 2, 2000);
      m.number("kde_tp_points", c.kde.n_tp, 2, 2000);
      m.number("kde_min_records", c.kde.min_records, 1, 1e9);
      m.number("tp_floor", c.kde.tp_floor, 0.0, 100.0, true);
    }
    {
      Reader s(section(r, "structure", errors), errors, "structure");
      s.string("tables_file", c.tables_file);
      std::uint64_t seed = 0;
      if (s.find("synthetic_tables_seed")) {
        s.seed("synthetic_tables_seed", seed);
        c.synthetic_tables_seed = seed;
      }
      s.number("grid_min", c.grid_min, 0.0, 1e3);
      s.number("grid_max", c.grid_max, 0.0, 1e3, true);
      s.number("grid_points", c.grid_points, 2, 1e6);
    }
    {
      Reader l(section(r, "loads", errors), errors, "loads");
      l.number("exposure", c.evaluator.exposure, 0.0, 1e9, true);
      l.number("jonswap_gamma", c.evaluator.jonswap_gamma, 1.0, 20.0);
      l.number("turbulence_i_ref", c.evaluator.i_ref, 0.0, 1.0);
      l.number("kaimal_length_scale", c.evaluator.length_scale, 0.0, 1e5, true);
      l.number("borgman_tol", c.evaluator.borgman.tol, 0.0, 1.0, true);
      l.number("borgman_max_iter", c.evaluator.borgman.max_iter, 1, 10000);
    }
    {
      Reader sn(section(r, "sn_curves", errors), errors, "sn_curves");
      const char* names[kHotSpots] = {"tower_base", "fairlead"};
      for (int h = 0; h < kHotSpots; ++h) {
        Reader curve(section(sn, names[h], errors), errors, sn.child_path(names[h]));
        curve.number("k_a", c.evaluator.sn[h].k_a, 0.0, 1e300, true);
        curve.number("b", c.evaluator.sn[h].b, 0.0, 100.0, true);
      }
    }
    {
      Reader a(section(r, "active_learning", errors), errors, "active_learning");
      a.number("gamma", c.gamma, 0.0, 10.0, true);
      a.number("budget", c.budget, 0, 1e7);
      a.number("window", c.window, 1, 1e6);
      a.number("threshold", c.threshold, 0.0, 1.0, true);
      a.number("gp_restarts", c.gp_restarts, 1, 1000);
      a.number("target_error", c.target_error, 0.0, 1.0, true);
    }
    {
      Reader s(section(r, "mcs", errors), errors, "mcs");
      s.number("samples", c.mcs_samples, 1, 1e9);
      s.number("repetitions", c.mcs_repetitions, 1, 1e6);
    }
  }

  if (c.metocean_file) {
    c.metocean_file = resolve(base_dir, *c.metocean_file);
    if (!std::filesystem::exists(*c.metocean_file))
      errors.push_back("config: 'metocean.file': file not found: " + *c.metocean_file);
  }
  if (c.tables_file) {
    c.tables_file = resolve(base_dir, *c.tables_file);
    if (!std::filesystem::exists(*c.tables_file) && !c.synthetic_tables_seed)
      errors.push_back("config: 'structure.tables_file': file not found and no synthetic_tables_seed set: " +
                       *c.tables_file);
  }
  for (std::size_t i = 1; i < c.bins.edges.size(); ++i)
    if (!(c.bins.edges[i] > c.bins.edges[i - 1]))
      errors.push_back("config: 'metocean.bin_edges': must be strictly increasing");
  if (!(c.bins.edges[0] > 0.0))
    errors.push_back("config: 'metocean.bin_edges': must be positive");
  if (!(c.grid_max > c.grid_min))
    errors.push_back("config: 'structure.grid_max' must exceed 'structure.grid_min'");
  for (int h = 0; h < kHotSpots; ++h)
    if (c.evaluator.sn[h].b != 3.0)
      errors.push_back(std::string("config: 'sn_curves.") + hot_spot_name(static_cast<HotSpot>(h)) +
                       ".b': the acquisition width is defined for b = 3");

  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem" +
                      (errors.size() > 1 ? "s" : "") + "):";
    for (const std::string& e : errors)
      msg += "\n  - " + e;
    throw ValidationError(msg);
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("config file not found: '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string base = std::filesystem::path(path).parent_path().string();
  return from_json(ss.str(), base.empty() ? "." : base);
}

std::string RunConfig::to_json() const
{
  json j;
  j["schema_version"] = kSchemaVersion;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir;
  j["metocean"] = {{"file", metocean_file ? json(*metocean_file) : json(nullptr)},
                   {"synthetic_years", synthetic_years},
                   {"z_hub", hub.z_hub},
                   {"z_ref", hub.z_ref},
                   {"alpha", hub.alpha},
                   {"bin_edges", bins.edges},
                   {"bin_speeds", bins.representatives ? json(*bins.representatives) : json(nullptr)},
                   {"kde_hs_points", kde.n_hs},
                   {"kde_tp_points", kde.n_tp},
                   {"kde_min_records", kde.min_records},
                   {"tp_floor", kde.tp_floor}};
  j["structure"] = {{"tables_file", tables_file ? json(*tables_file) : json(nullptr)},
                    {"synthetic_tables_seed", synthetic_tables_seed ? json(*synthetic_tables_seed) : json(nullptr)},
                    {"grid_min", grid_min},
                    {"grid_max", grid_max},
                    {"grid_points", grid_points}};
  j["loads"] = {{"exposure", evaluator.exposure},
                {"jonswap_gamma", evaluator.jonswap_gamma},
                {"turbulence_i_ref", evaluator.i_ref},
                {"kaimal_length_scale", evaluator.length_scale},
                {"borgman_tol", evaluator.borgman.tol},
                {"borgman_max_iter", evaluator.borgman.max_iter}};
  j["sn_curves"] = {{"tower_base", {{"k_a", evaluator.sn[0].k_a}, {"b", evaluator.sn[0].b}}},
                    {"fairlead", {{"k_a", evaluator.sn[1].k_a}, {"b", evaluator.sn[1].b}}}};
  j["active_learning"] = {{"gamma", gamma},
                          {"budget", budget},
                          {"window", window},
                          {"threshold", threshold},
                          {"gp_restarts", gp_restarts},
                          {"target_error", target_error}};
  j["mcs"] = {{"samples", mcs_samples}, {"repetitions", mcs_repetitions}};
  return j.dump(2);
}

std::string RunConfig::hash() const
{
  // The output directory does not change results.
  json j = json::parse(to_json());
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

AlSettings RunConfig::al_settings(HotSpot h) const
{
  AlSettings s;
  s.exposure = evaluator.exposure;
  s.sn = evaluator.sn[static_cast<int>(h)];
  s.gamma = gamma;
  s.window = window;
  s.threshold = threshold;
  s.gp.restarts = gp_restarts;
  s.gp.seed = derive_seed(master_seed, std::string("gpr_") + hot_spot_name(h));
  return s;
}

FrequencyGrid RunConfig::frequency_grid() const
{
  return FrequencyGrid::uniform(grid_min, grid_max, static_cast<std::size_t>(grid_points));
}

Study Study::build(const RunConfig& config)
{
  Study s;
  s.config = config;
  if (config.metocean_file) {
    IngestReport rep = ingest_records(*config.metocean_file);
    s.records = std::move(rep.records);
    s.rejected_rows = rep.rejected.size();
    s.notes.push_back("metocean records from " + *config.metocean_file + " (" + std::to_string(s.records.size()) +
                      " rows, " + std::to_string(s.rejected_rows) + " rejected)");
  } else {
    SyntheticSiteOptions site;
    site.years = config.synthetic_years;
    s.records = synthetic_site(derive_seed(config.master_seed, "site"), site);
    s.notes.push_back("synthetic metocean site (" + std::to_string(s.records.size()) + " hourly records)");
  }
  s.metocean = build_metocean_model(s.records, config.bins, config.hub, config.kde);
  s.domains = make_domains(s.metocean);

  const FrequencyGrid grid = config.frequency_grid();
  CoefficientTables tables;
  if (config.tables_file && std::filesystem::exists(*config.tables_file)) {
    tables = load_tables(*config.tables_file);
    s.notes.push_back("coefficient tables from " + *config.tables_file);
  } else {
    const std::uint64_t seed = config.synthetic_tables_seed.value_or(config.master_seed);
    tables = synthetic_tables(derive_seed(seed, "tables"), grid);
    if (config.tables_file)
      s.notes.push_back("coefficient tables file " + *config.tables_file + " not found; synthetic tables (seed " +
                        std::to_string(seed) + ") used instead");
    else
      s.notes.push_back("synthetic coefficient tables (seed " + std::to_string(seed) + ")");
  }
  const StructureGeometry geometry = StructureGeometry::from_tables(tables);
  s.evaluator.emplace(std::move(tables), geometry, config.evaluator);
  return s;
}

} // namespace fowt
