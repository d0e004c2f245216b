#include "fowt/commands.hpp"

#include "fowt/errors.hpp"
#include "fowt/log.hpp"
#include "fowt/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fowt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr HotSpot kAllHotSpots[kHotSpots] = {HotSpot::tower_base, HotSpot::fairlead};

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fixed(double v, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

json parse_output(const std::string& text, const std::string& what)
{
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse " + what + ": " + e.what());
  }
}

/// Exact per-cell damage and DEL, either from a stored full grid or computed on demand.
class ReferenceGrid
{
public:
  ReferenceGrid(const Study& study, const OutputWriter& out) : study_(study)
  {
    const auto& domains = study.domains;
    for (int h = 0; h < kHotSpots; ++h) {
      damage_[h].resize(domains.size());
      del_[h].resize(domains.size());
    }
    known_.resize(domains.size());
    for (std::size_t k = 0; k < domains.size(); ++k) {
      known_[k].assign(domains[k].cells.size(), 0);
      for (int h = 0; h < kHotSpots; ++h) {
        damage_[h][k].assign(domains[k].cells.size(), 0.0);
        del_[h][k].assign(domains[k].cells.size(), 0.0);
      }
    }
    if (const auto text = out.read("fullgrid", "json"))
      stored_ = load(parse_output(*text, "full-grid output"));
  }

  bool stored() const { return stored_; }

  double damage(HotSpot h, std::size_t k, std::size_t c)
  {
    ensure(k, c);
    return damage_[static_cast<int>(h)][k][c];
  }

  double del(HotSpot h, std::size_t k, std::size_t c)
  {
    ensure(k, c);
    return del_[static_cast<int>(h)][k][c];
  }

  std::size_t solves() const { return solves_; }

  double ltd(HotSpot h)
  {
    std::vector<WeightedDamage> w;
    for (std::size_t k = 0; k < study_.domains.size(); ++k)
      for (std::size_t c = 0; c < study_.domains[k].cells.size(); ++c)
        w.push_back({damage(h, k, c), study_.domains[k].prob_mass[c]});
    return long_term_damage(w);
  }

private:
  bool load(const json& j)
  {
    const auto& bins = j.at("bins");
    if (bins.size() != study_.domains.size())
      throw ValidationError("stored full grid does not match the configured wind bins");
    for (std::size_t k = 0; k < bins.size(); ++k) {
      for (HotSpot h : kAllHotSpots) {
        const std::string name = hot_spot_name(h);
        const auto d = bins[k].at("damage_" + name).get<std::vector<double>>();
        const auto e = bins[k].at("del_" + name).get<std::vector<double>>();
        if (d.size() != study_.domains[k].cells.size() || e.size() != d.size())
          throw ValidationError("stored full grid does not match the configured KDE grid");
        damage_[static_cast<int>(h)][k] = d;
        del_[static_cast<int>(h)][k] = e;
      }
      std::fill(known_[k].begin(), known_[k].end(), 1);
    }
    return true;
  }

  void ensure(std::size_t k, std::size_t c)
  {
    if (known_[k][c])
      return;
    Evaluation e;
    try {
      e = study_.evaluator->evaluate(study_.domains[k].state(c));
    } catch (const NumericalError& err) {
      log::warning(std::string("FD failure; cell given zero damage: ") + err.what());
    }
    ++solves_;
    for (int h = 0; h < kHotSpots; ++h) {
      damage_[h][k][c] = e.hot_spot[h].damage;
      del_[h][k][c] = e.hot_spot[h].del;
    }
    known_[k][c] = 1;
  }

  const Study& study_;
  bool stored_ = false;
  std::vector<std::vector<double>> damage_[kHotSpots];
  std::vector<std::vector<double>> del_[kHotSpots];
  std::vector<std::vector<char>> known_;
  std::size_t solves_ = 0;
};

json notes_json(const Study& study)
{
  return json(study.notes);
}

std::vector<std::size_t> checkpoints(std::size_t samples)
{
  std::vector<std::size_t> out;
  for (std::size_t n = 10; n <= samples; n *= 10)
    out.push_back(n);
  if (out.empty() || out.back() != samples)
    out.push_back(samples);
  return out;
}

double median(std::vector<double> v)
{
  if (v.empty())
    return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

// ---------------------------------------------------------------------------

OutputWriter::OutputWriter(std::string directory, std::string hash, bool overwrite)
  : dir_(std::move(directory)), hash_(std::move(hash)), overwrite_(overwrite)
{
}

std::string OutputWriter::path(const std::string& stem, const std::string& ext) const
{
  return (fs::path(dir_) / (stem + "_" + hash_ + "." + ext)).string();
}

void OutputWriter::claim(const std::vector<std::pair<std::string, std::string>>& targets) const
{
  if (overwrite_)
    return;
  std::vector<std::string> existing;
  for (const auto& [stem, ext] : targets)
    if (fs::exists(path(stem, ext)))
      existing.push_back(path(stem, ext));
  if (!existing.empty()) {
    std::string msg = "refusing to overwrite existing outputs (pass --overwrite to replace them):";
    for (const auto& p : existing)
      msg += "\n  - " + p;
    throw ValidationError(msg);
  }
}

std::string OutputWriter::write(const std::string& stem, const std::string& ext, const std::string& content)
{
  const std::string target = path(stem, ext);
  if (!overwrite_ && fs::exists(target))
    throw ValidationError("refusing to overwrite existing output " + target);
  fs::create_directories(dir_);
  const std::string tmp = target + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw ValidationError("cannot write " + tmp);
    f << content;
    if (!f)
      throw ValidationError("write failed for " + tmp);
  }
  fs::rename(tmp, target);
  written_.push_back(target);
  return target;
}

std::optional<std::string> OutputWriter::read(const std::string& stem, const std::string& ext) const
{
  std::ifstream f(path(stem, ext), std::ios::binary);
  if (!f)
    return std::nullopt;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

std::string cmd_seastates(const Study& study, OutputWriter& out)
{
  out.claim({{"seastates", "json"}, {"seastates_representatives", "csv"}});
  const MetoceanModel& m = study.metocean;
  json bins = json::array();
  std::ostringstream csv;
  csv << "bin,label,v_hub,index,hs,tp,prob_mass,from_empty_cell,grid_cell,grid_hs,grid_tp\n";
  for (int b = 0; b < kWindBins; ++b) {
    json jb;
    jb["index"] = b;
    jb["label"] = WindBinSpec::labels[b];
    jb["lower_edge"] = b == 0 ? 0.0 : study.config.bins.edges[b - 1];
    jb["upper_edge"] = b == kWindBins - 1 ? json(nullptr) : json(study.config.bins.edges[b]);
    jb["count"] = m.binned.bins[b].size();
    jb["probability"] = m.binned.probability[b];
    jb["v_hub"] = m.binned.representative_speed[b];
    jb["empty"] = m.binned.empty[b];
    if (m.grids[b]) {
      const JointDensityGrid& g = *m.grids[b];
      json density = json::array(), mass = json::array();
      for (Eigen::Index i = 0; i < g.density.rows(); ++i) {
        std::vector<double> drow(g.density.cols()), mrow(g.density.cols());
        for (Eigen::Index j = 0; j < g.density.cols(); ++j) {
          drow[j] = g.density(i, j);
          mrow[j] = g.cell_mass(i, j);
        }
        density.push_back(drow);
        mass.push_back(mrow);
      }
      jb["kde"] = {{"bandwidth_hs", g.h_hs},
                   {"bandwidth_tp", g.h_tp},
                   {"hs_grid", g.hs_grid},
                   {"tp_grid", g.tp_grid},
                   {"density", density},
                   {"cell_mass", mass},
                   {"raw_mass", g.raw_mass}};
    }
    if (m.representatives[b]) {
      const RepresentativeSet& rs = *m.representatives[b];
      const BinDomain* dom = nullptr;
      for (const BinDomain& d : study.domains)
        if (d.bin == b)
          dom = &d;
      json reps = json::array();
      for (int k = 0; k < 8; ++k) {
        const SeaState& s = rs.states[k];
        json r = {{"hs", s.hs}, {"tp", s.tp}, {"prob_mass", s.prob_mass}, {"from_empty_cell", rs.from_empty_cell[k]}};
        std::string cell_cols = ",,";
        if (dom && static_cast<std::size_t>(k) < dom->initial_cells.size()) {
          const std::size_t c = dom->initial_cells[k];
          r["grid_cell"] = c;
          cell_cols = std::to_string(c) + "," + fmt(dom->cells[c][0]) + "," + fmt(dom->cells[c][1]);
        }
        reps.push_back(r);
        csv << b << ",\"" << WindBinSpec::labels[b] << "\"," << fmt(s.v_hub) << ',' << k << ',' << fmt(s.hs) << ','
            << fmt(s.tp) << ',' << fmt(s.prob_mass) << ',' << (rs.from_empty_cell[k] ? 1 : 0) << ',' << cell_cols
            << '\n';
      }
      jb["representatives"] = reps;
      const PrincipalAxes& pa = rs.axes;
      jb["pca"] = {{"mean", {pa.mean[0], pa.mean[1]}},
                   {"scale", {pa.scale[0], pa.scale[1]}},
                   {"pc1", {pa.axes(0, 0), pa.axes(1, 0)}},
                   {"pc2", {pa.axes(0, 1), pa.axes(1, 1)}},
                   {"variances", {pa.variances[0], pa.variances[1]}},
                   {"pc1_edges", rs.pc1_edges},
                   {"pc2_edge", rs.pc2_edge}};
    }
    bins.push_back(jb);
  }
  json j = {{"schema_version", 1},
            {"config_hash", out.hash()},
            {"records", study.records.size()},
            {"rejected_rows", study.rejected_rows},
            {"total_mass", m.total_mass()},
            {"notes", notes_json(study)},
            {"bins", bins}};
  out.write("seastates", "json", j.dump(1));
  out.write("seastates_representatives", "csv", csv.str());

  std::ostringstream msg;
  msg << study.records.size() << " records in " << kWindBins << " wind bins; probabilities";
  for (int b = 0; b < kWindBins; ++b)
    msg << ' ' << fixed(m.binned.probability[b], 4);
  msg << "; " << study.domains.size() * 8 << " representative sea states";
  return msg.str();
}

// ---------------------------------------------------------------------------

std::string cmd_simulate(const Study& study, OutputWriter& out, const SimulateRequest& request)
{
  require(request.bin >= 0 && request.bin < kWindBins, "simulate: bin must be 0..3");
  const double v = request.v_hub.value_or(study.metocean.binned.representative_speed[request.bin]);
  require(v >= 0.0, "simulate: wind speed must be non-negative");
  char tag[96];
  std::snprintf(tag, sizeof tag, "simulate_bin%d_v%.3f_hs%.3f_tp%.3f", request.bin, v, request.hs, request.tp);
  const std::string stem = tag;
  out.claim({{stem + "_response", "csv"}, {stem + "_stress", "csv"}, {stem + "_rao", "csv"}, {stem, "json"}});

  const SeaState state{request.bin, v, request.hs, request.tp, 0.0};
  const DetailedEvaluation d = study.evaluator->evaluate_detailed(state);
  const ResponseSpectra& r = d.response.response;
  const FrequencyGrid& grid = r.grid;

  std::ostringstream resp;
  resp << "omega_rad_s,wave_psd,wind_psd,surge,sway,heave,roll,pitch,yaw,tower_top\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    resp << fmt(grid[k]) << ',' << fmt(d.waves.values[k]) << ',' << fmt(d.wind.values[k]);
    for (int dof = 0; dof < kDofs; ++dof)
      resp << ',' << fmt(std::max(r.cross[k](dof, dof).real(), 0.0));
    resp << '\n';
  }
  std::ostringstream stress;
  stress << "omega_rad_s,tower_base_mpa2_s_rad,fairlead_mpa2_s_rad\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    stress << fmt(grid[k]) << ',' << fmt(d.tower_stress.values[k]) << ',' << fmt(d.fairlead_stress.values[k]) << '\n';

  const Vec7 drag = d.response.damping_history.back();
  std::ostringstream rao_csv;
  rao_csv << "omega_rad_s";
  const char* dof_names[kDofs] = {"surge", "sway", "heave", "roll", "pitch", "yaw", "tower_top"};
  for (const char* name : dof_names)
    rao_csv << ',' << name << "_abs," << name << "_phase";
  rao_csv << '\n';
  std::vector<std::vector<Complex>> raos;
  for (int dof = 0; dof < kDofs; ++dof)
    raos.push_back(rao(study.evaluator->tables(), dof, drag));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    rao_csv << fmt(grid[k]);
    for (int dof = 0; dof < kDofs; ++dof)
      rao_csv << ',' << fmt(std::abs(raos[dof][k])) << ',' << fmt(std::arg(raos[dof][k]));
    rao_csv << '\n';
  }

  json hot = json::object();
  const Psd* psds[kHotSpots] = {&d.tower_stress, &d.fairlead_stress};
  for (HotSpot h : kAllHotSpots) {
    const int i = static_cast<int>(h);
    const SpectralMoments m = moments(*psds[i]);
    json entry = {{"m0", m.m0}, {"m1", m.m1}, {"m2", m.m2}, {"m4", m.m4},
                  {"damage", d.summary.hot_spot[i].damage}, {"del_1hz", d.summary.hot_spot[i].del}};
    if (!m.is_zero()) {
      const DirlikParams p = dirlik_params(m);
      entry["alpha2"] = p.alpha2;
      entry["dirlik"] = {{"g1", p.g1}, {"g2", p.g2}, {"g3", p.g3}, {"r", p.r}, {"q", p.q}};
    }
    hot[hot_spot_name(h)] = entry;
  }
  std::vector<double> sigma(r.sigma.data(), r.sigma.data() + kDofs);
  std::vector<double> sigma_v(r.sigma_velocity.data(), r.sigma_velocity.data() + kDofs);
  std::vector<double> damping(drag.data(), drag.data() + kDofs);
  json j = {{"schema_version", 1},
            {"config_hash", out.hash()},
            {"sea_state", {{"bin", request.bin}, {"v_hub", v}, {"hs", request.hs}, {"tp", request.tp}}},
            {"borgman_iterations", d.response.iterations},
            {"borgman_residuals", d.response.residuals},
            {"drag_damping", damping},
            {"sigma", sigma},
            {"sigma_velocity", sigma_v},
            {"hot_spots", hot},
            {"notes", notes_json(study)}};
  out.write(stem + "_response", "csv", resp.str());
  out.write(stem + "_stress", "csv", stress.str());
  out.write(stem + "_rao", "csv", rao_csv.str());
  out.write(stem, "json", j.dump(1));

  std::ostringstream msg;
  msg << "bin " << request.bin << " V=" << fixed(v, 2) << " Hs=" << fixed(request.hs, 2) << " Tp=" << fixed(request.tp, 2)
      << ": Borgman iterations " << d.response.iterations << "; DEL tower base "
      << fixed(d.summary.del(HotSpot::tower_base), 3) << " MPa, fairlead " << fixed(d.summary.del(HotSpot::fairlead), 3)
      << " MPa";
  return msg.str();
}

// ---------------------------------------------------------------------------

std::string cmd_fullgrid(const Study& study, OutputWriter& out)
{
  out.claim({{"fullgrid", "csv"}, {"fullgrid", "json"}});
  const FullGrid g = full_grid(study.domains, *study.evaluator);
  std::ostringstream csv;
  write_full_grid(csv, study.domains, g);

  json bins = json::array();
  std::size_t cells = 0;
  for (std::size_t k = 0; k < study.domains.size(); ++k) {
    json jb = {{"bin", study.domains[k].bin}, {"v_hub", study.domains[k].v_hub}, {"cells", study.domains[k].cells.size()}};
    for (HotSpot h : kAllHotSpots) {
      std::vector<double> del, dmg;
      for (const Evaluation& e : g.cells[k]) {
        del.push_back(e.del(h));
        dmg.push_back(e.damage(h));
      }
      jb[std::string("del_") + hot_spot_name(h)] = del;
      jb[std::string("damage_") + hot_spot_name(h)] = dmg;
    }
    cells += study.domains[k].cells.size();
    bins.push_back(jb);
  }
  json ltd = json::object();
  for (HotSpot h : kAllHotSpots)
    ltd[hot_spot_name(h)] = g.ltd(study.domains, h);
  json j = {{"schema_version", 1},
            {"config_hash", out.hash()},
            {"evaluations", cells},
            {"failures", g.failures},
            {"ltd", ltd},
            {"notes", notes_json(study)},
            {"bins", bins}};
  out.write("fullgrid", "csv", csv.str());
  out.write("fullgrid", "json", j.dump());

  std::ostringstream msg;
  msg << cells << " FD evaluations (" << g.failures << " failures); exact LTD tower base "
      << sci(ltd["tower_base"].get<double>()) << ", fairlead " << sci(ltd["fairlead"].get<double>());
  return msg.str();
}

// ---------------------------------------------------------------------------

std::string cmd_surrogate(const Study& study, OutputWriter& out)
{
  std::vector<std::pair<std::string, std::string>> targets{{"surrogate_summary", "json"}};
  for (HotSpot h : kAllHotSpots) {
    const std::string base = std::string("surrogate_") + hot_spot_name(h);
    for (const char* part : {"_log", "_surface", "_convergence"})
      targets.emplace_back(base + part, "csv");
    targets.emplace_back(base + "_models", "json");
  }
  out.claim(targets);

  std::optional<ReferenceGrid> ref;
  if (out.read("fullgrid", "json"))
    ref.emplace(study, out);

  // FD results are shared between the hot-spot loops; each loop still counts its own evaluations.
  std::map<std::pair<int, std::size_t>, Evaluation> cache;
  json summary_hot = json::object();
  std::ostringstream msg;
  for (HotSpot h : kAllHotSpots) {
    const AlSettings st = study.config.al_settings(h);
    const DelFunction del = [&](const BinDomain& d, std::size_t c) {
      const auto key = std::make_pair(d.bin, c);
      auto it = cache.find(key);
      if (it == cache.end())
        it = cache.emplace(key, study.evaluator->evaluate(d.state(c))).first;
      return it->second.del(h);
    };
    InitResult init = init_surfaces(study.domains, del, st);
    const std::size_t initial = init.evaluations;
    LoopResult res = run_loop(init.surfaces, del, st, study.config.budget, initial);
    const std::string base = std::string("surrogate_") + hot_spot_name(h);

    std::ostringstream log_csv;
    write_iteration_log(log_csv, res.log);

    std::optional<double> exact;
    if (ref)
      exact = ref->ltd(h);

    std::ostringstream surf;
    surf << "bin,cell,hs,tp,prob_mass,del_mean,del_sd,damage,evaluated";
    if (ref)
      surf << ",del_exact,damage_exact,damage_residual";
    surf << '\n';
    json damage_arrays = json::array();
    json models = json::array();
    for (std::size_t k = 0; k < init.surfaces.size(); ++k) {
      const BinSurface& s = init.surfaces[k];
      std::vector<char> evaluated(s.domain->cells.size(), 0);
      for (std::size_t c : s.evaluated)
        evaluated[c] = 1;
      std::vector<double> dmg;
      for (std::size_t c = 0; c < s.domain->cells.size(); ++c) {
        const Prediction& p = s.predictions[c];
        const double dd = predicted_damage(p.mean, st.sn, st.exposure);
        dmg.push_back(dd);
        surf << s.domain->bin << ',' << c << ',' << fmt(s.domain->cells[c][0]) << ',' << fmt(s.domain->cells[c][1]) << ','
             << fmt(s.domain->prob_mass[c]) << ',' << fmt(p.mean) << ',' << fmt(p.sd) << ',' << fmt(dd) << ','
             << int(evaluated[c]);
        if (ref) {
          const double de = ref->damage(h, k, c);
          surf << ',' << fmt(ref->del(h, k, c)) << ',' << fmt(de) << ',' << fmt((dd - de) * s.domain->prob_mass[c]);
        }
        surf << '\n';
      }
      damage_arrays.push_back(dmg);
      models.push_back({{"bin", s.domain->bin}, {"model", json::parse(s.model->to_json())}});
    }

    std::ostringstream conv;
    conv << "evaluations,ltd" << (exact ? ",relative_error" : "") << '\n';
    for (std::size_t i = 0; i < res.log.size(); ++i) {
      if (res.log[i].iteration == 0 && i + 1 < res.log.size() && res.log[i + 1].iteration == 0)
        continue;
      conv << res.log[i].evaluations << ',' << fmt(res.log[i].ltd);
      if (exact)
        conv << ',' << fmt((res.log[i].ltd - *exact) / *exact);
      conv << '\n';
    }

    json entry = {{"ltd", res.ltd},
                  {"initial_evaluations", initial},
                  {"evaluations", res.evaluations},
                  {"iterations", res.iterations},
                  {"converged", res.converged},
                  {"exhausted", res.exhausted},
                  {"bin_damage", bin_damages(init.surfaces)},
                  {"damage", damage_arrays}};
    msg << hot_spot_name(h) << ": LTD " << sci(res.ltd) << " after " << res.evaluations << " evaluations"
        << (res.converged ? " (converged)" : " (not converged)");
    if (exact) {
      const double err = (res.ltd - *exact) / *exact;
      entry["exact_ltd"] = *exact;
      entry["relative_error"] = err;
      const auto need = loop_evaluations_to(res.log, *exact, study.config.target_error);
      entry["evaluations_to_target"] = need ? json(*need) : json(nullptr);
      msg << ", error " << fixed(100.0 * err, 3) << " %";
    }
    msg << '\n';
    summary_hot[hot_spot_name(h)] = entry;

    out.write(base + "_log", "csv", log_csv.str());
    out.write(base + "_surface", "csv", surf.str());
    out.write(base + "_convergence", "csv", conv.str());
    out.write(base + "_models", "json", models.dump());
  }
  json j = {{"schema_version", 1},
            {"config_hash", out.hash()},
            {"fd_solves", cache.size()},
            {"target_error", study.config.target_error},
            {"reference_available", ref.has_value()},
            {"notes", notes_json(study)},
            {"hot_spots", summary_hot}};
  out.write("surrogate_summary", "json", j.dump());
  msg << cache.size() << " distinct FD solves";
  return msg.str();
}

// ---------------------------------------------------------------------------

std::string cmd_mcs(const Study& study, OutputWriter& out)
{
  std::vector<std::pair<std::string, std::string>> targets{{"mcs_summary", "json"}};
  for (HotSpot h : kAllHotSpots) {
    targets.emplace_back(std::string("mcs_") + hot_spot_name(h) + "_trace", "csv");
    targets.emplace_back(std::string("mcs_") + hot_spot_name(h) + "_boxplot", "csv");
  }
  out.claim(targets);

  ReferenceGrid ref(study, out);
  std::optional<json> surrogate;
  if (const auto text = out.read("surrogate_summary", "json"))
    surrogate = parse_output(*text, "surrogate summary");

  const std::size_t n = study.config.mcs_samples;
  const int reps = study.config.mcs_repetitions;
  const std::vector<std::size_t> marks = checkpoints(n);
  const std::uint64_t mcs_seed = derive_seed(study.config.master_seed, "mcs");
  const double tol = study.config.target_error;

  json summary_hot = json::object();
  std::ostringstream msg;
  for (HotSpot h : kAllHotSpots) {
    const std::string name = hot_spot_name(h);
    const DamageLookup exact_damage = [&](std::size_t k, std::size_t c) { return ref.damage(h, k, c); };
    std::vector<std::vector<double>> sur_damage;
    if (surrogate)
      sur_damage = (*surrogate)["hot_spots"][name]["damage"].get<std::vector<std::vector<double>>>();
    const DamageLookup sur_lookup = [&](std::size_t k, std::size_t c) { return sur_damage.at(k).at(c); };

    std::vector<std::vector<double>> at_mark_exact(marks.size()), at_mark_sur(marks.size());
    std::vector<double> needs;
    std::size_t censored = 0;
    std::ostringstream box, trace_csv;
    box << "repetition,n,exact_surface" << (surrogate ? ",surrogate_surface" : "") << '\n';
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t seed = derive_seed(mcs_seed, static_cast<std::uint64_t>(r));
      const std::vector<double> trace = mcs_trace(study.domains, exact_damage, n, seed);
      std::vector<double> strace;
      if (surrogate)
        strace = mcs_trace(study.domains, sur_lookup, n, seed);
      if (r == 0) {
        trace_csv << "n,ltd_estimate\n";
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t m = i + 1;
          if (m <= 1000 || (m <= 10000 && m % 10 == 0) || m % 100 == 0 || m == n)
            trace_csv << m << ',' << fmt(trace[i]) << '\n';
        }
      }
      const double exact_ltd = ref.ltd(h);
      const auto need = sustained_within(trace, exact_ltd, tol);
      if (need)
        needs.push_back(static_cast<double>(*need));
      else {
        needs.push_back(static_cast<double>(n + 1));
        ++censored;
      }
      for (std::size_t k = 0; k < marks.size(); ++k) {
        at_mark_exact[k].push_back(trace[marks[k] - 1]);
        box << r << ',' << marks[k] << ',' << fmt(trace[marks[k] - 1]);
        if (surrogate) {
          at_mark_sur[k].push_back(strace[marks[k] - 1]);
          box << ',' << fmt(strace[marks[k] - 1]);
        }
        box << '\n';
      }
    }
    const double exact_ltd = ref.ltd(h);
    double med_need = median(needs);
    // Censored runs sort last; the median is only a bound once one of them enters it.
    std::sort(needs.begin(), needs.end());
    const bool need_bound = !needs.empty() && needs[needs.size() / 2] > static_cast<double>(n);
    if (need_bound)
      med_need = std::min(med_need, static_cast<double>(n));
    json medians = json::array();
    for (std::size_t k = 0; k < marks.size(); ++k) {
      json row = {{"n", marks[k]}, {"exact_surface", median(at_mark_exact[k])}};
      if (surrogate) {
        const double ms = median(at_mark_sur[k]);
        row["surrogate_surface"] = ms;
        row["relative_difference"] = (ms - median(at_mark_exact[k])) / median(at_mark_exact[k]);
      }
      medians.push_back(row);
    }
    summary_hot[name] = {{"exact_ltd", exact_ltd},
                         {"median_evaluations_to_target", med_need},
                         {"censored_repetitions", censored},
                         {"median_is_lower_bound", need_bound},
                         {"medians", medians}};
    out.write("mcs_" + name + "_trace", "csv", trace_csv.str());
    out.write("mcs_" + name + "_boxplot", "csv", box.str());
    msg << name << ": MCS needs " << (need_bound ? ">= " : "") << fmt(med_need)
        << " evaluations (median of " << reps << ") for " << fixed(100.0 * tol, 2) << " % error\n";
  }
  std::vector<std::string> notes = study.notes;
  if (!ref.stored())
    notes.push_back("no stored full grid; " + std::to_string(ref.solves()) + " cells evaluated on demand");
  json j = {{"schema_version", 1},
            {"config_hash", out.hash()},
            {"samples", n},
            {"repetitions", reps},
            {"target_error", tol},
            {"surrogate_available", surrogate.has_value()},
            {"notes", notes},
            {"hot_spots", summary_hot}};
  out.write("mcs_summary", "json", j.dump(1));
  std::string s = msg.str();
  if (!s.empty())
    s.pop_back();
  return s;
}

// ---------------------------------------------------------------------------

std::string cmd_report(const RunConfig& config, OutputWriter& out)
{
  out.claim({{"report", "json"}, {"report", "txt"}});
  std::optional<json> fullgrid, surrogate, mcs;
  if (const auto t = out.read("fullgrid", "json"))
    fullgrid = parse_output(*t, "full-grid output");
  if (const auto t = out.read("surrogate_summary", "json"))
    surrogate = parse_output(*t, "surrogate summary");
  if (const auto t = out.read("mcs_summary", "json"))
    mcs = parse_output(*t, "MCS summary");
  if (!fullgrid && !surrogate && !mcs)
    throw ValidationError("report: no fullgrid, surrogate or mcs outputs for config " + config.hash() + " in " +
                          config.output_dir);

  std::vector<std::string> notes;
  for (const auto* src : {&fullgrid, &surrogate, &mcs})
    if (*src)
      for (const auto& n : (**src)["notes"])
        if (std::find(notes.begin(), notes.end(), n.get<std::string>()) == notes.end())
          notes.push_back(n.get<std::string>());

  json hot = json::object();
  std::ostringstream txt;
  txt << "Long-term fatigue damage report (config " << config.hash() << ", T = " << fmt(config.evaluator.exposure)
      << " s)\n\n";
  for (HotSpot h : kAllHotSpots) {
    const std::string name = hot_spot_name(h);
    json e = json::object();
    txt << name << '\n';
    if (fullgrid) {
      e["exact_ltd"] = (*fullgrid)["ltd"][name];
      e["fullgrid_evaluations"] = (*fullgrid)["evaluations"];
      txt << "  full-grid LTD        " << sci(e["exact_ltd"].get<double>()) << "  (" << e["fullgrid_evaluations"].get<std::size_t>()
          << " FD evaluations)\n";
    }
    std::optional<double> al_need, mcs_need;
    bool mcs_bound = false;
    if (surrogate) {
      const json& s = (*surrogate)["hot_spots"][name];
      e["surrogate_ltd"] = s["ltd"];
      e["surrogate_evaluations"] = s["evaluations"];
      e["surrogate_converged"] = s["converged"];
      txt << "  surrogate LTD        " << sci(s["ltd"].get<double>()) << "  (" << s["evaluations"].get<std::size_t>()
          << " FD evaluations, " << (s["converged"].get<bool>() ? "converged" : "not converged") << ")\n";
      if (s.contains("relative_error")) {
        e["relative_error"] = s["relative_error"];
        txt << "  surrogate error      " << fixed(100.0 * s["relative_error"].get<double>(), 3) << " %\n";
      }
      if (s.contains("evaluations_to_target") && !s["evaluations_to_target"].is_null()) {
        al_need = s["evaluations_to_target"].get<double>();
        e["surrogate_evaluations_to_target"] = *al_need;
      }
    }
    if (mcs) {
      const json& m = (*mcs)["hot_spots"][name];
      mcs_need = m["median_evaluations_to_target"].get<double>();
      mcs_bound = m["median_is_lower_bound"].get<bool>();
      e["mcs_median_evaluations_to_target"] = *mcs_need;
      e["mcs_median_is_lower_bound"] = mcs_bound;
      txt << "  MCS evaluations      " << (mcs_bound ? ">= " : "") << fmt(*mcs_need)
          << "  (median over " << (*mcs)["repetitions"].get<int>() << " seeds, to "
          << fixed(100.0 * (*mcs)["target_error"].get<double>(), 2) << " % error)\n";
      const json& med = m["medians"].back();
      if (med.contains("relative_difference"))
        txt << "  MCS median at n=" << med["n"].get<std::size_t>() << "  surrogate vs exact surface "
            << fixed(100.0 * med["relative_difference"].get<double>(), 3) << " %\n";
    }
    if (al_need && mcs_need) {
      const double ratio = *mcs_need / *al_need;
      e["speedup_ratio"] = ratio;
      e["speedup_is_lower_bound"] = mcs_bound;
      txt << "  surrogate evaluations to target " << fmt(*al_need) << "; MCS/surrogate ratio "
          << (mcs_bound ? ">= " : "") << fixed(ratio, 1) << '\n';
    }
    hot[name] = e;
    txt << '\n';
  }
  if (!notes.empty()) {
    txt << "notes\n";
    for (const auto& n : notes)
      txt << "  - " << n << '\n';
  }
  json j = {{"schema_version", 1}, {"config_hash", config.hash()}, {"hot_spots", hot}, {"notes", notes}};
  out.write("report", "json", j.dump(1));
  out.write("report", "txt", txt.str());
  return txt.str();
}

std::string cmd_generate_site(std::uint64_t seed, double years, const std::string& path, bool overwrite)
{
  if (!overwrite && fs::exists(path))
    throw ValidationError("refusing to overwrite existing file " + path + " (pass --overwrite)");
  SyntheticSiteOptions o;
  o.years = years;
  const auto records = synthetic_site(seed, o);
  if (const auto parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream f(path + ".partial", std::ios::binary | std::ios::trunc);
  if (!f)
    throw ValidationError("cannot write " + path);
  write_records(f, records);
  f.close();
  fs::rename(path + ".partial", path);
  return std::to_string(records.size()) + " hourly records written to " + path;
}

} // namespace fowt
