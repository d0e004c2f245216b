#include "fowt/commands.hpp"
#include "fowt/errors.hpp"
#include "fowt/log.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

namespace {

enum ExitCode
{
  kOk = 0,
  kValidation = 1,
  kNumerical = 2
};

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Long-term fatigue damage of a floating offshore wind turbine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fowt-fatigue 0.1.0");

  std::string config_path;
  std::string output_dir;
  bool overwrite = false;
  bool verbose = false;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", output_dir, "Override the configured output directory");
    sub->add_flag("--overwrite", overwrite, "Replace existing outputs for this configuration");
    sub->add_flag("-v,--verbose", verbose, "Debug logging");
    sub->add_flag("-q,--quiet", quiet, "Errors only");
  };

  auto* seastates = app.add_subcommand("seastates", "Wind bins, KDE grids and representative sea states");
  auto* simulate = app.add_subcommand("simulate", "One frequency-domain run: response and stress PSDs");
  auto* fullgrid = app.add_subcommand("fullgrid", "Exhaustive reference damage surfaces");
  auto* surrogate = app.add_subcommand("surrogate", "Active-learning GPR surrogate per wind bin");
  auto* mcs = app.add_subcommand("mcs", "Monte Carlo traces and repeated-seed box-plot data");
  auto* report = app.add_subcommand("report", "Summary of the outputs for a configuration");
  auto* config_cmd = app.add_subcommand("config", "Print the canonical configuration and its hash");
  for (auto* sub : {seastates, simulate, fullgrid, surrogate, mcs, report, config_cmd})
    add_common(sub);

  fowt::SimulateRequest request;
  double v_hub = -1.0;
  simulate->add_option("--bin", request.bin, "Wind bin index 0..3")->check(CLI::Range(0, 3));
  simulate->add_option("--hs", request.hs, "Significant wave height [m]")->check(CLI::NonNegativeNumber);
  simulate->add_option("--tp", request.tp, "Spectral peak period [s]")->check(CLI::PositiveNumber);
  auto* v_opt = simulate->add_option("--v-hub", v_hub, "Hub-height wind speed [m/s] (default: bin representative)")
                  ->check(CLI::NonNegativeNumber);

  auto* gen_site = app.add_subcommand("gen-site", "Write a synthetic hourly metocean file");
  std::uint64_t site_seed = 2024;
  double years = 28.5;
  std::string site_path;
  gen_site->add_option("--seed", site_seed, "Random seed");
  gen_site->add_option("--years", years, "Record length in years")->check(CLI::PositiveNumber);
  gen_site->add_option("--out", site_path, "Output CSV path")->required();
  gen_site->add_flag("--overwrite", overwrite, "Replace an existing file");
  gen_site->add_flag("-q,--quiet", quiet, "Errors only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  fowt::log::set_level(quiet ? fowt::log::Level::error : verbose ? fowt::log::Level::debug : fowt::log::Level::info);

  try {
    if (gen_site->parsed()) {
      const std::string msg = fowt::cmd_generate_site(site_seed, years, site_path, overwrite);
      if (!quiet)
        std::cout << msg << '\n';
      return kOk;
    }

    fowt::RunConfig config = fowt::RunConfig::load(config_path);
    if (!output_dir.empty())
      config.output_dir = output_dir;
    if (config_cmd->parsed()) {
      std::cout << config.to_json() << '\n' << "hash " << config.hash() << '\n';
      return kOk;
    }
    fowt::OutputWriter out(config.output_dir, config.hash(), overwrite);

    std::string msg;
    if (report->parsed()) {
      msg = fowt::cmd_report(config, out);
    } else {
      const fowt::Study study = fowt::Study::build(config);
      if (seastates->parsed())
        msg = fowt::cmd_seastates(study, out);
      else if (simulate->parsed()) {
        if (v_opt->count() > 0)
          request.v_hub = v_hub;
        msg = fowt::cmd_simulate(study, out, request);
      } else if (fullgrid->parsed())
        msg = fowt::cmd_fullgrid(study, out);
      else if (surrogate->parsed())
        msg = fowt::cmd_surrogate(study, out);
      else if (mcs->parsed())
        msg = fowt::cmd_mcs(study, out);
    }
    if (!quiet) {
      std::cout << msg;
      if (!msg.empty() && msg.back() != '\n')
        std::cout << '\n';
      for (const auto& path : out.written())
        std::cout << "wrote " << path << '\n';
    }
    return kOk;
  } catch (const fowt::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kValidation;
  } catch (const fowt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
