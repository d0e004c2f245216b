#pragma once

#include "fowt/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fowt {

/// Writes `<stem>_<config hash>.<ext>` files into the output directory.
/// Targets are claimed before any work starts; existing files are never
/// replaced unless overwriting was requested. Each file is written to a
/// temporary name and renamed into place.
class OutputWriter
{
public:
  OutputWriter(std::string directory, std::string hash, bool overwrite = false);

  std::string path(const std::string& stem, const std::string& ext) const;
  /// Fails with ValidationError listing every target that already exists.
  void claim(const std::vector<std::pair<std::string, std::string>>& targets) const;
  std::string write(const std::string& stem, const std::string& ext, const std::string& content);
  /// Contents of a previously written output, if present.
  std::optional<std::string> read(const std::string& stem, const std::string& ext) const;

  const std::vector<std::string>& written() const { return written_; }
  const std::string& hash() const { return hash_; }

private:
  std::string dir_;
  std::string hash_;
  bool overwrite_;
  std::vector<std::string> written_;
};

struct SimulateRequest
{
  int bin = 1;
  double hs = 1.5;
  double tp = 6.0;
  std::optional<double> v_hub; ///< defaults to the bin's representative speed
};

/// Each command returns a short human-readable summary.
std::string cmd_seastates(const Study& study, OutputWriter& out);
std::string cmd_simulate(const Study& study, OutputWriter& out, const SimulateRequest& request);
std::string cmd_fullgrid(const Study& study, OutputWriter& out);
std::string cmd_surrogate(const Study& study, OutputWriter& out);
std::string cmd_mcs(const Study& study, OutputWriter& out);
std::string cmd_report(const RunConfig& config, OutputWriter& out);

/// Synthetic metocean file for experiments and examples.
std::string cmd_generate_site(std::uint64_t seed, double years, const std::string& path, bool overwrite);

} // namespace fowt
