#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdgskin/impurity.hpp"
#include "bdgskin/lattice.hpp"

namespace bdgskin {

/// Config validation failure; `line` is 0 when the problem is not tied to one line.
class ConfigError : public DomainError {
 public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

enum class Analysis { Spectrum, Fd, Sensitivity, Greens, Nonbloch };

std::string_view to_string(Analysis a);
std::optional<Analysis> parse_analysis(std::string_view s);

struct LatticeConfig {
  std::string shape = "rectangle";  // rectangle | oblique
  int lx = 10;
  int ly = 10;
  int side = 10;
  double tilt_deg = 0.0;
  Boundary bc_x = Boundary::Open;
  Boundary bc_y = Boundary::Open;

  LatticeSpec build() const;
};

struct AnalysisOptions {
  /// Sensitivity threshold; unset selects 0.02 x clean diameter.
  std::optional<double> epsilon;
  /// Energies scanned by the greens and nonbloch analyses.
  std::vector<cplx> energies;
  /// fd: eigenstate nearest this energy gets a layer-density fit and a vector dump.
  std::optional<cplx> target_energy;
  int ky_points = 256;
  int theta_points = 256;
  int fd_bins = 20;
  double margin_min = 0.05;
  /// fd fit window, 1-based inclusive; 0 selects [L/4, 3L/4].
  int fit_first = 0;
  int fit_last = 0;
};

struct ExperimentConfig {
  Analysis analysis = Analysis::Spectrum;
  std::string out_dir = "out";
  ModelParams model;
  LatticeConfig lattice;
  ImpuritySpec impurities;
  AnalysisOptions options;

  /// Cross-field checks (lattice buildable, impurities on the lattice, analysis needs).
  void validate() const;
};

/// Parses the TOML subset: top-level `analysis` and `out_dir`, tables [model], [lattice],
/// [impurities], [options]. Complex numbers are [re, im]. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse(emit(c)) emits identically.
std::string emit_config(const ExperimentConfig& config);

}  // namespace bdgskin
