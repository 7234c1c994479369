#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bdgskin/config.hpp"

namespace bdgskin {

std::string_view tool_version();

struct ArtifactFile {
  std::string name;  // relative to the run directory
  std::vector<std::string> columns;
  std::size_t rows = 0;
};

/// Result of one run; mirrored to manifest.json in the run directory.
struct RunManifest {
  ExperimentConfig config;
  std::filesystem::path directory;
  double wall_seconds = 0.0;
  std::vector<ArtifactFile> files;
  /// Analysis-specific headline numbers, emitted under "summary".
  std::map<std::string, double> summary;
};

struct RunOptions {
  int threads = 1;
};

/// Runs the configured analysis and writes CSVs plus manifest.json into `out_dir`
/// (created if missing). Overrides config.out_dir for the manifest.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                const RunOptions& options = {});
inline RunManifest run(const ExperimentConfig& config, const RunOptions& options = {}) {
  return run(config, config.out_dir, options);
}

enum class Scale { Desk, Full };

struct FigurePanel {
  std::string id;
  ExperimentConfig config;
};

/// Panels of fig2, fig3, fig4 or fig5, optionally panel-qualified (e.g. fig3h). Desk scale
/// uses 20x20 lattices (16x16 cylinders for the Green's-function panels), full scale 50x50.
std::vector<FigurePanel> figure_panels(std::string_view figure_id, Scale scale);

struct ReproduceResult {
  std::filesystem::path directory;
  std::vector<RunManifest> panels;
};

/// Runs every panel into `<out_dir>/<panel>` and writes `<out_dir>/manifest.json` listing
/// them; fig5 also gets mu_signs.csv.
ReproduceResult reproduce(std::string_view figure_id, Scale scale,
                          const std::filesystem::path& out_dir, const RunOptions& options = {});

}  // namespace bdgskin
