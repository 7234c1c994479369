#include <dlfcn.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "bdgskin/config.hpp"
#include "bdgskin/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 1;

// OpenBLAS reads its thread count at load time, so it has to be set through its API.
void set_blas_threads(int n) {
  using Setter = void (*)(int);
  if (auto f = reinterpret_cast<Setter>(dlsym(RTLD_DEFAULT, "openblas_set_num_threads"))) f(n);
}

void print_run(const bdgskin::RunManifest& m) {
  fmt::print("{} -> {} ({} files, {:.2f} s)\n", bdgskin::to_string(m.config.analysis),
             m.directory.string(), m.files.size(), m.wall_seconds);
  for (const auto& [k, v] : m.summary) fmt::print("  {} = {:.6g}\n", k, v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bosonic BdG lattice spectra, skin-effect diagnostics and impurity sensitivity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bdgskin::tool_version()));

  std::string config_path, out_dir, figure, scale = "desk";
  int threads = 1;

  auto* run = app.add_subcommand("run", "Run the analysis described by a config file");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides out_dir in the config)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  auto* validate = app.add_subcommand("validate", "Parse and check a config, print its canonical form");
  validate->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  auto* repro = app.add_subcommand("reproduce", "Run the preset panels of a figure");
  repro->add_option("figure", figure, "fig2, fig3, fig4, fig5 or a panel id such as fig3h")->required();
  repro->add_option("--scale", scale, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  repro->add_option("--out", out_dir, "Output directory")->required();
  repro->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  set_blas_threads(threads);
  const bdgskin::RunOptions options{threads};
  try {
    if (*validate) {
      const auto c = bdgskin::load_config(config_path);
      fmt::print("{}", bdgskin::emit_config(c));
    } else if (*run) {
      const auto c = bdgskin::load_config(config_path);
      print_run(out_dir.empty() ? bdgskin::run(c, options) : bdgskin::run(c, out_dir, options));
    } else if (*repro) {
      const auto s = scale == "full" ? bdgskin::Scale::Full : bdgskin::Scale::Desk;
      const auto r = bdgskin::reproduce(figure, s, out_dir, options);
      for (const auto& m : r.panels) print_run(m);
    }
  } catch (const bdgskin::DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const bdgskin::NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "i/o error: {}\n", e.what());
    return kExitIo;
  } catch (const std::runtime_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitIo;
  }
  return 0;
}
