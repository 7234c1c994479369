#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdgskin/lattice.hpp"
#include "bdgskin/spectral.hpp"

namespace bdgskin {

struct OnsiteImpurity {
  Site site;
  double v = 0.0;
};

/// t_p (a+_{site_a} a_{site_b} + h.c.)
struct HoppingImpurity {
  Site site_a;
  Site site_b;
  double t_p = 0.0;
};

struct ImpuritySpec {
  std::vector<OnsiteImpurity> onsite;
  std::vector<HoppingImpurity> hopping;

  bool empty() const { return onsite.empty() && hopping.empty(); }
  /// Throws DomainError for sites outside the lattice, duplicate on-site entries, or
  /// non-finite strengths.
  void validate(const LatticeSpec& lattice) const;
};

/// BdG representation of the impurity potential: V on the particle and hole diagonal of
/// each on-site impurity, t_p on the (a,b)/(b,a) entries of both blocks, zero pairing.
/// The constant -(ΣV)/2 produced by normal ordering is dropped.
CMatrix impurity_bdg(const ImpuritySpec& spec, const LatticeSpec& lattice);

/// m_dyn + tau_z * v.
CMatrix perturbed_dynamical(const CMatrix& m_dyn, const CMatrix& v);

struct EpsilonCount {
  double epsilon = 0.0;
  std::size_t new_states = 0;
  std::size_t vanished_states = 0;
};

struct SensitivityRun {
  Spectrum clean;
  Spectrum perturbed;
  SensitivityReport report;
  /// Counts at 0.5x, 1x and 2x the chosen epsilon.
  std::vector<EpsilonCount> epsilon_sweep;
  /// Hausdorff distance between the clean and perturbed spectra.
  double displacement = 0.0;
};

struct SensitivityOptions {
  std::optional<double> epsilon;  // default 0.02 x clean diameter
  bool compute_vectors = false;
  std::size_t max_dimension = 6400;
  bool concurrent = false;  // diagonalize clean and perturbed on separate threads
};

SensitivityRun run_sensitivity(const ModelParams& params, const LatticeSpec& lattice,
                               const ImpuritySpec& spec, const SensitivityOptions& options = {});

/// Named experiment of the impurity study: model, cylinder lattice and impurity layout.
struct SensitivityPreset {
  std::string name;
  ModelParams params;
  LatticeSpec lattice;
  ImpuritySpec impurities;
};

/// fig3c, fig3d (first model), fig3g, fig3h (second model), fig4a, fig4b; `size` is the
/// cylinder extent in both directions (20 desk, 50 full).
SensitivityPreset sensitivity_preset(std::string_view name, int size);
const std::vector<std::string>& sensitivity_preset_names();

/// Model of the algebraic skin-effect demonstration, (J_x,J_y,J_xy,Δ0,Δ_x) = (i,1,3i,-1,2i).
ModelParams skin_effect_params();
/// Solvable model of the impurity study, (0, i, 4i, 3, 2).
ModelParams impurity_study_params();

struct RangeSweepPoint {
  Site target;
  std::size_t new_states = 0;
  std::size_t vanished_states = 0;
  double displacement = 0.0;
};

/// Hopping impurity from `origin` to (x, target_y) for each x in `xs`.
std::vector<RangeSweepPoint> hopping_range_sweep(const ModelParams& params,
                                                 const LatticeSpec& lattice, Site origin,
                                                 int target_y, const std::vector<int>& xs,
                                                 double t_p,
                                                 std::optional<double> epsilon = std::nullopt);

}  // namespace bdgskin
