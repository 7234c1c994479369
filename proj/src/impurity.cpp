#include "bdgskin/impurity.hpp"

#include <cmath>
#include <future>

#include <fmt/format.h>

namespace bdgskin {

void ImpuritySpec::validate(const LatticeSpec& lattice) const {
  std::vector<std::size_t> seen;
  for (const auto& imp : onsite) {
    if (!std::isfinite(imp.v)) throw DomainError("on-site impurity strength must be finite");
    const std::size_t idx = lattice.require_index(imp.site);
    for (auto s : seen)
      if (s == idx)
        throw DomainError(
            fmt::format("duplicate on-site impurity at ({}, {})", imp.site.x, imp.site.y));
    seen.push_back(idx);
  }
  for (const auto& hop : hopping) {
    if (!std::isfinite(hop.t_p)) throw DomainError("hopping impurity strength must be finite");
    lattice.require_index(hop.site_a);
    lattice.require_index(hop.site_b);
  }
}

CMatrix impurity_bdg(const ImpuritySpec& spec, const LatticeSpec& lattice) {
  spec.validate(lattice);
  const auto n = static_cast<Eigen::Index>(lattice.size());
  CMatrix v = CMatrix::Zero(2 * n, 2 * n);
  for (const auto& imp : spec.onsite) {
    const auto i = static_cast<Eigen::Index>(lattice.require_index(imp.site));
    v(i, i) += imp.v;
    v(n + i, n + i) += imp.v;
  }
  for (const auto& hop : spec.hopping) {
    const auto a = static_cast<Eigen::Index>(lattice.require_index(hop.site_a));
    const auto b = static_cast<Eigen::Index>(lattice.require_index(hop.site_b));
    // Particle block t(a,b) + t(b,a); the hole block is its transpose, identical for real t.
    v(a, b) += hop.t_p;
    v(b, a) += hop.t_p;
    v(n + a, n + b) += hop.t_p;
    v(n + b, n + a) += hop.t_p;
  }
  return v;
}

CMatrix perturbed_dynamical(const CMatrix& m_dyn, const CMatrix& v) {
  if (m_dyn.rows() != v.rows() || m_dyn.cols() != v.cols())
    throw DomainError(fmt::format("dimension mismatch: M is {}x{}, V is {}x{}", m_dyn.rows(),
                                  m_dyn.cols(), v.rows(), v.cols()));
  return m_dyn + apply_tau_z(v);
}

SensitivityRun run_sensitivity(const ModelParams& params, const LatticeSpec& lattice,
                               const ImpuritySpec& spec, const SensitivityOptions& options) {
  const auto op = assemble_bdg(params, lattice, {.max_dimension = options.max_dimension});
  const CMatrix m_pert = perturbed_dynamical(op.m_dyn, impurity_bdg(spec, lattice));
  const DiagonalizeOptions diag{.compute_vectors = options.compute_vectors,
                                .max_dimension = options.max_dimension};

  SensitivityRun run;
  if (options.concurrent) {
    auto clean = std::async(std::launch::async, [&] { return diagonalize(op.m_dyn, diag); });
    run.perturbed = diagonalize(m_pert, diag);
    run.clean = clean.get();
  } else {
    run.clean = diagonalize(op.m_dyn, diag);
    run.perturbed = diagonalize(m_pert, diag);
  }

  const auto clean = as_span(run.clean.eigenvalues);
  const auto pert = as_span(run.perturbed.eigenvalues);
  run.report = compare_spectra(clean, pert, options.epsilon);
  for (double factor : {0.5, 1.0, 2.0}) {
    const auto r = compare_spectra(clean, pert, factor * run.report.epsilon);
    run.epsilon_sweep.push_back({r.epsilon, r.new_states.size(), r.vanished_states.size()});
  }
  run.displacement = hausdorff_distance(clean, pert);
  return run;
}

ModelParams skin_effect_params() {
  return ModelParams::couplings(kI, 1.0, 3.0 * kI, -1.0, 2.0 * kI);
}

ModelParams impurity_study_params() {
  return ModelParams::couplings(0.0, kI, 4.0 * kI, 3.0, 2.0);
}

const std::vector<std::string>& sensitivity_preset_names() {
  static const std::vector<std::string> names{"fig3c", "fig3d", "fig3g", "fig3h", "fig4a", "fig4b"};
  return names;
}

SensitivityPreset sensitivity_preset(std::string_view name, int size) {
  if (size < 5) throw DomainError("sensitivity presets need a lattice of at least 5x5");
  const Site r1{1, 1};
  const Site r2{size, size / 2};
  constexpr double v = 0.01;

  SensitivityPreset p{std::string(name), {}, cylinder(size, size), {}};
  if (name == "fig3c" || name == "fig3d") {
    p.params = skin_effect_params();
  } else {
    p.params = impurity_study_params();
  }

  if (name == "fig3c" || name == "fig3g") {
    p.impurities.onsite = {{r1, v}};
  } else if (name == "fig3d" || name == "fig3h") {
    p.impurities.onsite = {{r1, v}, {r2, v}};
  } else if (name == "fig4a") {
    p.impurities.hopping = {{r1, {3 * size / 5, size / 2}, 0.01}};
  } else if (name == "fig4b") {
    p.impurities.hopping = {{r1, r2, 0.005}};
  } else {
    throw DomainError(fmt::format("unknown sensitivity preset '{}'", name));
  }
  return p;
}

std::vector<RangeSweepPoint> hopping_range_sweep(const ModelParams& params,
                                                 const LatticeSpec& lattice, Site origin,
                                                 int target_y, const std::vector<int>& xs,
                                                 double t_p, std::optional<double> epsilon) {
  const auto op = assemble_bdg(params, lattice);
  const CVector clean = eigenvalues_of(op.m_dyn);
  const double eps = epsilon ? *epsilon : kDefaultEpsilonFraction * spectral_diameter(as_span(clean));

  std::vector<RangeSweepPoint> out;
  for (int x : xs) {
    ImpuritySpec spec;
    spec.hopping = {{origin, {x, target_y}, t_p}};
    const CVector pert = eigenvalues_of(perturbed_dynamical(op.m_dyn, impurity_bdg(spec, lattice)));
    const auto r = compare_spectra(as_span(clean), as_span(pert), eps);
    out.push_back({{x, target_y}, r.new_states.size(), r.vanished_states.size(),
                   hausdorff_distance(as_span(clean), as_span(pert))});
  }
  return out;
}

}  // namespace bdgskin
