// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [--full] [id ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bdgskin/greens.hpp"
#include "bdgskin/impurity.hpp"
#include "bdgskin/nonbloch.hpp"
#include "bdgskin/spectral.hpp"

using namespace bdgskin;

namespace {

// Tolerances.
constexpr double kPhTol = 1e-8;
constexpr double kTorusTol = 1e-8;
constexpr double kFdFraction = 0.5;
constexpr double kBlockResidualTol = 1e-10;
constexpr double kBlockSpectrumTol = 1e-8;
constexpr double kResponseTol = 1e-8;
constexpr double kResidueTol = 0.05;
constexpr double kSlopeTol = 0.30;

const SolvableParams kStudy{1, 4, 3, 2};
const cplx kEnergyUp{0.85, 7.59};
const cplx kEnergyDown{-2.12, -7.63};

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

struct Context {
  bool full = false;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome(const Context&)> check;
};

cplx random_complex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return {u(rng), u(rng)};
}

ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  ModelParams p = ModelParams::couplings(random_complex(rng), random_complex(rng), random_complex(rng),
                                         random_complex(rng), random_complex(rng));
  p.omega0 = u(rng);
  return p;
}

Outcome ph_closure(const Context&) {
  std::mt19937_64 rng(8080);
  const auto lat = rectangle(8, 8);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const CVector e = eigenvalues_of(assemble_bdg(random_params(rng), lat).m_dyn);
    worst = std::max(worst, ph_closure_error(as_span(e), MatchMethod::Exact));
  }
  return {worst <= kPhTol, fmt::format("worst matching error {:.3e} over 100 draws (tol {:.0e})", worst, kPhTol)};
}

Outcome torus(const Context&) {
  std::mt19937_64 rng(1212);
  const int l = 12;
  const auto p = random_params(rng);
  const CVector real_space =
      eigenvalues_of(assemble_bdg(p, rectangle(l, l, Boundary::Periodic, Boundary::Periodic)).m_dyn);
  std::vector<cplx> bloch;
  for (int a = 0; a < l; ++a)
    for (int b = 0; b < l; ++b) {
      const auto [e1, e2] = bloch_eigenvalues(
          bloch_operator(p, 2.0 * std::numbers::pi * a / l, 2.0 * std::numbers::pi * b / l));
      bloch.push_back(e1);
      bloch.push_back(e2);
    }
  const double d = matching_distance(as_span(real_space), bloch, MatchMethod::Exact);
  return {d <= kTorusTol, fmt::format("matching distance {:.3e} (tol {:.0e})", d, kTorusTol)};
}

Outcome algebraic_skin(const Context& ctx) {
  const int l = ctx.full ? 50 : 30;
  const auto lat = rectangle(l, l);
  const auto s = diagonalize(assemble_bdg(skin_effect_params(), lat).m_dyn, {.compute_vectors = true});
  std::size_t inside = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = fractal_dimension(s.vector(i), lat);
    if (d > 1.0 && d < 2.0) ++inside;
  }
  const double fraction = static_cast<double>(inside) / s.size();

  const cplx target{-0.97, 2.43};
  std::size_t k = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (std::abs(s.eigenvalues(i) - target) < std::abs(s.eigenvalues(k) - target)) k = i;
  const auto profile = orient_from_accumulation_edge(layer_density(s.vector(k), lat));
  const auto win = default_fit_window(l);
  const auto fe = fit_decay(profile, win, DecayModel::Exponential);
  const auto fp = fit_decay(profile, win, DecayModel::PowerLaw);
  const bool pass = fraction >= kFdFraction && fp.r_squared > fe.r_squared;
  return {pass,
          fmt::format("{}x{}: fraction with 1<D<2 = {:.3f} (need >= {}); nearest E = {:.4f}{:+.4f}i, "
                      "r2 power = {:.4f}, r2 exp = {:.4f} on x in [{}, {}]",
                      l, l, fraction, kFdFraction, s.eigenvalues(k).real(), s.eigenvalues(k).imag(),
                      fp.r_squared, fe.r_squared, win.first, win.last)};
}

Outcome sensitivity_dichotomy(const Context& ctx) {
  const int l = ctx.full ? 50 : 20;
  const auto lat = cylinder(l, l);
  ImpuritySpec single, pair;
  single.onsite = {{{1, 1}, 0.01}};
  pair.onsite = {{{1, 1}, 0.01}, {{l, l / 2}, 0.01}};
  const SensitivityOptions opt{.max_dimension = 2 * 50 * 50, .concurrent = true};
  const auto rs = run_sensitivity(impurity_study_params(), lat, single, opt);
  const auto rp = run_sensitivity(impurity_study_params(), lat, pair, opt);
  const std::size_t ns = rs.report.new_states.size(), np = rp.report.new_states.size();
  return {ns == 0 && np >= 1,
          fmt::format("{}x{} cylinder, eps = {:.4f}: single new = {} (need 0), double new = {} (need >= 1); "
                      "displacement single {:.3e}, double {:.3e}",
                      l, l, rs.report.epsilon, ns, np, rs.displacement, rp.displacement)};
}

Outcome long_range_hopping(const Context& ctx) {
  const int l = ctx.full ? 50 : 20;
  const auto lat = cylinder(l, l);
  ImpuritySpec far, near;
  far.hopping = {{{1, 1}, {3 * l / 5, l / 2}, 0.01}};
  near.hopping = {{{1, 1}, {2, 1}, 0.01}};
  const SensitivityOptions opt{.max_dimension = 2 * 50 * 50, .concurrent = true};
  const auto rf = run_sensitivity(impurity_study_params(), lat, far, opt);
  const auto rn = run_sensitivity(impurity_study_params(), lat, near, opt);
  const std::size_t nf = rf.report.new_states.size(), nn = rn.report.new_states.size();
  return {nf >= 1 && nn == 0,
          fmt::format("{}x{} cylinder, eps = {:.4f}: hop to ({}, {}) new = {} (need >= 1), nearest-neighbor "
                      "new = {} (need 0); displacement far {:.3e}, near {:.3e}",
                      l, l, rf.report.epsilon, 3 * l / 5, l / 2, nf, nn, rf.displacement, rn.displacement)};
}

Outcome block_diagonalization(const Context&) {
  const auto op = assemble_bdg(kStudy.to_model(), cylinder(16, 16));
  const auto b = block_transform(op.m_dyn);
  std::vector<cplx> blocks;
  for (const CMatrix* m : {&b.m_p, &b.m_m}) {
    const CVector e = eigenvalues_of(*m);
    blocks.insert(blocks.end(), e.data(), e.data() + e.size());
  }
  const CVector full = eigenvalues_of(op.m_dyn);
  const double d = matching_distance(as_span(full), blocks, MatchMethod::Exact);
  return {b.offdiag_residual <= kBlockResidualTol && d <= kBlockSpectrumTol,
          fmt::format("16x16 cylinder: off-diagonal residual {:.3e} (tol {:.0e}), spectrum match {:.3e} (tol {:.0e})",
                      b.offdiag_residual, kBlockResidualTol, d, kBlockSpectrumTol)};
}

Outcome response_oracle(const Context&) {
  const auto lat = cylinder(16, 16);
  bool pass = true;
  std::string detail;
  for (cplx e : {kEnergyUp, kEnergyDown}) {
    for (std::size_t n_imp : {1u, 2u}) {
      ImpuritySpec spec;
      spec.onsite = {{{1, 1}, 0.01}};
      if (n_imp == 2) spec.onsite.push_back({{16, 8}, 0.01});
      const auto r = response_spectral_radius(kStudy, lat, spec, e, {.dense_cross_check = true});
      const CVector& dense = *r.dense_eigenvalues;
      std::vector<cplx> expected{std::sqrt(r.xi_plus), -std::sqrt(r.xi_plus)};
      if (n_imp == 2) {
        expected.push_back(std::sqrt(r.xi_minus));
        expected.push_back(-std::sqrt(r.xi_minus));
      }
      std::vector<cplx> largest(dense.data(), dense.data() + dense.size());
      std::sort(largest.begin(), largest.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
      largest.resize(expected.size());
      const double err = matching_distance(largest, expected, MatchMethod::Exact);
      const double tol = kResponseTol * std::max(1.0, r.rho);
      const auto null = nullity_counts(dense, n_imp);
      const bool ok = err <= tol && null.matches();
      pass = pass && ok;
      detail += fmt::format("{}E={:.2f}{:+.2f}i n={}: rho {:.3e}, err {:.2e} (tol {:.1e}), zeros {}/{}",
                            detail.empty() ? "" : "; ", e.real(), e.imag(), n_imp, r.rho, err, tol,
                            null.zero_count, null.expected);
    }
  }
  return {pass, detail};
}

Outcome residue_oracle(const Context&) {
  const int lx = 16, ly = 16;
  const auto lat = cylinder(lx, ly);
  const auto b = block_transform(assemble_bdg(kStudy.to_model(), lat).m_dyn);
  const auto ky = cylinder_momenta(ly);
  double worst = 0.0, worst_chain = 0.0;
  std::string where;
  for (cplx e : {kEnergyUp, kEnergyDown}) {
    for (auto [branch, block] : {std::pair{Branch::Plus, &b.m_p}, std::pair{Branch::Minus, &b.m_m}}) {
      Resolvent g(*block, e);
      for (int sep : {4, 8}) {
        const int x1 = lx / 2 + 1 - sep / 2;
        const Site r1{x1, 1}, r2{x1 + sep, 1 + ly / 2};
        for (auto [to, from] : {std::pair{r2, r1}, std::pair{r1, r2}}) {
          const cplx direct = g.element(lat.require_index(to), lat.require_index(from));
          const cplx bulk = residue_propagator(e, to, from, branch, kStudy, ky);
          const cplx chain = finite_chain_propagator(e, to, from, branch, kStudy, lx, ky);
          const double rel = std::abs(bulk - direct) / std::abs(direct);
          worst_chain = std::max(worst_chain, std::abs(chain - direct) / std::abs(direct));
          if (rel > worst) {
            worst = rel;
            where = fmt::format("E={:.2f}{:+.2f}i {} L={} ({},{})<-({},{})", e.real(), e.imag(),
                                branch == Branch::Plus ? "p" : "m", sep, to.x, to.y, from.x, from.y);
          }
        }
      }
    }
  }
  Outcome o{worst <= kResidueTol,
            fmt::format("16x16 cylinder, bulk residue form: worst relative error {:.4f} at {} (tol {})", worst,
                        where, kResidueTol)};
  o.info.push_back(fmt::format("finite-chain closed form: worst relative error {:.3e}", worst_chain));
  return o;
}

Outcome mu_signs(const Context&) {
  const auto grid = uniform_grid(256);
  const auto pu = mu_extrema(kEnergyUp, Branch::Plus, kStudy, grid);
  const auto mu = mu_extrema(kEnergyUp, Branch::Minus, kStudy, grid);
  const auto pd = mu_extrema(kEnergyDown, Branch::Plus, kStudy, grid);
  const auto md = mu_extrema(kEnergyDown, Branch::Minus, kStudy, grid);
  const bool up = pu.mu_max_1 > 0 && pu.mu_min_2 < 0 && mu.mu_max_1 < 0 && mu.mu_min_2 > 0;
  const bool down = pd.mu_max_1 < 0 && pd.mu_min_2 > 0 && md.mu_max_1 > 0 && md.mu_min_2 < 0;
  return {up && down,
          fmt::format("E+: (+) {:.4f}/{:.4f}, (-) {:.4f}/{:.4f}; E-: (+) {:.4f}/{:.4f}, (-) {:.4f}/{:.4f} "
                      "(mu_max_1/mu_min_2)",
                      pu.mu_max_1, pu.mu_min_2, mu.mu_max_1, mu.mu_min_2, pd.mu_max_1, pd.mu_min_2,
                      md.mu_max_1, md.mu_min_2)};
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome slope_agreement(const Context&) {
  const int ly = 16;
  const auto grid = uniform_grid(256);
  bool pass = true;
  std::string detail;
  for (cplx e : {kEnergyUp, kEnergyDown}) {
    std::vector<double> ls, log_rho;
    for (int l : {8, 12, 16, 20}) {
      const int lx = l + 1;
      ImpuritySpec spec;
      spec.onsite = {{{1, 1}, 0.01}, {{lx, ly / 2}, 0.01}};
      const auto r = response_spectral_radius(kStudy, cylinder(lx, ly), spec, e);
      ls.push_back(l);
      log_rho.push_back(std::log(r.rho));
    }
    const auto mu = mu_extrema(e, active_branch(e), kStudy, grid);
    const double predicted = (mu.mu_max_1 - mu.mu_min_2) / 4.0;
    const double fitted = ls_slope(ls, log_rho);
    const double ratio = fitted / predicted;
    pass = pass && std::abs(ratio - 1.0) <= kSlopeTol;
    detail += fmt::format("{}E={:.2f}{:+.2f}i: fitted {:.4f}, predicted {:.4f}, ratio {:.3f}",
                          detail.empty() ? "" : "; ", e.real(), e.imag(), fitted, predicted, ratio);
  }
  return {pass, detail + fmt::format(" (tol {:.0f}%)", 100 * kSlopeTol)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"ph_closure", "PH-symmetry closure", ph_closure},
      {"torus", "torus spectrum equals Bloch union", torus},
      {"algebraic_skin", "algebraic skin-effect signature", algebraic_skin},
      {"sensitivity", "single vs double impurity sensitivity", sensitivity_dichotomy},
      {"long_range_hop", "long-range hopping sensitivity", long_range_hopping},
      {"block_diag", "block diagonalization", block_diagonalization},
      {"response_oracle", "response matrix vs BC eigenvalues", response_oracle},
      {"residue_oracle", "residue propagator vs resolvent", residue_oracle},
      {"mu_signs", "mu extrema sign patterns", mu_signs},
      {"slope", "asymptotic vs exact growth rate", slope_agreement},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--full") {
      ctx.full = true;
    } else if (a == "--list") {
      for (const auto& c : criteria()) fmt::print("{}\n", c.id);
      return 0;
    } else {
      wanted.push_back(a);
    }
  }
  for (const auto& w : wanted)
    if (std::none_of(criteria().begin(), criteria().end(), [&](const Criterion& c) { return c.id == w; })) {
      fmt::print(stderr, "unknown criterion '{}'\n", w);
      return 2;
    }

  int failures = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check(ctx);
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("{} {}: {} | {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail, secs);
    for (const auto& line : o.info) fmt::print("INFO {}: {}\n", c.id, line);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
