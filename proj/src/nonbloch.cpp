#include "bdgskin/nonbloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace bdgskin {

namespace {

// Relative to the root modulus; a double root only resolves to about sqrt(eps).
constexpr double kRootCollision = 1e-6;

bool collide(const RootPair& r) {
  return std::abs(r.beta1 - r.beta2) < kRootCollision * std::abs(r.beta2);
}

double sign_of(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

}  // namespace

LaurentDispersion laurent_coeffs(const SolvableParams& sp, Branch branch, double k_y) {
  const double s = sign_of(branch);
  const cplx e_ky = std::polar(1.0, k_y);
  LaurentDispersion d;
  d.branch = branch;
  d.k_y = k_y;
  d.c_plus = s * kI * sp.delta_x - kI * sp.t_xy * e_ky;
  d.c_zero = s * 2.0 * kI * sp.delta0 + 2.0 * sp.t_y * std::sin(k_y);
  d.c_minus = s * kI * sp.delta_x + kI * sp.t_xy * std::conj(e_ky);
  return d;
}

RootPair char_roots(cplx energy, double k_y, Branch branch, const SolvableParams& sp) {
  const auto d = laurent_coeffs(sp, branch, k_y);
  const double scale = std::abs(d.c_plus) + std::abs(d.c_zero) + std::abs(d.c_minus) + std::abs(energy);
  if (std::abs(d.c_plus) <= 1e-14 * scale)
    throw DomainError(fmt::format("characteristic polynomial is linear at k_y = {}", k_y));
  if (std::abs(d.c_minus) <= 1e-14 * scale)
    throw DomainError(fmt::format("characteristic root at zero for k_y = {}", k_y));

  const cplx a = d.c_plus;
  const cplx b = d.c_zero - energy;
  const cplx c = d.c_minus;
  cplx sq = std::sqrt(b * b - 4.0 * a * c);
  if (std::real(std::conj(b) * sq) < 0.0) sq = -sq;
  const cplx q = -0.5 * (b + sq);
  cplx r1, r2;
  if (q == cplx{}) {
    r1 = std::sqrt(-c / a);
    r2 = -r1;
  } else {
    r1 = q / a;
    r2 = c / q;
  }
  const double m1 = std::abs(r1), m2 = std::abs(r2);
  if (m1 > m2 || (m1 == m2 && std::arg(r1) > std::arg(r2))) std::swap(r1, r2);
  return {r1, r2, k_y, branch};
}

double gbz_radius(double k_y, Branch branch, const SolvableParams& sp) {
  const auto d = laurent_coeffs(sp, branch, k_y);
  if (std::abs(d.c_plus) == 0.0 || std::abs(d.c_minus) == 0.0)
    throw DomainError(fmt::format("degenerate Laurent coefficients at k_y = {}", k_y));
  return std::sqrt(std::abs(d.c_minus / d.c_plus));
}

std::vector<double> uniform_grid(std::size_t n) {
  if (n == 0) throw DomainError("grid must be nonempty");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
  return g;
}

std::vector<double> cylinder_momenta(int l_y) {
  if (l_y < 1) throw DomainError("cylinder circumference must be positive");
  return uniform_grid(static_cast<std::size_t>(l_y));
}

std::vector<cplx> cylinder_spectrum(const SolvableParams& sp, std::span<const double> ky_grid,
                                    std::span<const double> theta_grid) {
  if (ky_grid.empty() || theta_grid.empty()) throw DomainError("grids must be nonempty");
  std::vector<cplx> out;
  out.reserve(2 * ky_grid.size() * theta_grid.size());
  for (Branch b : {Branch::Plus, Branch::Minus})
    for (double ky : ky_grid) {
      const auto d = laurent_coeffs(sp, b, ky);
      const double r = gbz_radius(ky, b, sp);
      for (double th : theta_grid) out.push_back(d.evaluate(std::polar(r, th)));
    }
  return out;
}

cplx residue_propagator(cplx energy, Site to, Site from, Branch branch, const SolvableParams& sp,
                        std::span<const double> ky_grid, double scale) {
  if (ky_grid.empty()) throw DomainError("k_y grid must be nonempty");
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  cplx sum = 0.0;
  for (double ky : ky_grid) {
    const auto roots = char_roots(energy, ky, branch, sp);
    const cplx gap = roots.beta1 - roots.beta2;
    if (collide(roots))
      throw NumericError(fmt::format("characteristic roots collide at k_y = {} (E on the contour)", ky));
    const cplx c_plus = laurent_coeffs(sp, branch, ky).c_plus;
    const cplx beta = dx >= 0 ? roots.beta1 : roots.beta2;
    sum += std::polar(1.0, ky * dy) * std::pow(beta, dx) / (-c_plus * gap);
  }
  return scale * sum / static_cast<double>(ky_grid.size());
}

cplx finite_chain_propagator(cplx energy, Site to, Site from, Branch branch,
                             const SolvableParams& sp, int l_x, std::span<const double> ky_grid) {
  if (ky_grid.empty()) throw DomainError("k_y grid must be nonempty");
  if (to.x < 1 || to.x > l_x || from.x < 1 || from.x > l_x)
    throw DomainError(fmt::format("x coordinates must lie in [1, {}]", l_x));
  const int dy = to.y - from.y;
  const int lo = std::min(to.x, from.x);
  const int hi = std::max(to.x, from.x);
  cplx sum = 0.0;
  for (double ky : ky_grid) {
    const auto roots = char_roots(energy, ky, branch, sp);
    if (collide(roots))
      throw NumericError(fmt::format("characteristic roots collide at k_y = {}", ky));
    // psi_l vanishes at x = 0, psi_r at x = l_x + 1.
    auto psi_l = [&](int x) { return std::pow(roots.beta1, x) - std::pow(roots.beta2, x); };
    auto psi_r = [&](int x) {
      return std::pow(roots.beta1, x - l_x - 1) - std::pow(roots.beta2, x - l_x - 1);
    };
    const int s = from.x;
    const cplx w = psi_r(s) * psi_l(s + 1) - psi_l(s) * psi_r(s + 1);
    const cplx c_plus = laurent_coeffs(sp, branch, ky).c_plus;
    sum += std::polar(1.0, ky * dy) * psi_l(lo) * psi_r(hi) / (c_plus * w);
  }
  return sum / static_cast<double>(ky_grid.size());
}

double calibration_factor(cplx analytic, cplx direct) {
  if (std::abs(analytic) == 0.0) throw NumericError("cannot calibrate against a zero propagator");
  return std::abs(direct) / std::abs(analytic);
}

MuExtrema mu_extrema(cplx energy, Branch branch, const SolvableParams& sp,
                     std::span<const double> ky_grid) {
  if (ky_grid.empty()) throw DomainError("k_y grid must be nonempty");
  MuExtrema m;
  m.mu_max_1 = -std::numeric_limits<double>::infinity();
  m.mu_min_2 = std::numeric_limits<double>::infinity();
  for (double ky : ky_grid) {
    const auto r = char_roots(energy, ky, branch, sp);
    const double mu1 = std::log(std::abs(r.beta1));
    const double mu2 = std::log(std::abs(r.beta2));
    if (mu1 > m.mu_max_1) {
      m.mu_max_1 = mu1;
      m.argmax_ky = ky;
    }
    if (mu2 < m.mu_min_2) {
      m.mu_min_2 = mu2;
      m.argmin_ky = ky;
    }
  }
  return m;
}

double asymptotic_rho(double v, double l, const MuExtrema& plus, const MuExtrema& minus,
                      double im_energy_sign) {
  if (!(v > 0.0)) throw DomainError("impurity strength must be positive");
  if (!(l >= 1.0)) throw DomainError("separation must be at least 1");
  const MuExtrema& mu = im_energy_sign > 0.0 ? plus : minus;
  return v * std::exp((mu.mu_max_1 - mu.mu_min_2) * l / 4.0);
}

std::vector<RootTrajectoryRow> root_trajectory(cplx energy, const SolvableParams& sp,
                                               std::span<const double> ky_grid) {
  std::vector<RootTrajectoryRow> rows;
  rows.reserve(ky_grid.size());
  for (double ky : ky_grid) {
    const auto p = char_roots(energy, ky, Branch::Plus, sp);
    const auto m = char_roots(energy, ky, Branch::Minus, sp);
    rows.push_back({ky, std::abs(p.beta1), std::abs(p.beta2), std::abs(m.beta1), std::abs(m.beta2)});
  }
  return rows;
}

}  // namespace bdgskin
