#pragma once

#include <span>
#include <vector>

#include "bdgskin/greens.hpp"
#include "bdgskin/lattice.hpp"

namespace bdgskin {

/// E_branch(β, k_y) = c_plus β + c_zero + c_minus / β, the continuation e^{ik_x} → β of the
/// Bloch eigenvalue of the solvable model.
struct LaurentDispersion {
  Branch branch = Branch::Plus;
  double k_y = 0.0;
  cplx c_plus{};
  cplx c_zero{};
  cplx c_minus{};

  cplx evaluate(cplx beta) const { return c_plus * beta + c_zero + c_minus / beta; }
};

LaurentDispersion laurent_coeffs(const SolvableParams& sp, Branch branch, double k_y);

/// Roots of c_plus β² + (c_zero − E) β + c_minus = 0 with |beta1| ≤ |beta2|.
struct RootPair {
  cplx beta1{};
  cplx beta2{};
  double k_y = 0.0;
  Branch branch = Branch::Plus;
};

/// Throws DomainError when c_plus = 0 or both roots vanish.
RootPair char_roots(cplx energy, double k_y, Branch branch, const SolvableParams& sp);

/// √|c_minus / c_plus|.
double gbz_radius(double k_y, Branch branch, const SolvableParams& sp);

/// n points uniform on [0, 2π).
std::vector<double> uniform_grid(std::size_t n = 256);
/// Allowed momenta 2πm/L_y of a cylinder with L_y sites around.
std::vector<double> cylinder_momenta(int l_y);

/// E_branch(r(k_y) e^{iθ}, k_y) for both branches over both grids.
std::vector<cplx> cylinder_spectrum(const SolvableParams& sp, std::span<const double> ky_grid,
                                    std::span<const double> theta_grid);

/// Residue-theorem propagator <to| (E − M_branch)^{-1} |from> on a cylinder, averaged over the
/// k_y grid. `scale` multiplies the result (calibration factor, 1 for the exact prefactor).
cplx residue_propagator(cplx energy, Site to, Site from, Branch branch, const SolvableParams& sp,
                        std::span<const double> ky_grid, double scale = 1.0);

/// Same element with the boundary images of an open L_x-site chain kept exactly.
cplx finite_chain_propagator(cplx energy, Site to, Site from, Branch branch,
                             const SolvableParams& sp, int l_x, std::span<const double> ky_grid);

/// |direct| / |analytic|.
double calibration_factor(cplx analytic, cplx direct);

struct MuExtrema {
  double mu_max_1 = 0.0;
  double mu_min_2 = 0.0;
  double argmax_ky = 0.0;
  double argmin_ky = 0.0;
};

MuExtrema mu_extrema(cplx energy, Branch branch, const SolvableParams& sp,
                     std::span<const double> ky_grid);

/// V exp((μ_max,1 − μ_min,2) L / 4) using the branch picked by sign(Im E).
double asymptotic_rho(double v, double l, const MuExtrema& plus, const MuExtrema& minus,
                      double im_energy_sign);

/// Branch used by the asymptotic estimate: Plus for Im E > 0, Minus otherwise.
inline Branch active_branch(cplx energy) { return energy.imag() > 0.0 ? Branch::Plus : Branch::Minus; }

struct RootTrajectoryRow {
  double k_y = 0.0;
  double abs_beta1_plus = 0.0;
  double abs_beta2_plus = 0.0;
  double abs_beta1_minus = 0.0;
  double abs_beta2_minus = 0.0;
};

std::vector<RootTrajectoryRow> root_trajectory(cplx energy, const SolvableParams& sp,
                                               std::span<const double> ky_grid);

}  // namespace bdgskin
