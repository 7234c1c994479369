#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/LU>

#include "bdgskin/impurity.hpp"
#include "bdgskin/lattice.hpp"

namespace bdgskin {

/// Blocks of U M U^+ with U = (tau_0 - i tau_x)/sqrt(2).
struct BlockDecomposition {
  CMatrix m_p;  // upper-left, carries the E_+ band
  CMatrix m_m;  // lower-right, carries the E_- band
  double offdiag_residual = 0.0;
};

/// U A U^+ for a 2N x 2N Nambu matrix, evaluated blockwise.
CMatrix rotate_nambu(const CMatrix& a);

BlockDecomposition block_transform(const CMatrix& m_bdg);

enum class Branch { Plus, Minus };

/// Factorized E - block; columns of the resolvent are solved on demand and cached.
class Resolvent {
 public:
  /// Throws NumericError when the reciprocal condition number is below 1/max_condition.
  Resolvent(const CMatrix& block, cplx energy, double max_condition = 1e12);

  cplx energy() const { return energy_; }
  double condition_estimate() const { return condition_; }
  std::size_t dimension() const { return static_cast<std::size_t>(lu_.rows()); }

  /// <r_i| (E - M)^{-1} |r_j>
  cplx element(std::size_t i, std::size_t j);
  const CVector& column(std::size_t j);
  CMatrix full() const;

 private:
  Eigen::PartialPivLU<CMatrix> lu_;
  cplx energy_;
  double condition_ = 0.0;
  std::vector<std::optional<CVector>> columns_;
};

/// Single resolvent element by direct LU solve.
cplx bare_green(const CMatrix& block, cplx energy, std::size_t r_i, std::size_t r_j);

struct ResponseOptions {
  /// Minimum distance of E from the clean spectrum; <= 0 skips the check.
  double margin_min = 0.05;
  /// Also build and diagonalize the dense 2N x 2N response matrix.
  bool dense_cross_check = false;
  double max_condition = 1e12;
};

struct ResponseRadius {
  cplx energy{};
  double rho = 0.0;
  cplx xi_plus{};
  cplx xi_minus{};
  Eigen::Matrix2cd bc = Eigen::Matrix2cd::Zero();
  /// Distance from E to the clean spectrum (NaN when the check is skipped).
  double spectrum_distance = 0.0;
  std::optional<CVector> dense_eigenvalues;
};

/// Dense response matrix G0_bar * Vz_bar in the rotated frame.
CMatrix response_matrix(const BlockDecomposition& blocks, const CMatrix& v_bdg, cplx energy);

/// 2x2 BC block from the eight bare propagator elements; with one impurity only BC11 is
/// nonzero and equals V1^2 Gp(r1,r1) Gm(r1,r1).
Eigen::Matrix2cd bc_matrix(Resolvent& gp, Resolvent& gm, std::span<const OnsiteImpurity> imps,
                           const LatticeSpec& lattice);

/// ξ± = ½ (BC11 + BC22 ± sqrt((BC11 − BC22)² + 4 BC12 BC21)).
std::pair<cplx, cplx> bc_eigenvalues(const Eigen::Matrix2cd& bc);

/// Spectral radius of the impurity response for one or two on-site impurities on the
/// solvable model. Throws DomainError for other impurity layouts or when E lies within
/// margin_min of the clean spectrum.
ResponseRadius response_spectral_radius(const SolvableParams& params, const LatticeSpec& lattice,
                                        const ImpuritySpec& spec, cplx energy,
                                        const ResponseOptions& options = {});

struct NullityReport {
  std::size_t zero_count = 0;
  std::size_t expected = 0;
  bool matches() const { return zero_count == expected; }
};

/// Counts eigenvalues with |λ| < rel_tol · max|λ|; expected is 2N − 2·n_impurities.
NullityReport nullity_counts(const CVector& response_eigenvalues, std::size_t n_impurities,
                             double rel_tol = 1e-10);
NullityReport nullity_counts(const CMatrix& response, std::size_t n_impurities,
                             double rel_tol = 1e-10);

}  // namespace bdgskin
