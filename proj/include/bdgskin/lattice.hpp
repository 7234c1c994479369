#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "bdgskin/types.hpp"

namespace bdgskin {

/// Couplings of the squeezed-boson lattice Hamiltonian (hbar = 1).
///
///   H = sum w0 a+a + (J_xy a+_{x+1,y+1} a_{x,y} + J_x a+_{x+1,y} a_{x,y}
///       + J_y a+_{x,y+1} a_{x,y} + h.c.) + (D0 a+a+ + D_x a+_{x+1,y} a+_{x,y} + h.c.)
struct ModelParams {
  cplx omega0{};
  cplx j_x{};
  cplx j_y{};
  cplx j_xy{};
  cplx delta0{};
  cplx delta_x{};

  /// Convenience constructor with omega0 = 0 (rotating frame).
  static ModelParams couplings(cplx j_x, cplx j_y, cplx j_xy, cplx delta0, cplx delta_x) {
    return ModelParams{0.0, j_x, j_y, j_xy, delta0, delta_x};
  }

  /// Throws DomainError if any component is NaN or infinite.
  void validate() const;
};

/// Real parameterization for which the dynamical matrix block-diagonalizes:
/// J_x = 0, J_y = i t_y, J_xy = i t_xy, real pairing.
struct SolvableParams {
  double t_y = 0.0;
  double t_xy = 0.0;
  double delta0 = 0.0;
  double delta_x = 0.0;

  ModelParams to_model() const {
    return ModelParams{0.0, 0.0, kI * t_y, kI * t_xy, delta0, delta_x};
  }

  /// Recovers the real parameters if `p` lies in the solvable family (to `tol`).
  static std::optional<SolvableParams> from_model(const ModelParams& p, double tol = 1e-12);
};

enum class Boundary { Open, Periodic };

struct Rectangle {
  int lx = 1;
  int ly = 1;
};

/// Square of side `side` rotated by `tilt_deg` about its center; the active sites are
/// the integer grid points inside it. A zero tilt reproduces Rectangle(side, side).
struct ObliqueSquare {
  int side = 1;
  double tilt_deg = 0.0;
};

using Shape = std::variant<Rectangle, ObliqueSquare>;

/// Lattice coordinate, 1-based in both directions.
struct Site {
  int x = 1;
  int y = 1;
  friend bool operator==(const Site&, const Site&) = default;
};

/// Directed bond from site index `from` at (x, y) to `to` at (x+dx, y+dy), possibly
/// wrapped. For a periodic extent of one, from == to.
struct Bond {
  std::size_t from = 0;
  std::size_t to = 0;
  friend bool operator==(const Bond&, const Bond&) = default;
};

class LatticeSpec {
 public:
  const Shape& shape() const { return shape_; }
  Boundary bc_x() const { return bc_x_; }
  Boundary bc_y() const { return bc_y_; }
  bool is_rectangle() const { return std::holds_alternative<Rectangle>(shape_); }

  /// Number of active sites N.
  std::size_t size() const { return sites_.size(); }
  /// Bounding-box extents of the active sites.
  int extent_x() const { return extent_x_; }
  int extent_y() const { return extent_y_; }

  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(std::size_t index) const { return sites_.at(index); }
  std::optional<std::size_t> index_of(Site s) const;
  /// Like index_of but throws DomainError for inactive or out-of-range sites.
  std::size_t require_index(Site s) const;

  const std::vector<Bond>& bonds_x() const { return bonds_x_; }
  const std::vector<Bond>& bonds_y() const { return bonds_y_; }
  const std::vector<Bond>& bonds_xy() const { return bonds_xy_; }

 private:
  friend LatticeSpec build_lattice(const Shape&, Boundary, Boundary);

  Shape shape_;
  Boundary bc_x_ = Boundary::Open;
  Boundary bc_y_ = Boundary::Open;
  int extent_x_ = 0;
  int extent_y_ = 0;
  std::vector<Site> sites_;
  std::vector<long> grid_;  // (x-1) + extent_x*(y-1) -> index or -1
  std::vector<Bond> bonds_x_;
  std::vector<Bond> bonds_y_;
  std::vector<Bond> bonds_xy_;
};

/// Builds the site list in row-major order (x fastest) and the x, y and (1,1)-diagonal
/// bond lists. Throws DomainError on empty masks, non-positive extents, or periodic
/// boundaries on an oblique mask.
LatticeSpec build_lattice(const Shape& shape, Boundary bc_x, Boundary bc_y);

inline LatticeSpec rectangle(int lx, int ly, Boundary bc_x = Boundary::Open,
                             Boundary bc_y = Boundary::Open) {
  return build_lattice(Rectangle{lx, ly}, bc_x, bc_y);
}

/// Open in x, periodic in y.
inline LatticeSpec cylinder(int lx, int ly) {
  return rectangle(lx, ly, Boundary::Open, Boundary::Periodic);
}

/// Real-space BdG operator in Nambu ordering (all particles, then all holes).
struct BdGOperator {
  CMatrix h;      // N x N, Hermitian
  CMatrix delta;  // N x N, symmetric
  CMatrix h_bdg;  // [[h, delta], [delta^+, h^T]]
  CMatrix m_dyn;  // tau_z * h_bdg

  std::size_t sites() const { return static_cast<std::size_t>(h.rows()); }
};

struct AssemblyOptions {
  /// Largest allowed Nambu dimension 2N.
  std::size_t max_dimension = 6400;
};

BdGOperator assemble_bdg(const ModelParams& params, const LatticeSpec& lattice,
                         const AssemblyOptions& options = {});

/// tau_z * m: flips the sign of the lower (hole) block rows.
CMatrix apply_tau_z(const CMatrix& m);

/// ‖tau_x H* tau_x − H‖_max for a 2N x 2N Nambu matrix.
double ph_symmetry_residual(const CMatrix& h_bdg);
inline double ph_symmetry_residual(const BdGOperator& op) { return ph_symmetry_residual(op.h_bdg); }

struct BlochOperator {
  double k_x = 0.0;
  double k_y = 0.0;
  cplx h0_k{};
  cplx delta_k{};
  Eigen::Matrix2cd h_bdg_k;
  Eigen::Matrix2cd m_b_k;
};

BlochOperator bloch_operator(const ModelParams& params, double k_x, double k_y);

/// Analytic eigenvalues of the 2x2 Bloch dynamical matrix.
std::pair<cplx, cplx> bloch_eigenvalues(const BlochOperator& op);

}  // namespace bdgskin
