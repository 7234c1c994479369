#include "bdgskin/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

namespace bdgskin {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Rotated-square membership with a small slack so that points on the edge count.
bool inside_rotated_square(double px, double py, double cx, double cy, double half,
                           double cos_t, double sin_t) {
  const double dx = px - cx;
  const double dy = py - cy;
  const double u = cos_t * dx + sin_t * dy;
  const double v = -sin_t * dx + cos_t * dy;
  constexpr double slack = 1e-9;
  return std::abs(u) <= half + slack && std::abs(v) <= half + slack;
}

std::vector<Site> oblique_sites(const ObliqueSquare& sq) {
  if (sq.side < 1) throw DomainError("oblique square side must be >= 1");
  if (!std::isfinite(sq.tilt_deg)) throw DomainError("oblique tilt must be finite");

  const double theta = sq.tilt_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double half = 0.5 * sq.side;
  const double center = 0.5 * (sq.side + 1);
  const double reach = half * (std::abs(c) + std::abs(s)) + 1.0;
  const int lo = static_cast<int>(std::floor(center - reach));
  const int hi = static_cast<int>(std::ceil(center + reach));

  std::vector<Site> raw;
  for (int y = lo; y <= hi; ++y)
    for (int x = lo; x <= hi; ++x)
      if (inside_rotated_square(x, y, center, center, half, c, s)) raw.push_back({x, y});
  if (raw.empty()) throw DomainError("oblique mask is empty");

  int min_x = raw.front().x, min_y = raw.front().y;
  for (const auto& p : raw) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
  }
  for (auto& p : raw) {
    p.x = p.x - min_x + 1;
    p.y = p.y - min_y + 1;
  }
  return raw;  // already row-major: y outer, x inner
}

}  // namespace

void ModelParams::validate() const {
  const std::pair<const char*, cplx> fields[] = {{"omega0", omega0}, {"j_x", j_x},
                                                 {"j_y", j_y},       {"j_xy", j_xy},
                                                 {"delta0", delta0}, {"delta_x", delta_x}};
  for (const auto& [name, value] : fields)
    if (!finite(value)) throw DomainError(fmt::format("model parameter {} is not finite", name));
  if (omega0.imag() != 0.0)
    throw DomainError(fmt::format("omega0 must be real for a Hermitian Hamiltonian, got imaginary part {}",
                                  omega0.imag()));
}

std::optional<SolvableParams> SolvableParams::from_model(const ModelParams& p, double tol) {
  const bool ok = std::abs(p.omega0) <= tol && std::abs(p.j_x) <= tol &&
                  std::abs(p.j_y.real()) <= tol && std::abs(p.j_xy.real()) <= tol &&
                  std::abs(p.delta0.imag()) <= tol && std::abs(p.delta_x.imag()) <= tol;
  if (!ok) return std::nullopt;
  return SolvableParams{p.j_y.imag(), p.j_xy.imag(), p.delta0.real(), p.delta_x.real()};
}

std::optional<std::size_t> LatticeSpec::index_of(Site s) const {
  if (s.x < 1 || s.y < 1 || s.x > extent_x_ || s.y > extent_y_) return std::nullopt;
  const long idx = grid_[static_cast<std::size_t>((s.x - 1) + extent_x_ * (s.y - 1))];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

std::size_t LatticeSpec::require_index(Site s) const {
  auto idx = index_of(s);
  if (!idx) throw DomainError(fmt::format("site ({}, {}) is not part of the lattice", s.x, s.y));
  return *idx;
}

LatticeSpec build_lattice(const Shape& shape, Boundary bc_x, Boundary bc_y) {
  LatticeSpec lat;
  lat.shape_ = shape;
  lat.bc_x_ = bc_x;
  lat.bc_y_ = bc_y;

  if (const auto* r = std::get_if<Rectangle>(&shape)) {
    if (r->lx < 1 || r->ly < 1)
      throw DomainError(fmt::format("rectangle extents must be >= 1, got {}x{}", r->lx, r->ly));
    lat.sites_.reserve(static_cast<std::size_t>(r->lx) * r->ly);
    for (int y = 1; y <= r->ly; ++y)
      for (int x = 1; x <= r->lx; ++x) lat.sites_.push_back({x, y});
  } else {
    if (bc_x != Boundary::Open || bc_y != Boundary::Open)
      throw DomainError("oblique geometry supports open boundaries only");
    lat.sites_ = oblique_sites(std::get<ObliqueSquare>(shape));
  }

  for (const auto& s : lat.sites_) {
    lat.extent_x_ = std::max(lat.extent_x_, s.x);
    lat.extent_y_ = std::max(lat.extent_y_, s.y);
  }
  lat.grid_.assign(static_cast<std::size_t>(lat.extent_x_) * lat.extent_y_, -1);
  for (std::size_t i = 0; i < lat.sites_.size(); ++i) {
    const auto& s = lat.sites_[i];
    lat.grid_[static_cast<std::size_t>((s.x - 1) + lat.extent_x_ * (s.y - 1))] =
        static_cast<long>(i);
  }

  // Neighbor at offset (dx, dy) with per-axis wrapping; nullopt if it leaves the lattice.
  auto neighbor = [&](const Site& s, int dx, int dy) -> std::optional<std::size_t> {
    int x = s.x + dx;
    int y = s.y + dy;
    if (x > lat.extent_x_) {
      if (bc_x == Boundary::Open) return std::nullopt;
      x = (x - 1) % lat.extent_x_ + 1;
    }
    if (y > lat.extent_y_) {
      if (bc_y == Boundary::Open) return std::nullopt;
      y = (y - 1) % lat.extent_y_ + 1;
    }
    return lat.index_of({x, y});
  };

  for (std::size_t i = 0; i < lat.sites_.size(); ++i) {
    const auto& s = lat.sites_[i];
    if (auto j = neighbor(s, 1, 0)) lat.bonds_x_.push_back({i, *j});
    if (auto j = neighbor(s, 0, 1)) lat.bonds_y_.push_back({i, *j});
    if (auto j = neighbor(s, 1, 1)) lat.bonds_xy_.push_back({i, *j});
  }
  return lat;
}

CMatrix apply_tau_z(const CMatrix& m) {
  if (m.rows() % 2 != 0) throw DomainError("Nambu matrix must have even dimension");
  CMatrix out = m;
  const Eigen::Index n = m.rows() / 2;
  out.bottomRows(n) *= -1.0;
  return out;
}

BdGOperator assemble_bdg(const ModelParams& params, const LatticeSpec& lattice,
                         const AssemblyOptions& options) {
  params.validate();
  const std::size_t n = lattice.size();
  if (n == 0) throw DomainError("lattice has no sites");
  if (2 * n > options.max_dimension)
    throw DomainError(fmt::format("Nambu dimension {} exceeds the configured cap {}", 2 * n,
                                  options.max_dimension));

  const auto N = static_cast<Eigen::Index>(n);
  BdGOperator op;
  op.h = CMatrix::Zero(N, N);
  op.delta = CMatrix::Zero(N, N);

  for (Eigen::Index i = 0; i < N; ++i) {
    op.h(i, i) += params.omega0;
    op.delta(i, i) += 2.0 * params.delta0;
  }
  auto hop = [&](const std::vector<Bond>& bonds, cplx j) {
    for (const auto& b : bonds) {
      const auto from = static_cast<Eigen::Index>(b.from);
      const auto to = static_cast<Eigen::Index>(b.to);
      op.h(to, from) += j;
      op.h(from, to) += std::conj(j);
    }
  };
  hop(lattice.bonds_x(), params.j_x);
  hop(lattice.bonds_y(), params.j_y);
  hop(lattice.bonds_xy(), params.j_xy);
  for (const auto& b : lattice.bonds_x()) {
    const auto from = static_cast<Eigen::Index>(b.from);
    const auto to = static_cast<Eigen::Index>(b.to);
    op.delta(to, from) += params.delta_x;
    op.delta(from, to) += params.delta_x;
  }

  op.h_bdg.resize(2 * N, 2 * N);
  op.h_bdg.topLeftCorner(N, N) = op.h;
  op.h_bdg.topRightCorner(N, N) = op.delta;
  op.h_bdg.bottomLeftCorner(N, N) = op.delta.adjoint();
  op.h_bdg.bottomRightCorner(N, N) = op.h.transpose();
  op.m_dyn = apply_tau_z(op.h_bdg);
  return op;
}

double ph_symmetry_residual(const CMatrix& h) {
  if (h.rows() != h.cols() || h.rows() % 2 != 0)
    throw DomainError("PH residual needs a square Nambu matrix of even dimension");
  const Eigen::Index n = h.rows() / 2;
  // tau_x A tau_x swaps the particle and hole blocks in both indices.
  CMatrix swapped(h.rows(), h.cols());
  swapped.topLeftCorner(n, n) = h.bottomRightCorner(n, n).conjugate();
  swapped.topRightCorner(n, n) = h.bottomLeftCorner(n, n).conjugate();
  swapped.bottomLeftCorner(n, n) = h.topRightCorner(n, n).conjugate();
  swapped.bottomRightCorner(n, n) = h.topLeftCorner(n, n).conjugate();
  return max_abs(swapped - h);
}

namespace {

cplx hopping_k(const ModelParams& p, double kx, double ky) {
  const cplx ex = std::exp(-kI * kx);
  const cplx ey = std::exp(-kI * ky);
  const cplx exy = std::exp(-kI * (kx + ky));
  return p.omega0 + p.j_x * ex + p.j_y * ey + p.j_xy * exy + std::conj(p.j_x * ex) +
         std::conj(p.j_y * ey) + std::conj(p.j_xy * exy);
}

// Fourier transform of the symmetric pairing matrix; even in k.
cplx pairing_k(const ModelParams& p, double kx) {
  return 2.0 * p.delta0 + p.delta_x * (std::exp(-kI * kx) + std::exp(kI * kx));
}

}  // namespace

BlochOperator bloch_operator(const ModelParams& params, double k_x, double k_y) {
  params.validate();
  if (!std::isfinite(k_x) || !std::isfinite(k_y)) throw DomainError("k must be finite");
  BlochOperator op;
  op.k_x = k_x;
  op.k_y = k_y;
  op.h0_k = hopping_k(params, k_x, k_y);
  op.delta_k = pairing_k(params, k_x);
  op.h_bdg_k << op.h0_k, op.delta_k, std::conj(pairing_k(params, -k_x)),
      std::conj(hopping_k(params, -k_x, -k_y));
  op.m_b_k = op.h_bdg_k;
  op.m_b_k.row(1) *= -1.0;
  return op;
}

std::pair<cplx, cplx> bloch_eigenvalues(const BlochOperator& op) {
  const auto& m = op.m_b_k;
  const cplx half_trace = 0.5 * (m(0, 0) + m(1, 1));
  const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const cplx disc = std::sqrt(half_trace * half_trace - det);
  return {half_trace + disc, half_trace - disc};
}

}  // namespace bdgskin
