#include "bdgskin/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bdgskin/spectral.hpp"

namespace bdgskin {

CMatrix rotate_nambu(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw DomainError("Nambu rotation needs a square matrix of even dimension");
  const Eigen::Index n = m.rows() / 2;
  const auto a = m.topLeftCorner(n, n);
  const auto b = m.topRightCorner(n, n);
  const auto c = m.bottomLeftCorner(n, n);
  const auto d = m.bottomRightCorner(n, n);
  CMatrix out(m.rows(), m.cols());
  out.topLeftCorner(n, n) = 0.5 * (a + d + kI * (b - c));
  out.topRightCorner(n, n) = 0.5 * (b + c + kI * (a - d));
  out.bottomLeftCorner(n, n) = 0.5 * (b + c - kI * (a - d));
  out.bottomRightCorner(n, n) = 0.5 * (a + d - kI * (b - c));
  return out;
}

BlockDecomposition block_transform(const CMatrix& m_bdg) {
  const CMatrix r = rotate_nambu(m_bdg);
  const Eigen::Index n = r.rows() / 2;
  BlockDecomposition out;
  out.m_p = r.topLeftCorner(n, n);
  out.m_m = r.bottomRightCorner(n, n);
  out.offdiag_residual =
      std::max(max_abs(r.topRightCorner(n, n)), max_abs(r.bottomLeftCorner(n, n)));
  return out;
}

Resolvent::Resolvent(const CMatrix& block, cplx energy, double max_condition)
    : energy_(energy) {
  if (block.rows() != block.cols() || block.rows() == 0)
    throw DomainError("resolvent needs a non-empty square block");
  CMatrix shifted = -block;
  shifted.diagonal().array() += energy;
  lu_.compute(shifted);
  const double rcond = lu_.rcond();
  condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition))
    throw NumericError(fmt::format(
        "E = {:.6g}{:+.6g}i is too close to the spectrum (condition estimate {:.3e})",
        energy.real(), energy.imag(), condition_));
  columns_.resize(static_cast<std::size_t>(block.rows()));
}

const CVector& Resolvent::column(std::size_t j) {
  if (j >= columns_.size()) throw DomainError("resolvent column out of range");
  auto& slot = columns_[j];
  if (!slot) {
    CVector e = CVector::Zero(lu_.rows());
    e(static_cast<Eigen::Index>(j)) = 1.0;
    slot = lu_.solve(e);
  }
  return *slot;
}

cplx Resolvent::element(std::size_t i, std::size_t j) {
  if (i >= columns_.size()) throw DomainError("resolvent row out of range");
  return column(j)(static_cast<Eigen::Index>(i));
}

CMatrix Resolvent::full() const { return lu_.inverse(); }

cplx bare_green(const CMatrix& block, cplx energy, std::size_t r_i, std::size_t r_j) {
  Resolvent g(block, energy);
  return g.element(r_i, r_j);
}

CMatrix response_matrix(const BlockDecomposition& blocks, const CMatrix& v_bdg, cplx energy) {
  const Eigen::Index n = blocks.m_p.rows();
  if (v_bdg.rows() != 2 * n) throw DomainError("impurity matrix does not match the blocks");
  const CMatrix vz_bar = rotate_nambu(apply_tau_z(v_bdg));
  auto factor = [&](const CMatrix& block) {
    CMatrix shifted = -block;
    shifted.diagonal().array() += energy;
    return Eigen::PartialPivLU<CMatrix>(shifted);
  };
  CMatrix out(2 * n, 2 * n);
  out.topRows(n) = factor(blocks.m_p).solve(vz_bar.topRows(n));
  out.bottomRows(n) = factor(blocks.m_m).solve(vz_bar.bottomRows(n));
  return out;
}

Eigen::Matrix2cd bc_matrix(Resolvent& gp, Resolvent& gm, std::span<const OnsiteImpurity> imps,
                           const LatticeSpec& lattice) {
  if (imps.empty() || imps.size() > 2)
    throw DomainError("the BC matrix is defined for one or two on-site impurities");
  std::vector<std::size_t> idx;
  for (const auto& imp : imps) idx.push_back(lattice.require_index(imp.site));

  // BC_ab = Σ_k V_k Gp(r_a, r_k) Gm(r_k, r_b) V_b restricted to the impurity sites.
  Eigen::Matrix2cd bc = Eigen::Matrix2cd::Zero();
  for (std::size_t a = 0; a < imps.size(); ++a)
    for (std::size_t b = 0; b < imps.size(); ++b) {
      cplx sum = 0.0;
      for (std::size_t k = 0; k < imps.size(); ++k)
        sum += imps[k].v * gp.element(idx[a], idx[k]) * gm.element(idx[k], idx[b]);
      bc(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum * imps[b].v;
    }
  return bc;
}

std::pair<cplx, cplx> bc_eigenvalues(const Eigen::Matrix2cd& bc) {
  const cplx sum = bc(0, 0) + bc(1, 1);
  const cplx diff = bc(0, 0) - bc(1, 1);
  const cplx root = std::sqrt(diff * diff + 4.0 * bc(0, 1) * bc(1, 0));
  return {0.5 * (sum + root), 0.5 * (sum - root)};
}

ResponseRadius response_spectral_radius(const SolvableParams& params, const LatticeSpec& lattice,
                                        const ImpuritySpec& spec, cplx energy,
                                        const ResponseOptions& options) {
  if (!spec.hopping.empty())
    throw DomainError("response radius supports on-site impurities only");
  if (spec.onsite.empty() || spec.onsite.size() > 2)
    throw DomainError(fmt::format("response radius supports 1 or 2 on-site impurities, got {}",
                                  spec.onsite.size()));
  spec.validate(lattice);

  const auto op = assemble_bdg(params.to_model(), lattice);
  const auto blocks = block_transform(op.m_dyn);

  ResponseRadius out;
  out.energy = energy;
  out.spectrum_distance = std::numeric_limits<double>::quiet_NaN();
  if (options.margin_min > 0.0) {
    double dist = std::numeric_limits<double>::infinity();
    for (const CMatrix* block : {&blocks.m_p, &blocks.m_m}) {
      const CVector ev = eigenvalues_of(*block);
      dist = std::min(dist, (ev.array() - energy).abs().minCoeff());
    }
    out.spectrum_distance = dist;
    if (dist < options.margin_min)
      throw DomainError(fmt::format(
          "E = {:.6g}{:+.6g}i lies within {:.3g} of the clean spectrum (margin {:.3g})",
          energy.real(), energy.imag(), dist, options.margin_min));
  }

  Resolvent gp(blocks.m_p, energy, options.max_condition);
  Resolvent gm(blocks.m_m, energy, options.max_condition);
  out.bc = bc_matrix(gp, gm, spec.onsite, lattice);
  if (spec.onsite.size() == 1) {
    out.xi_plus = out.bc(0, 0);
    out.xi_minus = 0.0;
  } else {
    std::tie(out.xi_plus, out.xi_minus) = bc_eigenvalues(out.bc);
  }
  out.rho = std::max(std::sqrt(std::abs(out.xi_plus)), std::sqrt(std::abs(out.xi_minus)));

  if (options.dense_cross_check) {
    const CMatrix r = response_matrix(blocks, impurity_bdg(spec, lattice), energy);
    out.dense_eigenvalues = eigenvalues_of(r);
  }
  return out;
}

NullityReport nullity_counts(const CVector& eig, std::size_t n_impurities, double rel_tol) {
  NullityReport report;
  const auto dim = static_cast<std::size_t>(eig.size());
  report.expected = dim >= 2 * n_impurities ? dim - 2 * n_impurities : 0;
  const double largest = eig.size() ? eig.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i)
    if (largest == 0.0 || std::abs(eig(i)) < rel_tol * largest) ++report.zero_count;
  return report;
}

NullityReport nullity_counts(const CMatrix& response, std::size_t n_impurities, double rel_tol) {
  return nullity_counts(eigenvalues_of(response), n_impurities, rel_tol);
}

}  // namespace bdgskin
