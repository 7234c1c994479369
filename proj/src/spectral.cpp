#include "bdgskin/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace bdgskin {

std::size_t Spectrum::nearest(cplx target) const {
  if (eigenvalues.size() == 0) throw DomainError("empty spectrum");
  Eigen::Index best = 0;
  (eigenvalues.array() - target).abs().minCoeff(&best);
  return static_cast<std::size_t>(best);
}

Spectrum diagonalize(const CMatrix& m, const DiagonalizeOptions& options) {
  if (m.rows() != m.cols()) throw DomainError("diagonalize needs a square matrix");
  if (m.rows() == 0) throw DomainError("diagonalize needs a non-empty matrix");
  const auto n = static_cast<lapack_int>(m.rows());
  if (static_cast<std::size_t>(n) > options.max_dimension)
    throw DomainError(fmt::format("matrix dimension {} exceeds the configured cap {}", n,
                                  options.max_dimension));
  if (!m.allFinite()) throw DomainError("matrix has non-finite entries");

  CMatrix a = m;  // zgeev overwrites its input; Eigen storage is column-major
  Spectrum out;
  out.eigenvalues.resize(n);
  CMatrix vr;
  if (options.compute_vectors) vr.resize(n, n);
  const char jobvr = options.compute_vectors ? 'V' : 'N';
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', jobvr, n, a.data(), n,
                                        out.eigenvalues.data(), nullptr, 1,
                                        options.compute_vectors ? vr.data() : nullptr, n);
  if (info != 0) {
    const double norm = max_abs(m);
    throw NumericError(fmt::format(
        "zgeev failed (info = {}) on a {}x{} matrix with ‖M‖_max = {:.3e}{}", info, n, n, norm,
        info > 0 ? "; QR iteration did not converge" : ""));
  }
  if (!options.compute_vectors) return out;

  vr.colwise().normalize();
  out.right_vectors = std::move(vr);

  const double scale = max_abs(m);
  const double tol = options.residual_tol >= 0.0 ? options.residual_tol : 1e-8 * n;
  const CMatrix r = m * out.right_vectors - out.right_vectors * out.eigenvalues.asDiagonal();
  out.residuals.resize(static_cast<std::size_t>(n));
  for (lapack_int i = 0; i < n; ++i) {
    out.residuals[static_cast<std::size_t>(i)] = r.col(i).norm();
    if (out.residuals[static_cast<std::size_t>(i)] > tol * std::max(scale, 1e-300))
      throw NumericError(fmt::format("eigenpair {} has residual {:.3e} above {:.3e}", i,
                                     out.residuals[static_cast<std::size_t>(i)], tol * scale));
  }
  return out;
}

namespace {

void check_nambu(const CVector& psi, const LatticeSpec& lattice) {
  if (static_cast<std::size_t>(psi.size()) != 2 * lattice.size())
    throw DomainError(fmt::format("state has {} components, lattice needs {}", psi.size(),
                                  2 * lattice.size()));
}

}  // namespace

double fractal_dimension(const CVector& psi, const LatticeSpec& lattice) {
  check_nambu(psi, lattice);
  const double n = static_cast<double>(lattice.size());
  if (lattice.size() <= 1) throw DomainError("fractal dimension needs more than one site");
  const double norm2 = psi.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("fractal dimension of a zero vector");
  const double ipr = (psi.array().abs2() / norm2).square().sum();
  return -std::log(ipr) / std::log(std::sqrt(n));
}

std::vector<double> site_density(const CVector& psi) {
  if (psi.size() % 2 != 0) throw DomainError("Nambu state must have even length");
  const Eigen::Index n = psi.size() / 2;
  const double norm2 = psi.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("density of a zero vector");
  std::vector<double> rho(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    rho[static_cast<std::size_t>(i)] = (std::norm(psi(i)) + std::norm(psi(n + i))) / norm2;
  return rho;
}

std::vector<double> layer_density(const CVector& psi, const LatticeSpec& lattice) {
  check_nambu(psi, lattice);
  const auto rho = site_density(psi);
  std::vector<double> p(static_cast<std::size_t>(lattice.extent_x()), 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i)
    p[static_cast<std::size_t>(lattice.site(i).x - 1)] += rho[i];
  return p;
}

std::vector<double> orient_from_accumulation_edge(std::span<const double> p) {
  std::vector<double> out(p.begin(), p.end());
  const std::size_t half = p.size() / 2;
  const double lower = std::accumulate(p.begin(), p.begin() + static_cast<long>(half), 0.0);
  const double upper =
      std::accumulate(p.end() - static_cast<long>(half), p.end(), 0.0);
  if (upper > lower) std::reverse(out.begin(), out.end());
  return out;
}

FitWindow default_fit_window(int length) {
  return {std::clamp(length / 4, 1, std::max(length, 1)),
          std::clamp(3 * length / 4, 1, std::max(length, 1))};
}

FitResult fit_decay(std::span<const double> p, FitWindow window, DecayModel model) {
  if (window.length() < 4) throw DomainError("fit window must span at least 4 points");
  if (window.first < 1 || static_cast<std::size_t>(window.last) > p.size())
    throw DomainError(fmt::format("fit window [{}, {}] outside profile of length {}",
                                  window.first, window.last, p.size()));

  const int n = window.length();
  std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int x = window.first + k;
    const double value = std::max(p[static_cast<std::size_t>(x - 1)], 1e-300);
    const double y = std::log(value);
    const double xv = model == DecayModel::PowerLaw ? std::log(static_cast<double>(x)) : x;
    if (!std::isfinite(y) || !std::isfinite(xv))
      throw DomainError(fmt::format("non-finite logarithm at x = {}", x));
    xs[static_cast<std::size_t>(k)] = xv;
    ys[static_cast<std::size_t>(k)] = y;
  }

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int k = 0; k < n; ++k) {
    const double dx = xs[static_cast<std::size_t>(k)] - mx;
    const double dy = ys[static_cast<std::size_t>(k)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  FitResult fit;
  fit.model = model;
  fit.window = window;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = ys[static_cast<std::size_t>(k)] -
                     (fit.intercept + fit.slope * xs[static_cast<std::size_t>(k)]);
    ss_res += e * e;
  }
  // A flat profile is fit exactly.
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

double spectral_diameter(std::span<const cplx> values) {
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      d = std::max(d, std::abs(values[i] - values[j]));
  return d;
}

namespace {

double min_distance(cplx z, std::span<const cplx> set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : set) best = std::min(best, std::abs(z - w));
  return best;
}

// Minimum-cost assignment (Hungarian algorithm, O(n^3)); returns assignment row -> col.
std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

}  // namespace

SensitivityReport compare_spectra(std::span<const cplx> clean, std::span<const cplx> perturbed,
                                  std::optional<double> epsilon) {
  if (clean.empty() || perturbed.empty()) throw DomainError("compare_spectra needs non-empty spectra");
  SensitivityReport report;
  report.epsilon = epsilon ? *epsilon : kDefaultEpsilonFraction * spectral_diameter(clean);
  if (!(report.epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
  for (const auto& z : perturbed)
    if (min_distance(z, clean) > report.epsilon) report.new_states.push_back(z);
  for (const auto& z : clean)
    if (min_distance(z, perturbed) > report.epsilon) report.vanished_states.push_back(z);
  return report;
}

double matching_distance(std::span<const cplx> a, std::span<const cplx> b, MatchMethod method) {
  if (a.size() != b.size()) throw DomainError("matching needs sets of equal size");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  double worst = 0.0;
  if (method == MatchMethod::Greedy) {
    std::vector<char> taken(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (taken[j]) continue;
        const double d = std::abs(a[i] - b[j]);
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      taken[arg] = 1;
      worst = std::max(worst, best);
    }
    return worst;
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = std::abs(a[i] - b[j]);
  const auto assign = hungarian(cost, n);
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, cost[i * n + assign[i]]);
  return worst;
}

double hausdorff_distance(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.empty() || b.empty()) throw DomainError("Hausdorff distance of an empty set");
  double d = 0.0;
  for (const auto& z : a) d = std::max(d, min_distance(z, b));
  for (const auto& z : b) d = std::max(d, min_distance(z, a));
  return d;
}

double ph_closure_error(std::span<const cplx> eig, MatchMethod method) {
  std::vector<cplx> mirrored(eig.size());
  std::transform(eig.begin(), eig.end(), mirrored.begin(), [](cplx z) { return -std::conj(z); });
  return matching_distance(eig, mirrored, method);
}

}  // namespace bdgskin
