#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bdgskin/lattice.hpp"
#include "bdgskin/types.hpp"

namespace bdgskin {

/// Eigenpairs of a dynamical matrix. Columns of `right_vectors` are Euclidean-normalized
/// over both Nambu components; `residuals[i]` = ‖M ψ_i − E_i ψ_i‖₂.
struct Spectrum {
  CVector eigenvalues;
  CMatrix right_vectors;  // empty when computed without vectors
  std::vector<double> residuals;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  bool has_vectors() const { return right_vectors.size() > 0; }
  CVector vector(std::size_t i) const { return right_vectors.col(static_cast<Eigen::Index>(i)); }
  std::size_t nearest(cplx target) const;
};

struct DiagonalizeOptions {
  bool compute_vectors = true;
  std::size_t max_dimension = 6400;
  /// Residual tolerance relative to ‖M‖_max; negative selects 1e-8 * dimension.
  double residual_tol = -1.0;
};

/// Dense right eigendecomposition (LAPACK zgeev). Throws NumericError on non-convergence
/// or when a residual exceeds the tolerance, DomainError on bad shapes.
Spectrum diagonalize(const CMatrix& m, const DiagonalizeOptions& options = {});

inline CVector eigenvalues_of(const CMatrix& m, std::size_t max_dimension = 6400) {
  return diagonalize(m, {.compute_vectors = false, .max_dimension = max_dimension}).eigenvalues;
}

/// -ln Σ(|ψ_p|⁴ + |ψ_h|⁴) / ln √N over the N active sites; ψ is normalized internally.
double fractal_dimension(const CVector& psi, const LatticeSpec& lattice);

/// P(x) = Σ_y (|ψ_p(x,y)|² + |ψ_h(x,y)|²), indexed by x-1; sums to one.
std::vector<double> layer_density(const CVector& psi, const LatticeSpec& lattice);

/// Probability density |ψ_p|² + |ψ_h|² per site.
std::vector<double> site_density(const CVector& psi);

/// Reverses `p` if its weight sits in the upper half, so that index 0 is the edge where
/// the state accumulates.
std::vector<double> orient_from_accumulation_edge(std::span<const double> p);

enum class DecayModel { Exponential, PowerLaw };

/// Inclusive 1-based x range.
struct FitWindow {
  int first = 1;
  int last = 1;
  int length() const { return last - first + 1; }
};

/// [L/4, 3L/4], clamped to [1, L].
FitWindow default_fit_window(int length);

struct FitResult {
  DecayModel model = DecayModel::Exponential;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  FitWindow window;
};

/// Least-squares line through (x, ln P) or (ln x, ln P) over the window, x = 1-based
/// position. Zeros are clipped at 1e-300. Throws DomainError for windows shorter than 4
/// or outside the profile and for non-finite logarithms.
FitResult fit_decay(std::span<const double> p, FitWindow window, DecayModel model);

/// Largest pairwise distance in the set.
double spectral_diameter(std::span<const cplx> values);

struct SensitivityReport {
  std::vector<cplx> new_states;
  std::vector<cplx> vanished_states;
  double epsilon = 0.0;
};

inline constexpr double kDefaultEpsilonFraction = 0.02;

/// New states: perturbed eigenvalues farther than ε from every clean eigenvalue.
/// Vanished states: clean eigenvalues farther than ε from every perturbed eigenvalue.
/// Default ε = 0.02 × clean spectral diameter.
SensitivityReport compare_spectra(std::span<const cplx> clean, std::span<const cplx> perturbed,
                                  std::optional<double> epsilon = std::nullopt);

inline std::span<const cplx> as_span(const CVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

enum class MatchMethod { Greedy, Exact };

/// One-to-one matching of equal-size sets; returns the largest matched distance.
/// Greedy walks `a` in order and takes the nearest unmatched element of `b`; Exact minimizes
/// the summed distance (Hungarian, O(n^3)).
double matching_distance(std::span<const cplx> a, std::span<const cplx> b,
                         MatchMethod method = MatchMethod::Greedy);

/// Hausdorff distance between two point sets.
double hausdorff_distance(std::span<const cplx> a, std::span<const cplx> b);

/// Matching distance between eig and its image under E -> -E*.
double ph_closure_error(std::span<const cplx> eig, MatchMethod method = MatchMethod::Exact);

}  // namespace bdgskin
