#include <cmath>
#include <numbers>
#include <random>

#include "bdgskin/nonbloch.hpp"
#include "bdgskin/spectral.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bdgskin;

namespace {

const SolvableParams kStudy{1, 4, 3, 2};

// Open chain at fixed k_y: c_zero on the diagonal, c_plus above, c_minus below.
CMatrix chain_matrix(const LaurentDispersion& d, int l_x) {
  CMatrix t = CMatrix::Zero(l_x, l_x);
  for (int x = 0; x < l_x; ++x) {
    t(x, x) = d.c_zero;
    if (x + 1 < l_x) {
      t(x, x + 1) = d.c_plus;
      t(x + 1, x) = d.c_minus;
    }
  }
  return t;
}

double segment_distance(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(std::real((p - a) * std::conj(ab)) / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace

TEST_CASE("Laurent coefficients") {
  const auto p = laurent_coeffs(kStudy, Branch::Plus, 0.0);
  CHECK(std::abs(p.c_plus - cplx(0, -2)) < 1e-14);
  CHECK(std::abs(p.c_zero - cplx(0, 6)) < 1e-14);
  CHECK(std::abs(p.c_minus - cplx(0, 6)) < 1e-14);
  const auto m = laurent_coeffs(kStudy, Branch::Minus, std::numbers::pi);
  CHECK(std::abs(m.c_plus - cplx(0, 2)) < 1e-14);
  CHECK(std::abs(m.c_zero - cplx(0, -6)) < 1e-14);
  CHECK(std::abs(m.c_minus - cplx(0, -6)) < 1e-14);

  const SolvableParams flat{1, 0, 3, 2};
  for (double ky : {0.0, 0.7, 2.5}) {
    const auto d = laurent_coeffs(flat, Branch::Plus, ky);
    CHECK(std::abs(d.c_plus - d.c_minus) < 1e-15);
    CHECK(gbz_radius(ky, Branch::Plus, flat) == doctest::Approx(1.0));
  }
  CHECK(gbz_radius(0.0, Branch::Plus, kStudy) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("Laurent continuation reproduces the Bloch eigenvalues") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> k(0.0, 2.0 * std::numbers::pi);
  const auto model = kStudy.to_model();
  for (int draw = 0; draw < 200; ++draw) {
    const double kx = k(rng), ky = k(rng);
    const auto [e1, e2] = bloch_eigenvalues(bloch_operator(model, kx, ky));
    const cplx beta = std::polar(1.0, kx);
    const std::vector<cplx> laurent{laurent_coeffs(kStudy, Branch::Plus, ky).evaluate(beta),
                                    laurent_coeffs(kStudy, Branch::Minus, ky).evaluate(beta)};
    CHECK(matching_distance(laurent, std::vector<cplx>{e1, e2}, MatchMethod::Exact) < 1e-10);
  }
}

TEST_CASE("characteristic roots satisfy Vieta and the dispersion") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> k(0.0, 2.0 * std::numbers::pi);
  for (int draw = 0; draw < 100; ++draw) {
    const cplx e = testing::random_complex(rng, 10.0);
    const double ky = k(rng);
    const Branch b = draw % 2 ? Branch::Plus : Branch::Minus;
    const auto r = char_roots(e, ky, b, kStudy);
    const auto d = laurent_coeffs(kStudy, b, ky);
    CHECK(std::abs(r.beta1) <= std::abs(r.beta2));
    CHECK(std::abs(r.beta1 * r.beta2 - d.c_minus / d.c_plus) < 1e-10 * std::abs(d.c_minus / d.c_plus));
    CHECK(std::abs(r.beta1 + r.beta2 - (e - d.c_zero) / d.c_plus) < 1e-10 * (1.0 + std::abs(e)));
    CHECK(std::abs(d.evaluate(r.beta1) - e) < 1e-9 * (1.0 + std::abs(e)));
    CHECK(std::abs(d.evaluate(r.beta2) - e) < 1e-9 * (1.0 + std::abs(e)));
  }
}

TEST_CASE("energy on the Bloch curve has a unit-modulus root") {
  for (double kx : {0.3, 1.9, 4.4}) {
    const double ky = 0.8;
    const cplx e = laurent_coeffs(kStudy, Branch::Plus, ky).evaluate(std::polar(1.0, kx));
    const auto r = char_roots(e, ky, Branch::Plus, kStudy);
    const double off = std::min(std::abs(std::abs(r.beta1) - 1.0), std::abs(std::abs(r.beta2) - 1.0));
    CHECK(off < 1e-10);
  }
}

TEST_CASE("degenerate coefficients are rejected") {
  const SolvableParams linear{1, 2, 3, 2};
  CHECK_THROWS_AS(char_roots({1, 1}, 0.0, Branch::Plus, linear), DomainError);
  CHECK_THROWS_AS(uniform_grid(0), DomainError);
  CHECK_THROWS_AS(cylinder_momenta(0), DomainError);
}

TEST_CASE("cylinder spectrum lies on the open-chain spectra") {
  const int l_x = 40;
  const auto ky = cylinder_momenta(8);
  const auto theta = uniform_grid(64);
  const auto curve = cylinder_spectrum(kStudy, ky, theta);
  REQUIRE(curve.size() == 2 * ky.size() * theta.size());
  double worst = 0.0;
  std::size_t block = 0;
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    for (double k : ky) {
      const CVector e = eigenvalues_of(chain_matrix(laurent_coeffs(kStudy, b, k), l_x));
      const std::size_t off = block * theta.size();
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        double best = INFINITY;
        for (std::size_t t = 0; t < theta.size(); ++t)
          best = std::min(best, segment_distance(e(i), curve[off + t], curve[off + (t + 1) % theta.size()]));
        worst = std::max(worst, best);
      }
      ++block;
    }
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("block spectrum is the union of chain spectra") {
  const int l_x = 8, l_y = 6;
  const auto b = block_transform(assemble_bdg(kStudy.to_model(), cylinder(l_x, l_y)).m_dyn);
  for (auto [branch, block] : {std::pair{Branch::Plus, &b.m_p}, std::pair{Branch::Minus, &b.m_m}}) {
    std::vector<cplx> chains;
    for (double k : cylinder_momenta(l_y)) {
      const CVector e = eigenvalues_of(chain_matrix(laurent_coeffs(kStudy, branch, k), l_x));
      chains.insert(chains.end(), e.data(), e.data() + e.size());
    }
    const CVector direct = eigenvalues_of(*block);
    CHECK(matching_distance(as_span(direct), chains, MatchMethod::Exact) < 1e-6);
  }
}

TEST_CASE("finite-chain propagator matches a direct resolvent") {
  const int l_x = 9, l_y = 8;
  const auto lat = cylinder(l_x, l_y);
  const auto b = block_transform(assemble_bdg(kStudy.to_model(), lat).m_dyn);
  const auto ky = cylinder_momenta(l_y);
  for (cplx e : {cplx{0.85, 7.59}, cplx{-2.12, -7.63}}) {
    for (auto [branch, block] : {std::pair{Branch::Plus, &b.m_p}, std::pair{Branch::Minus, &b.m_m}}) {
      Resolvent g(*block, e);
      for (auto [to, from] : {std::pair{Site{7, 5}, Site{2, 1}}, std::pair{Site{2, 1}, Site{7, 5}},
                              std::pair{Site{4, 3}, Site{4, 3}}}) {
        const cplx direct = g.element(lat.require_index(to), lat.require_index(from));
        const cplx closed = finite_chain_propagator(e, to, from, branch, kStudy, l_x, ky);
        CHECK(std::abs(closed - direct) <= 1e-9 * std::abs(direct));
      }
    }
  }
  CHECK_THROWS_AS(finite_chain_propagator({0, 8}, {10, 1}, {1, 1}, Branch::Plus, kStudy, l_x, ky),
                  DomainError);
}

TEST_CASE("residue propagator matches a long-chain resolvent in the bulk") {
  const int l_x = 60, l_y = 6;
  const auto lat = cylinder(l_x, l_y);
  const auto b = block_transform(assemble_bdg(kStudy.to_model(), lat).m_dyn);
  const auto ky = cylinder_momenta(l_y);
  const cplx e{0.0, 20.0};
  Resolvent g(b.m_p, e);
  const Site from{28, 2}, to{32, 4};
  const cplx direct = g.element(lat.require_index(to), lat.require_index(from));
  const cplx bulk = residue_propagator(e, to, from, Branch::Plus, kStudy, ky);
  CHECK(std::abs(bulk - direct) <= 1e-6 * std::abs(direct));
  CHECK(calibration_factor(bulk, direct) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(residue_propagator(e, to, from, Branch::Plus, kStudy, ky, 2.0) == 2.0 * bulk);
  CHECK_THROWS_AS(calibration_factor(0.0, 1.0), NumericError);
}

TEST_CASE("residue propagator rejects colliding roots") {
  const auto d = laurent_coeffs(kStudy, Branch::Plus, 0.0);
  const cplx e = d.c_zero + std::sqrt(4.0 * d.c_plus * d.c_minus);
  const std::vector<double> ky{0.0};
  CHECK_THROWS_AS(residue_propagator(e, {3, 1}, {1, 1}, Branch::Plus, kStudy, ky), NumericError);
}

TEST_CASE("asymptotic estimate") {
  const MuExtrema plus{0.5, -0.5, 0.0, 0.0}, minus{0.0, 0.0, 0.0, 0.0};
  CHECK(asymptotic_rho(0.01, 16, plus, minus, 1.0) == doctest::Approx(0.01 * std::exp(4.0)));
  CHECK(asymptotic_rho(0.01, 16, plus, minus, -1.0) == doctest::Approx(0.01));
  CHECK_THROWS_AS(asymptotic_rho(0.0, 16, plus, minus, 1.0), DomainError);
  CHECK_THROWS_AS(asymptotic_rho(0.01, 0.5, plus, minus, 1.0), DomainError);
  CHECK(active_branch({0, 1}) == Branch::Plus);
  CHECK(active_branch({0, -1}) == Branch::Minus);
}

TEST_CASE("mu extrema without diagonal hopping straddle zero") {
  const SolvableParams flat{1, 0, 3, 2};
  const auto grid = uniform_grid(64);
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    const auto m = mu_extrema({20, 20}, b, flat, grid);
    CHECK(m.mu_max_1 < 0.0);
    CHECK(m.mu_min_2 > 0.0);
    CHECK(m.mu_max_1 == doctest::Approx(-m.mu_min_2));
  }
}

TEST_CASE("mu extrema agree with the root trajectory") {
  const auto grid = uniform_grid(32);
  const cplx e{0.85, 7.59};
  const auto rows = root_trajectory(e, kStudy, grid);
  REQUIRE(rows.size() == grid.size());
  const auto m = mu_extrema(e, Branch::Plus, kStudy, grid);
  double hi = -INFINITY, lo = INFINITY;
  for (const auto& r : rows) {
    CHECK(r.abs_beta1_plus <= r.abs_beta2_plus);
    CHECK(r.abs_beta1_minus <= r.abs_beta2_minus);
    hi = std::max(hi, std::log(r.abs_beta1_plus));
    lo = std::min(lo, std::log(r.abs_beta2_plus));
  }
  CHECK(m.mu_max_1 == doctest::Approx(hi));
  CHECK(m.mu_min_2 == doctest::Approx(lo));
}
