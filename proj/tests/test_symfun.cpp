#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "icurv/symfun.hpp"
#include "oracle.hpp"

using namespace icurv;
using Catch::Approx;

namespace {

std::vector<CurvatureFunction> all_families() {
  return {
      CurvatureFunction::mean_curvature(2),
      CurvatureFunction::mean_curvature(4),
      CurvatureFunction::sigma_ratio(1, 3),
      CurvatureFunction::sigma_ratio(2, 5),
      CurvatureFunction::sigma_ratio_general(1, 3, 5),
      CurvatureFunction::sigma_root(2, 4),
      CurvatureFunction::p_norm(2.0, 3),
      CurvatureFunction::p_norm(3.5, 2),
      CurvatureFunction::surface_example(),
      CurvatureFunction::composite(3, 5, {{1, 2, 0.5}}, {{1, 0.25}}),
  };
}

// Rejection sampling from a family-appropriate box.
std::vector<double> sample_cone_point(const CurvatureFunction& f, std::mt19937_64& rng) {
  const int n = f.dimension();
  const double lo = f.family() == Family::PNorm ? 0.01 : (f.family() == Family::SurfaceExample ? -2.0 : -0.8);
  std::uniform_real_distribution<double> dist(lo, 2.0);
  std::vector<double> lam(static_cast<std::size_t>(n));
  for (int tries = 0; tries < 100000; ++tries) {
    for (auto& v : lam) v = dist(rng);
    if (cone_contains(f, lam)) return lam;
  }
  FAIL("cone sampler exhausted for " << f.spec_string());
  return lam;
}

// Interior sampling: a 2% coordinate ball must stay inside the cone.
std::vector<double> sample_interior_point(const CurvatureFunction& f, std::mt19937_64& rng) {
  for (int tries = 0; tries < 1000; ++tries) {
    auto lam = sample_cone_point(f, rng);
    double scale = 0.0;
    for (double v : lam) scale = std::max(scale, std::abs(v));
    const double d = 0.02 * scale;
    bool inside = true;
    for (std::size_t i = 0; i < lam.size() && inside; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        auto p = lam;
        p[i] += sgn * d;
        if (!cone_contains(f, p)) {
          inside = false;
          break;
        }
      }
    }
    if (inside) return lam;
  }
  FAIL("interior sampler exhausted for " << f.spec_string());
  return {};
}

}  // namespace

TEST_CASE("sigma_k matches subset enumeration and the stated values") {
  CHECK(sigma_k(std::vector<double>{1, 1, 1}, 1) == 3.0);
  CHECK(sigma_k(std::vector<double>{1, 1, 0}, 2) == 1.0);
  // brute force: pair products of (2,3,4) sum to 6+8+12
  CHECK(oracle::sigma_enum({2, 3, 4}, 2) == 26.0);
  CHECK(sigma_k(std::vector<double>{2, 3, 4}, 2) == 26.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (auto& v : lam) v = dist(rng);
    for (int k = 1; k <= n; ++k) {
      const double expected = oracle::sigma_enum(lam, k);
      CHECK(sigma_k(lam, k) == Approx(expected).margin(1e-12 * (1.0 + std::abs(expected))));
    }
  }
}

TEST_CASE("sigma_k rejects out-of-range k") {
  const std::vector<double> lam{1.0, 2.0};
  CHECK_THROWS_AS(sigma_k(lam, 0), std::invalid_argument);
  CHECK_THROWS_AS(sigma_k(lam, 3), std::invalid_argument);
}

TEST_CASE("eval_rho stated values") {
  const auto h2 = CurvatureFunction::mean_curvature(2);
  CHECK(eval_rho(h2, std::vector<double>{1, 1}) == 2.0);

  const auto r13 = CurvatureFunction::sigma_ratio(1, 3);
  CHECK(eval_rho(r13, std::vector<double>{1, 1, 0}) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("cone membership per family") {
  const auto h2 = CurvatureFunction::mean_curvature(2);
  CHECK_FALSE(cone_contains(h2, std::vector<double>{1, -2}));
  CHECK(cone_contains(h2, std::vector<double>{1, -0.5}));

  const auto se = CurvatureFunction::surface_example();
  CHECK(cone_contains(se, std::vector<double>{1, 0.1}));      // 1+0.1>0 and 1-0.5>0
  CHECK_FALSE(cone_contains(se, std::vector<double>{1, 1}));  // the round sphere direction
  CHECK(cone_contains(se, std::vector<double>{0.1, 1}));      // the mirrored branch: 5*0.1-1<0

  const auto root = CurvatureFunction::sigma_root(2, 4);
  CHECK(cone_contains(root, std::vector<double>{1, 1, 1, 0}));

  // wrong length is not in any cone
  CHECK_FALSE(cone_contains(h2, std::vector<double>{1, 1, 1}));
}

TEST_CASE("eval_rho raises ConeError naming the inequality") {
  const auto r13 = CurvatureFunction::sigma_ratio(1, 3);
  try {
    eval_rho(r13, std::vector<double>{-1, -1, -1});
    FAIL("expected ConeError");
  } catch (const ConeError& e) {
    CHECK(e.failed_inequality() == "sigma_1 > 0");
    CHECK(e.lambdas().size() == 3);
  }
}

TEST_CASE("homogeneity: rho(c lambda) = c rho(lambda)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cdist(0.1, 10.0);
  for (const auto& f : all_families()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto lam = sample_interior_point(f, rng);
      const double c = cdist(rng);
      auto scaled = lam;
      for (auto& v : scaled) v *= c;
      REQUIRE(cone_contains(f, scaled));
      const double lhs = eval_rho(f, scaled);
      const double rhs = c * eval_rho(f, lam);
      REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
  }
}

TEST_CASE("parabolicity: finite-difference partials positive at interior points") {
  std::mt19937_64 rng(13);
  for (const auto& f : all_families()) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto lam = sample_interior_point(f, rng);
      double scale = 0.0;
      for (double v : lam) scale = std::max(scale, std::abs(v));
      const double step = 1e-6 * std::max(1.0, scale);
      for (std::size_t i = 0; i < lam.size(); ++i) {
        auto up = lam, dn = lam;
        up[i] += step;
        dn[i] -= step;
        const double d = (eval_rho(f, up) - eval_rho(f, dn)) / (2.0 * step);
        REQUIRE(d > 0.0);
      }
    }
  }
}

TEST_CASE("Newton-Maclaurin consistency: ratio families parabolic on the positive cone") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0.05, 3.0);
  for (const auto& f : {CurvatureFunction::sigma_ratio(1, 3), CurvatureFunction::sigma_ratio(2, 4),
                        CurvatureFunction::sigma_ratio_general(1, 3, 4)}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> lam(static_cast<std::size_t>(f.dimension()));
      for (auto& v : lam) v = dist(rng);
      const double step = 1e-6;
      for (std::size_t i = 0; i < lam.size(); ++i) {
        auto up = lam, dn = lam;
        up[i] += step;
        dn[i] -= step;
        REQUIRE((eval_rho(f, up) - eval_rho(f, dn)) / (2.0 * step) > 0.0);
      }
    }
  }
}

TEST_CASE("permutation symmetry") {
  std::mt19937_64 rng(19);
  for (const auto& f : all_families()) {
    for (int trial = 0; trial < 100; ++trial) {
      auto lam = sample_interior_point(f, rng);
      const double base = eval_rho(f, lam);
      auto perm = lam;
      std::shuffle(perm.begin(), perm.end(), rng);
      if (!cone_contains(f, perm)) continue;  // surface-example branches swap under transposition
      const double v = eval_rho(f, perm);
      REQUIRE(std::abs(v - base) <= 1e-14 * (1.0 + std::abs(base)));
    }
  }
}

TEST_CASE("rho_hat closed forms and segment consistency") {
  const auto h2 = CurvatureFunction::mean_curvature(2);
  CHECK(rho_hat(h2, 0.5) == 1.5);  // (n-1) + xi

  const auto r13 = CurvatureFunction::sigma_ratio(1, 3);
  CHECK(rho_hat(r13, 0.0) == Approx(0.5).epsilon(1e-15));

  // limit toward -alpha: numerator 1 + 2 xi vanishes
  double prev = kInf;
  for (double d : {1e-3, 1e-6, 1e-9}) {
    const double v = rho_hat(r13, -0.5 + d);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-8);

  CHECK_THROWS_AS(rho_hat(h2, -1.0), SegmentDomainError);
  CHECK_THROWS_AS(rho_hat(r13, -0.6), SegmentDomainError);

  // rho_hat equals eval_rho on the segment, for every family
  std::mt19937_64 rng(23);
  for (const auto& f : all_families()) {
    const double lo = -f.alpha();
    const double hi = std::isfinite(f.beta()) ? f.beta() : lo + 8.0;
    std::uniform_real_distribution<double> xid(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
    for (int trial = 0; trial < 50; ++trial) {
      const double xi = xid(rng);
      std::vector<double> lam(static_cast<std::size_t>(f.dimension()), 1.0);
      lam.back() = xi;
      if (!cone_contains(f, lam)) continue;  // composite's segment interval exceeds its lambda cone
      CHECK(rho_hat(f, xi) == Approx(eval_rho(f, lam)).epsilon(1e-13));
    }
  }
}

TEST_CASE("rho_hat_inverse closed forms, round trips, and range errors") {
  const auto h2 = CurvatureFunction::mean_curvature(2);
  CHECK(rho_hat_inverse(h2, 1.0) == 0.0);
  CHECK(rho_hat_inverse(h2, 1.5) == 0.5);

  std::mt19937_64 rng(29);
  for (const auto& f : all_families()) {
    const double lo = -f.alpha();
    const double hi = std::isfinite(f.beta()) ? f.beta() : lo + 6.0;
    std::uniform_real_distribution<double> xid(lo + 1e-2 * (hi - lo), hi - 1e-2 * (hi - lo));
    for (int trial = 0; trial < 200; ++trial) {
      const double xi = xid(rng);
      const double y = rho_hat(f, xi);
      if (!(y > f.range_min() && y < f.gamma())) continue;
      const double back = rho_hat_inverse(f, y);
      REQUIRE(std::abs(back - xi) <= 1e-10 * std::max(1.0, std::abs(xi)));
      REQUIRE(std::abs(rho_hat(f, back) - y) <= 1e-12 * std::max(1.0, y));
    }
  }

  // distinct error codes per side
  try {
    rho_hat_inverse(h2, -0.5);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.side() == RangeSide::Below);
  }
  const auto r13 = CurvatureFunction::sigma_ratio(1, 3);  // gamma = 2
  try {
    rho_hat_inverse(r13, 2.5);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.side() == RangeSide::Above);
  }
  CHECK_THROWS_AS(rho_hat_inverse(r13, 0.0), RangeError);
}

TEST_CASE("rho_hat_derivative: closed forms, positivity, and FD cross-check") {
  const auto h5 = CurvatureFunction::mean_curvature(5);
  CHECK(rho_hat_derivative(h5, -1.3) == 1.0);
  CHECK(rho_hat_derivative(h5, 7.0) == 1.0);

  const auto r13 = CurvatureFunction::sigma_ratio(1, 3);
  CHECK(rho_hat_derivative(r13, 0.0) == Approx(0.75).epsilon(1e-15));

  std::mt19937_64 rng(31);
  for (const auto& f : all_families()) {
    const double lo = -f.alpha();
    const double hi = std::isfinite(f.beta()) ? f.beta() : lo + 6.0;
    std::uniform_real_distribution<double> xid(lo + 1e-2 * (hi - lo), hi - 1e-2 * (hi - lo));
    for (int trial = 0; trial < 100; ++trial) REQUIRE(rho_hat_derivative(f, xid(rng)) > 0.0);
  }

  // finite-difference path against hand closed forms
  const auto root = CurvatureFunction::sigma_root(2, 4);  // rho_hat = (3 + 3 xi)^{1/2}
  for (double xi : {-0.6, 0.0, 1.7}) {
    const double exact = 0.5 * 3.0 / std::sqrt(3.0 + 3.0 * xi);
    CHECK(rho_hat_derivative(root, xi) == Approx(exact).epsilon(1e-7));
  }
  const auto gen = CurvatureFunction::sigma_ratio_general(1, 3, 5);  // ((4+6xi)/(4+xi))^{1/2}
  for (double xi : {-0.3, 0.4, 2.0}) {
    const double u = 4.0 + 6.0 * xi, v = 4.0 + xi;
    const double exact = 0.5 * std::pow(u / v, -0.5) * (6.0 * v - u) / (v * v);
    CHECK(rho_hat_derivative(gen, xi) == Approx(exact).epsilon(1e-7));
  }
}

TEST_CASE("theorem hypothesis reports") {
  const auto h2 = check_theorem_hypotheses(CurvatureFunction::mean_curvature(2));
  CHECK(h2.alpha == 1.0);
  CHECK(std::isinf(h2.beta));
  CHECK(h2.passes_theorem);

  const auto r13 = check_theorem_hypotheses(CurvatureFunction::sigma_ratio(1, 3));
  CHECK(r13.alpha == Approx(0.5));
  CHECK(std::isinf(r13.beta));
  CHECK(r13.gamma == Approx(2.0));
  CHECK(r13.derivative_bound == Approx(4.0 / 3.0));
  CHECK(r13.passes_theorem);

  // beta = 0.2 from the cone inequalities 1 + xi > 0, 1 - 5 xi > 0
  const auto se = check_theorem_hypotheses(CurvatureFunction::surface_example());
  CHECK(se.alpha == Approx(1.0));
  CHECK(se.beta == Approx(0.2));
  CHECK_FALSE(se.passes_theorem);

  const auto pn = check_theorem_hypotheses(CurvatureFunction::p_norm(2.0, 3));
  CHECK_FALSE(pn.cylinder_in_cone);
  CHECK_FALSE(pn.passes_theorem);

  const auto root = check_theorem_hypotheses(CurvatureFunction::sigma_root(2, 3));
  CHECK_FALSE(std::isfinite(root.derivative_bound));
  CHECK_FALSE(root.passes_theorem);

  const auto comp = check_theorem_hypotheses(CurvatureFunction::composite(3, 5, {{1, 2, 0.5}}, {{1, 0.25}}));
  CHECK(comp.alpha > 0.0);
  CHECK(std::isfinite(comp.derivative_bound));
  CHECK(comp.passes_theorem);
}

TEST_CASE("bottle eligibility flags") {
  CHECK(CurvatureFunction::mean_curvature(2).bottle_eligible());
  CHECK(CurvatureFunction::sigma_ratio(1, 3).bottle_eligible());
  CHECK_FALSE(CurvatureFunction::p_norm(2.0, 3).bottle_eligible());
  CHECK_FALSE(CurvatureFunction::surface_example().bottle_eligible());  // beta <= 1
  CHECK_FALSE(CurvatureFunction::sigma_ratio(2, 3).bottle_eligible());  // k = n-1: cylinder has sigma_n = 0
  CHECK(CurvatureFunction::sigma_root(2, 4).bottle_eligible());         // eligible, fails the theorem instead
  CHECK(CurvatureFunction::composite(3, 5, {}, {}).experimental());
}

TEST_CASE("degenerate composite equals the adjacent ratio on the segment") {
  // composite with no extra terms is sigma_k/sigma_{k-1} = adjacent ratio at k-1
  const auto comp = CurvatureFunction::composite(2, 4, {}, {});
  const auto ratio = CurvatureFunction::sigma_ratio(1, 4);
  CHECK(comp.alpha() == Approx(ratio.alpha()).epsilon(1e-9));
  for (double xi : {-0.9, -0.3, 0.0, 1.0, 4.0})
    CHECK(rho_hat(comp, xi) == Approx(rho_hat(ratio, xi)).epsilon(1e-12));
}

TEST_CASE("family spec grammar round-trips") {
  for (const auto& spec : {"H", "sigma-ratio:k=1", "sigma-ratio-gen:i=1,j=3", "sigma-root:k=2",
                           "pnorm:p=2", "surface-example"}) {
    const int n = std::string(spec) == "surface-example" ? 2 : 5;
    const auto f = CurvatureFunction::parse(spec, n);
    CHECK(f.spec_string() == spec);
    const auto again = CurvatureFunction::parse(f.spec_string(), n);
    CHECK(again.family() == f.family());
    CHECK(again.dimension() == f.dimension());
  }
  const auto comp = CurvatureFunction::parse("composite:k=3,a12=0.5,b1=0.25", 5);
  CHECK(comp.family() == Family::Composite);
  CHECK(comp.ratio_terms().size() == 1);
  CHECK(comp.root_terms().size() == 1);

  CHECK_THROWS_AS(CurvatureFunction::parse("nonsense", 3), std::invalid_argument);
  CHECK_THROWS_AS(CurvatureFunction::parse("sigma-ratio:k=9", 3), std::invalid_argument);
  CHECK_THROWS_AS(CurvatureFunction::parse("pnorm:p=0.5", 3), std::invalid_argument);
}
