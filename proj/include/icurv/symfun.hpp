#pragma once

// Symmetric-function kernel: elementary symmetric polynomials, the curvature
// function families rho with their admissibility cones, the single-variable
// restriction rho_hat(xi) = rho(1,...,1,xi) together with its derivative and
// monotone inverse, and the uniform-parabolicity hypothesis checker.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icurv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors

/// Argument lies outside the admissibility cone Gamma of a family.
class ConeError : public std::domain_error {
 public:
  ConeError(const std::string& failed_inequality, std::vector<double> lambdas)
      : std::domain_error("cone violation: " + failed_inequality),
        failed_inequality_(failed_inequality),
        lambdas_(std::move(lambdas)) {}

  const std::string& failed_inequality() const { return failed_inequality_; }
  const std::vector<double>& lambdas() const { return lambdas_; }

 private:
  std::string failed_inequality_;
  std::vector<double> lambdas_;
};

/// xi lies outside the admissible interval (-alpha, beta).
class SegmentDomainError : public std::domain_error {
 public:
  SegmentDomainError(double xi, double lo, double hi)
      : std::domain_error("xi outside admissible interval"), xi_(xi), lo_(lo), hi_(hi) {}
  double xi() const { return xi_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double xi_, lo_, hi_;
};

/// Which side of the range (0, gamma) an inversion argument violated.
enum class RangeSide { Below, Above };

/// y lies outside the range of rho_hat; side() distinguishes y <= range_min
/// from y >= gamma so the ODE layer can classify a domain exit.
class RangeError : public std::domain_error {
 public:
  RangeError(RangeSide side, double value)
      : std::domain_error(side == RangeSide::Below ? "value at or below range of rho_hat"
                                                   : "value at or above range of rho_hat"),
        side_(side),
        value_(value) {}
  RangeSide side() const { return side_; }
  double value() const { return value_; }

 private:
  RangeSide side_;
  double value_;
};

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials

/// All elementary symmetric polynomials sigma_0..sigma_n of the input,
/// accumulated through the coefficient recurrence of prod_i (x + lambda_i).
inline std::vector<double> elementary_symmetric(std::span<const double> lambdas) {
  const std::size_t n = lambdas.size();
  std::vector<double> sigma(n + 1, 0.0);
  sigma[0] = 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double lam = lambdas[m];
    for (std::size_t k = m + 1; k >= 1; --k) sigma[k] += lam * sigma[k - 1];
  }
  return sigma;
}

/// sigma_k(lambdas), 1 <= k <= n.
inline double sigma_k(std::span<const double> lambdas, int k) {
  const int n = static_cast<int>(lambdas.size());
  if (k < 1 || k > n) {
    throw std::invalid_argument("sigma_k: k must satisfy 1 <= k <= n, got k=" + std::to_string(k) +
                                ", n=" + std::to_string(n));
  }
  return elementary_symmetric(lambdas)[static_cast<std::size_t>(k)];
}

/// Binomial coefficient as a double (exact for the small indices used here).
inline double binom(int m, int r) {
  if (r < 0 || r > m) return 0.0;
  r = std::min(r, m - r);
  double v = 1.0;
  for (int t = 1; t <= r; ++t) v = v * static_cast<double>(m - r + t) / static_cast<double>(t);
  return v;
}

/// sigma_m(1,...,1,xi) with `ones` leading ones: a linear function of xi.
inline double sigma_on_segment(int ones, int m, double xi) {
  return binom(ones, m) + binom(ones, m - 1) * xi;
}

// ---------------------------------------------------------------------------
// Curvature function families

enum class Family {
  MeanCurvature,      // H = sigma_1
  SigmaRatioAdjacent, // sigma_{k+1}/sigma_k
  SigmaRatioGeneral,  // (sigma_j/sigma_i)^{1/(j-i)}, j > i
  SigmaRoot,          // sigma_k^{1/k}
  PNorm,              // (sum lambda_i^p)^{1/p}, p > 1
  SurfaceExample,     // (l1+l2)^3/(l1-l2)^2 on a two-branch cone, n = 2
  Composite,          // sigma_k/sigma_{k-1} + sum a_ij (sigma_j/sigma_i)^{1/(j-i)} + sum b_l sigma_l^{1/l}
};

struct CompositeRatioTerm {
  int i = 0, j = 0;
  double coef = 0.0;
};
struct CompositeRootTerm {
  int l = 0;
  double coef = 0.0;
};

class CurvatureFunction;

double rho_hat(const CurvatureFunction& f, double xi);
double rho_hat_derivative(const CurvatureFunction& f, double xi);

namespace detail {
double segment_value(const CurvatureFunction& f, double xi);
double segment_derivative_closed(const CurvatureFunction& f, double xi, bool* has_closed);
double scan_gamma(const CurvatureFunction& f);
double scan_uniform_c(const CurvatureFunction& f);
double composite_alpha(const CurvatureFunction& f);
}  // namespace detail

/// One registered curvature function rho: Gamma -> R_+, immutable after
/// construction. Registration computes the xi-interval (-alpha, beta) of the
/// segment (1,...,1,xi), the range supremum gamma, and the uniform derivative
/// bound C used by the existence theorem's hypotheses.
class CurvatureFunction {
 public:
  static CurvatureFunction mean_curvature(int n) {
    CurvatureFunction f(Family::MeanCurvature, n, "H");
    f.finish_registration();
    return f;
  }

  static CurvatureFunction sigma_ratio(int k, int n) {
    if (k < 1 || k + 1 > n) throw std::invalid_argument("sigma_ratio: need 1 <= k <= n-1");
    CurvatureFunction f(Family::SigmaRatioAdjacent, n, "sigma-ratio:k=" + std::to_string(k));
    f.k_ = k;
    f.finish_registration();
    return f;
  }

  static CurvatureFunction sigma_ratio_general(int i, int j, int n) {
    if (i < 1 || i >= j || j > n) throw std::invalid_argument("sigma_ratio_general: need 1 <= i < j <= n");
    CurvatureFunction f(Family::SigmaRatioGeneral, n,
                        "sigma-ratio-gen:i=" + std::to_string(i) + ",j=" + std::to_string(j));
    f.i_ = i;
    f.j_ = j;
    f.finish_registration();
    return f;
  }

  static CurvatureFunction sigma_root(int k, int n) {
    if (k < 1 || k > n) throw std::invalid_argument("sigma_root: need 1 <= k <= n");
    CurvatureFunction f(Family::SigmaRoot, n, "sigma-root:k=" + std::to_string(k));
    f.k_ = k;
    f.finish_registration();
    return f;
  }

  static CurvatureFunction p_norm(double p, int n) {
    if (!(p > 1.0)) throw std::invalid_argument("p_norm: need p > 1");
    char buf[32];
    std::snprintf(buf, sizeof buf, "pnorm:p=%g", p);
    CurvatureFunction f(Family::PNorm, n, buf);
    f.p_ = p;
    f.finish_registration();
    return f;
  }

  static CurvatureFunction surface_example() {
    CurvatureFunction f(Family::SurfaceExample, 2, "surface-example");
    f.finish_registration();
    return f;
  }

  // The composite family's cone is only described in segment terms; general
  // lambda membership is restricted to the component where every term is
  // positive and parabolic, and the family is flagged experimental.
  static CurvatureFunction composite(int k, int n, std::vector<CompositeRatioTerm> ratios,
                                     std::vector<CompositeRootTerm> roots) {
    if (k < 2 || k >= n) throw std::invalid_argument("composite: need 2 <= k <= n-1");
    for (const auto& t : ratios) {
      if (t.i < 1 || t.i >= t.j || t.j >= k) throw std::invalid_argument("composite: need 1 <= i < j < k");
      if (t.coef < 0.0) throw std::invalid_argument("composite: ratio coefficients must be >= 0");
    }
    for (const auto& t : roots) {
      if (t.l < 1 || t.l >= k) throw std::invalid_argument("composite: need 1 <= l < k");
      if (t.coef < 0.0) throw std::invalid_argument("composite: root coefficients must be >= 0");
    }
    std::ostringstream ss;
    ss << "composite:k=" << k;
    for (const auto& t : ratios) ss << ",a" << t.i << t.j << "=" << t.coef;
    for (const auto& t : roots) ss << ",b" << t.l << "=" << t.coef;
    CurvatureFunction f(Family::Composite, n, ss.str());
    f.k_ = k;
    f.ratio_terms_ = std::move(ratios);
    f.root_terms_ = std::move(roots);
    f.experimental_ = true;
    f.finish_registration();
    return f;
  }

  /// Parse a family spec string of the CLI grammar: "H", "sigma-ratio:k=1",
  /// "sigma-ratio-gen:i=1,j=3", "sigma-root:k=2", "pnorm:p=2",
  /// "surface-example", "composite:k=3,a12=0.5,b1=0.25".
  static CurvatureFunction parse(std::string_view spec, int n);

  Family family() const { return family_; }
  int dimension() const { return n_; }
  int ratio_k() const { return k_; }
  int general_i() const { return i_; }
  int general_j() const { return j_; }
  double pnorm_p() const { return p_; }
  const std::vector<CompositeRatioTerm>& ratio_terms() const { return ratio_terms_; }
  const std::vector<CompositeRootTerm>& root_terms() const { return root_terms_; }
  const std::string& spec_string() const { return spec_; }

  /// Left endpoint magnitude of the xi-interval: (1,...,1,xi) admissible on (-alpha, beta).
  double alpha() const { return alpha_; }
  /// Right endpoint of the xi-interval (often +inf).
  double beta() const { return beta_; }
  /// Supremum of rho_hat over the interval.
  double gamma() const { return gamma_; }
  /// Infimum of rho_hat over the interval (0 for families vanishing at -alpha).
  double range_min() const { return range_min_; }
  /// Upper bound for d(rho_hat)/dxi over the interval, +inf when unbounded.
  double uniform_c() const { return uniform_c_; }
  /// rho_hat(0) = rho(1,...,1,0); only meaningful when the cylinder direction is admissible.
  double rho_hat0() const { return rho_hat0_; }
  bool cylinder_in_cone() const { return cylinder_in_cone_; }
  /// Cylinder direction admissible and beta > 1: the profile ODE may be integrated.
  bool bottle_eligible() const { return bottle_eligible_; }
  bool experimental() const { return experimental_; }

 private:
  CurvatureFunction(Family fam, int n, std::string spec) : family_(fam), n_(n), spec_(std::move(spec)) {
    if (n < 2) throw std::invalid_argument("dimension n must be >= 2");
    if (fam == Family::SurfaceExample && n != 2) throw std::invalid_argument("surface-example requires n = 2");
  }

  void finish_registration();

  Family family_;
  int n_;
  std::string spec_;
  int k_ = 0, i_ = 0, j_ = 0;
  double p_ = 0.0;
  std::vector<CompositeRatioTerm> ratio_terms_;
  std::vector<CompositeRootTerm> root_terms_;

  double alpha_ = 0.0;
  double beta_ = kInf;
  double gamma_ = kInf;
  double range_min_ = 0.0;
  double uniform_c_ = kInf;
  double rho_hat0_ = 0.0;
  bool cylinder_in_cone_ = false;
  bool bottle_eligible_ = false;
  bool experimental_ = false;

  friend double detail::segment_value(const CurvatureFunction&, double);
  friend double detail::segment_derivative_closed(const CurvatureFunction&, double, bool*);
};

// ---------------------------------------------------------------------------
// Cone membership

namespace detail {

// Connected component of {sigma_m > 0} containing the positive diagonal:
// sigma_1 > 0, ..., sigma_m > 0. Returns the index of the first failing
// sigma, or 0 when all hold.
inline int garding_first_failure(std::span<const double> lambdas, int m) {
  const auto sig = elementary_symmetric(lambdas);
  for (int t = 1; t <= m; ++t)
    if (!(sig[static_cast<std::size_t>(t)] > 0.0)) return t;
  return 0;
}

inline bool sigma_root_cone(std::span<const double> lambdas, int k, std::string* failure) {
  const auto sig = elementary_symmetric(lambdas);
  if (!(sig[static_cast<std::size_t>(k)] > 0.0)) {
    if (failure) *failure = "sigma_" + std::to_string(k) + " > 0";
    return false;
  }
  if (k >= 2) {
    std::vector<double> minor(lambdas.size() - 1);
    for (std::size_t drop = 0; drop < lambdas.size(); ++drop) {
      std::size_t w = 0;
      for (std::size_t t = 0; t < lambdas.size(); ++t)
        if (t != drop) minor[w++] = lambdas[t];
      const double s = elementary_symmetric(minor)[static_cast<std::size_t>(k - 1)];
      if (!(s > 0.0)) {
        if (failure)
          *failure = "sigma_" + std::to_string(k - 1) + "(lambda with entry " + std::to_string(drop) +
                     " removed) > 0";
        return false;
      }
    }
  }
  return true;
}

inline bool cone_contains_impl(const CurvatureFunction& f, std::span<const double> lambdas,
                               std::string* failure) {
  switch (f.family()) {
    case Family::MeanCurvature: {
      double s = 0.0;
      for (double v : lambdas) s += v;
      if (s > 0.0) return true;
      if (failure) *failure = "sigma_1 > 0";
      return false;
    }
    case Family::SigmaRatioAdjacent: {
      const int bad = garding_first_failure(lambdas, f.ratio_k() + 1);
      if (bad == 0) return true;
      if (failure) *failure = "sigma_" + std::to_string(bad) + " > 0";
      return false;
    }
    case Family::SigmaRatioGeneral: {
      const int bad = garding_first_failure(lambdas, f.general_j());
      if (bad == 0) return true;
      if (failure) *failure = "sigma_" + std::to_string(bad) + " > 0";
      return false;
    }
    case Family::SigmaRoot:
      return sigma_root_cone(lambdas, f.ratio_k(), failure);
    case Family::PNorm: {
      for (std::size_t t = 0; t < lambdas.size(); ++t) {
        if (!(lambdas[t] > 0.0)) {
          if (failure) *failure = "lambda_" + std::to_string(t + 1) + " > 0";
          return false;
        }
      }
      return true;
    }
    case Family::SurfaceExample: {
      const double l1 = lambdas[0], l2 = lambdas[1];
      if (!(l1 + l2 > 0.0)) {
        if (failure) *failure = "lambda_1 + lambda_2 > 0";
        return false;
      }
      if (l1 - 5.0 * l2 > 0.0 || 5.0 * l1 - l2 < 0.0) return true;
      if (failure) *failure = "lambda_1 - 5 lambda_2 > 0 or 5 lambda_1 - lambda_2 < 0";
      return false;
    }
    case Family::Composite: {
      const int bad = garding_first_failure(lambdas, f.ratio_k());
      if (bad == 0) return true;
      if (failure) *failure = "sigma_" + std::to_string(bad) + " > 0";
      return false;
    }
  }
  return false;
}

}  // namespace detail

/// True iff lambdas lies strictly inside the family's cone Gamma. Total; the
/// cone is open, so boundary points report false.
inline bool cone_contains(const CurvatureFunction& f, std::span<const double> lambdas) {
  if (lambdas.size() != static_cast<std::size_t>(f.dimension())) return false;
  return detail::cone_contains_impl(f, lambdas, nullptr);
}

// ---------------------------------------------------------------------------
// rho evaluation

inline double eval_rho(const CurvatureFunction& f, std::span<const double> lambdas) {
  if (lambdas.size() != static_cast<std::size_t>(f.dimension()))
    throw std::invalid_argument("eval_rho: lambda vector length must equal the registered dimension");
  std::string failure;
  if (!detail::cone_contains_impl(f, lambdas, &failure))
    throw ConeError(failure, std::vector<double>(lambdas.begin(), lambdas.end()));

  switch (f.family()) {
    case Family::MeanCurvature: {
      double s = 0.0;
      for (double v : lambdas) s += v;
      return s;
    }
    case Family::SigmaRatioAdjacent: {
      const auto sig = elementary_symmetric(lambdas);
      return sig[static_cast<std::size_t>(f.ratio_k() + 1)] / sig[static_cast<std::size_t>(f.ratio_k())];
    }
    case Family::SigmaRatioGeneral: {
      const auto sig = elementary_symmetric(lambdas);
      const double ratio =
          sig[static_cast<std::size_t>(f.general_j())] / sig[static_cast<std::size_t>(f.general_i())];
      return std::pow(ratio, 1.0 / static_cast<double>(f.general_j() - f.general_i()));
    }
    case Family::SigmaRoot: {
      const auto sig = elementary_symmetric(lambdas);
      return std::pow(sig[static_cast<std::size_t>(f.ratio_k())], 1.0 / static_cast<double>(f.ratio_k()));
    }
    case Family::PNorm: {
      double s = 0.0;
      for (double v : lambdas) s += std::pow(v, f.pnorm_p());
      return std::pow(s, 1.0 / f.pnorm_p());
    }
    case Family::SurfaceExample: {
      const double sum = lambdas[0] + lambdas[1];
      const double diff = lambdas[0] - lambdas[1];
      return sum * sum * sum / (diff * diff);
    }
    case Family::Composite: {
      const auto sig = elementary_symmetric(lambdas);
      const int k = f.ratio_k();
      double v = sig[static_cast<std::size_t>(k)] / sig[static_cast<std::size_t>(k - 1)];
      for (const auto& t : f.ratio_terms())
        v += t.coef * std::pow(sig[static_cast<std::size_t>(t.j)] / sig[static_cast<std::size_t>(t.i)],
                               1.0 / static_cast<double>(t.j - t.i));
      for (const auto& t : f.root_terms())
        v += t.coef * std::pow(sig[static_cast<std::size_t>(t.l)], 1.0 / static_cast<double>(t.l));
      return v;
    }
  }
  throw std::logic_error("eval_rho: unhandled family");
}

// ---------------------------------------------------------------------------
// The restriction rho_hat and its calculus

namespace detail {

// rho_hat(xi) through the per-family segment formulas; sigma_m(1,...,1,xi) is
// linear in xi, so every family reduces to a closed expression here. Assumes
// xi already verified to lie in (-alpha, beta) (composite: the extended
// interval, which reaches below the general-lambda cone slice).
inline double segment_value(const CurvatureFunction& f, double xi) {
  const int ones = f.dimension() - 1;
  switch (f.family()) {
    case Family::MeanCurvature:
      return static_cast<double>(ones) + xi;
    case Family::SigmaRatioAdjacent: {
      const int k = f.ratio_k();
      return (binom(ones, k + 1) + binom(ones, k) * xi) / (binom(ones, k) + binom(ones, k - 1) * xi);
    }
    case Family::SigmaRatioGeneral: {
      const int i = f.general_i(), j = f.general_j();
      return std::pow(sigma_on_segment(ones, j, xi) / sigma_on_segment(ones, i, xi),
                      1.0 / static_cast<double>(j - i));
    }
    case Family::SigmaRoot:
      return std::pow(sigma_on_segment(ones, f.ratio_k(), xi), 1.0 / static_cast<double>(f.ratio_k()));
    case Family::PNorm:
      return std::pow(static_cast<double>(ones) + std::pow(xi, f.pnorm_p()), 1.0 / f.pnorm_p());
    case Family::SurfaceExample: {
      const double a = 1.0 + xi, b = 1.0 - xi;
      return a * a * a / (b * b);
    }
    case Family::Composite: {
      const int k = f.ratio_k();
      double v = sigma_on_segment(ones, k, xi) / sigma_on_segment(ones, k - 1, xi);
      for (const auto& t : f.ratio_terms())
        v += t.coef * std::pow(sigma_on_segment(ones, t.j, xi) / sigma_on_segment(ones, t.i, xi),
                               1.0 / static_cast<double>(t.j - t.i));
      for (const auto& t : f.root_terms())
        v += t.coef * std::pow(sigma_on_segment(ones, t.l, xi), 1.0 / static_cast<double>(t.l));
      return v;
    }
  }
  throw std::logic_error("segment_value: unhandled family");
}

// Closed-form derivative where the source formulas give one (mean curvature
// and the adjacent sigma ratio); other families use finite differences.
inline double segment_derivative_closed(const CurvatureFunction& f, double xi, bool* has_closed) {
  *has_closed = true;
  const int ones = f.dimension() - 1;
  switch (f.family()) {
    case Family::MeanCurvature:
      return 1.0;
    case Family::SigmaRatioAdjacent: {
      const int k = f.ratio_k();
      const double ck = binom(ones, k), ckm = binom(ones, k - 1), ckp = binom(ones, k + 1);
      const double den = ck + ckm * xi;
      return (ck * ck - ckm * ckp) / (den * den);
    }
    default:
      *has_closed = false;
      return 0.0;
  }
}

}  // namespace detail

/// rho_hat(xi) = rho(1,...,1,xi) on (-alpha, beta).
inline double rho_hat(const CurvatureFunction& f, double xi) {
  if (!(xi > -f.alpha() && xi < f.beta())) throw SegmentDomainError(xi, -f.alpha(), f.beta());
  return detail::segment_value(f, xi);
}

/// d(rho_hat)/dxi > 0 on (-alpha, beta). Closed form for the families whose
/// formulas are given explicitly; otherwise a central difference with step
/// adapted to the distance from the interval endpoints.
inline double rho_hat_derivative(const CurvatureFunction& f, double xi) {
  if (!(xi > -f.alpha() && xi < f.beta())) throw SegmentDomainError(xi, -f.alpha(), f.beta());
  bool has_closed = false;
  const double closed = detail::segment_derivative_closed(f, xi, &has_closed);
  if (has_closed) return closed;

  double step = 1e-6 * std::max(1.0, std::abs(xi));
  const double to_lo = xi - (-f.alpha());
  step = std::min(step, 0.25 * to_lo);
  if (std::isfinite(f.beta())) step = std::min(step, 0.25 * (f.beta() - xi));
  return (detail::segment_value(f, xi + step) - detail::segment_value(f, xi - step)) / (2.0 * step);
}

/// Inverse of rho_hat on (range_min, gamma). Closed form where the segment
/// formula inverts algebraically, otherwise bracketed bisection with secant
/// polish (expanding the bracket toward an infinite beta).
inline double rho_hat_inverse(const CurvatureFunction& f, double y) {
  if (!(y > f.range_min())) throw RangeError(RangeSide::Below, y);
  if (!(y < f.gamma())) throw RangeError(RangeSide::Above, y);

  const int ones = f.dimension() - 1;
  switch (f.family()) {
    case Family::MeanCurvature:
      return y - static_cast<double>(ones);
    case Family::SigmaRatioAdjacent: {
      const double ck = binom(ones, f.ratio_k()), ckm = binom(ones, f.ratio_k() - 1),
                   ckp = binom(ones, f.ratio_k() + 1);
      return (y * ck - ckp) / (ck - y * ckm);
    }
    case Family::SigmaRatioGeneral: {
      const int i = f.general_i(), j = f.general_j();
      const double z = std::pow(y, static_cast<double>(j - i));
      const double ci = binom(ones, i), cim = binom(ones, i - 1);
      const double cj = binom(ones, j), cjm = binom(ones, j - 1);
      return (z * ci - cj) / (cjm - z * cim);
    }
    case Family::SigmaRoot: {
      const int k = f.ratio_k();
      return (std::pow(y, static_cast<double>(k)) - binom(ones, k)) / binom(ones, k - 1);
    }
    case Family::PNorm:
      return std::pow(std::pow(y, f.pnorm_p()) - static_cast<double>(ones), 1.0 / f.pnorm_p());
    default:
      break;
  }

  // Bracketed monotone inversion. Endpoints are open; shrink inward by the
  // smallest amount that keeps segment_value finite.
  const double lo_end = -f.alpha();
  double lo = lo_end + 1e-300;
  {
    const double width = std::isfinite(f.beta()) ? (f.beta() - lo_end) : 1.0;
    double shrink = width * 1e-15;
    while (!(detail::segment_value(f, lo_end + shrink) < y) && shrink > width * 1e-30) shrink *= 0.5;
    lo = lo_end + shrink;
    if (!(detail::segment_value(f, lo) < y)) lo = lo_end + width * 1e-30;
  }
  double hi;
  if (std::isfinite(f.beta())) {
    hi = f.beta() - (f.beta() - lo_end) * 1e-15;
    if (!(detail::segment_value(f, hi) > y)) throw RangeError(RangeSide::Above, y);
  } else {
    hi = std::max(1.0, 2.0 * std::abs(lo));
    while (detail::segment_value(f, hi) <= y) {
      hi *= 2.0;
      if (hi > 1e12) throw RangeError(RangeSide::Above, y);
    }
  }

  const double tol = 1e-12 * std::max(1.0, y);
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double v = detail::segment_value(f, mid);
    if (std::abs(v - y) <= tol) break;
    if (v < y)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
  }
  // Secant polish inside the final bracket.
  for (int iter = 0; iter < 4; ++iter) {
    const double flo = detail::segment_value(f, lo) - y, fhi = detail::segment_value(f, hi) - y;
    if (flo == fhi) break;
    const double cand = lo - flo * (hi - lo) / (fhi - flo);
    if (!(cand > lo && cand < hi)) break;
    const double fc = detail::segment_value(f, cand) - y;
    if (std::abs(fc) <= tol) return cand;
    if (fc < 0.0)
      lo = cand;
    else
      hi = cand;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Registration-time scans

namespace detail {

// Supremum estimate of rho_hat by a geometric sweep toward beta (capped at
// xi = 1e6 when beta is infinite). Sustained growth between sweep levels is
// reported as an infinite supremum.
inline double scan_gamma(const CurvatureFunction& f) {
  if (std::isfinite(f.beta())) {
    // Continuous up to the endpoint for the registered families; the open-
    // interval supremum equals the limit there.
    return segment_value(f, f.beta());
  }
  double prev = segment_value(f, std::max(1.0, -f.alpha() + 1.0));
  double xi = 10.0;
  double last = prev;
  while (xi <= 1e6) {
    last = segment_value(f, xi);
    if (xi > 100.0 && last > 1.5 * prev) {
      // still growing by level; treat as unbounded once the sweep is deep
      if (xi >= 1e5) return kInf;
    }
    prev = last;
    xi *= 10.0;
  }
  const double tail_growth = last / segment_value(f, 1e5);
  return tail_growth > 1.0 + 1e-9 ? kInf : last;
}

// Supremum estimate of d(rho_hat)/dxi: interior grid plus geometric
// approaches to both endpoints, with divergence detection near the ends.
inline double scan_uniform_c(const CurvatureFunction& f) {
  const double lo = -f.alpha();
  const double hi_probe = std::isfinite(f.beta()) ? f.beta() : std::max(1e6, lo + 1e6);
  const double width = hi_probe - lo;

  const auto deriv_at = [&](double xi) {
    double step = 1e-7 * std::max(1.0, std::abs(xi));
    step = std::min(step, 0.25 * (xi - lo));
    if (std::isfinite(f.beta())) step = std::min(step, 0.25 * (f.beta() - xi));
    return (segment_value(f, xi + step) - segment_value(f, xi - step)) / (2.0 * step);
  };

  double sup = 0.0;
  for (int t = 1; t < 64; ++t) sup = std::max(sup, deriv_at(lo + width * t / 64.0));

  // Toward the left endpoint: rho_hat may lose uniform parabolicity there.
  double prev = -1.0;
  int growing = 0;
  for (int m = 4; m <= 44; m += 2) {
    const double xi = lo + width * std::pow(2.0, -m);
    const double d = deriv_at(xi);
    sup = std::max(sup, d);
    if (prev > 0.0 && d > 1.2 * prev)
      ++growing;
    else
      growing = 0;
    if (growing >= 5) return kInf;
    prev = d;
  }
  if (std::isfinite(f.beta())) {
    prev = -1.0;
    growing = 0;
    for (int m = 4; m <= 44; m += 2) {
      const double xi = f.beta() - width * std::pow(2.0, -m);
      const double d = deriv_at(xi);
      sup = std::max(sup, d);
      if (prev > 0.0 && d > 1.2 * prev)
        ++growing;
      else
        growing = 0;
      if (growing >= 5) return kInf;
      prev = d;
    }
  }
  return sup;
}

// Left endpoint of the composite family's extended segment interval: the
// root of rho_hat between the zero of sigma_k(1,...,1,xi) and the zero of
// sigma_{k-1}(1,...,1,xi), located by bisection (rho_hat is strictly
// increasing wherever sigma_{k-1} > 0).
inline double composite_alpha(const CurvatureFunction& f) {
  const int ones = f.dimension() - 1;
  const int k = f.ratio_k();
  const double root_k = -binom(ones, k) / binom(ones, k - 1);
  const double root_km1 = -binom(ones, k - 1) / binom(ones, k - 2);
  double hi = root_k;            // rho_hat(root_k) = sum of nonnegative extra terms >= 0
  double lo = root_km1 + (root_k - root_km1) * 1e-12;
  if (!(segment_value(f, hi) > 0.0)) return -root_k;  // no extra terms: vanishes at sigma_k root
  if (!(segment_value(f, lo) < 0.0)) return -root_k;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (segment_value(f, mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
  }
  return -0.5 * (lo + hi);
}

}  // namespace detail

inline void CurvatureFunction::finish_registration() {
  const int ones = n_ - 1;
  switch (family_) {
    case Family::MeanCurvature:
      alpha_ = static_cast<double>(ones);
      beta_ = kInf;
      gamma_ = kInf;
      uniform_c_ = 1.0;
      break;
    case Family::SigmaRatioAdjacent: {
      const double ck = binom(ones, k_), ckm = binom(ones, k_ - 1), ckp = binom(ones, k_ + 1);
      if (ckp > 0.0) {
        alpha_ = ckp / ck;
        gamma_ = ck / ckm;
        uniform_c_ = ck * ck / (ck * ck - ckm * ckp);
      } else {
        alpha_ = 0.0;  // sigma_{k+1}(1,...,1,xi) = ck*xi: interval is (0, inf)
        gamma_ = ck / ckm;
        uniform_c_ = detail::scan_uniform_c(*this);
      }
      beta_ = kInf;
      break;
    }
    case Family::SigmaRatioGeneral: {
      const double cj = binom(ones, j_), cjm = binom(ones, j_ - 1);
      alpha_ = cj > 0.0 ? cj / cjm : 0.0;
      beta_ = kInf;
      gamma_ = std::pow(cjm / binom(ones, i_ - 1), 1.0 / static_cast<double>(j_ - i_));
      uniform_c_ = j_ - i_ == 1 ? binom(ones, i_) * binom(ones, i_) /
                                      (binom(ones, i_) * binom(ones, i_) - binom(ones, i_ - 1) * cj)
                                : detail::scan_uniform_c(*this);
      break;
    }
    case Family::SigmaRoot: {
      const double ck = binom(ones, k_);
      alpha_ = ck > 0.0 ? ck / binom(ones, k_ - 1) : 0.0;
      beta_ = kInf;
      gamma_ = kInf;
      uniform_c_ = k_ == 1 ? 1.0 : detail::scan_uniform_c(*this);
      break;
    }
    case Family::PNorm:
      alpha_ = 0.0;  // admissible xi-interval is (0, inf): cylinder direction excluded
      beta_ = kInf;
      gamma_ = kInf;
      uniform_c_ = 1.0;  // sup of the derivative, approached as xi -> inf
      break;
    case Family::SurfaceExample:
      alpha_ = 1.0;
      beta_ = 0.2;
      gamma_ = detail::scan_gamma(*this);
      uniform_c_ = detail::scan_uniform_c(*this);
      break;
    case Family::Composite:
      alpha_ = detail::composite_alpha(*this);
      beta_ = kInf;
      gamma_ = detail::scan_gamma(*this);
      uniform_c_ = detail::scan_uniform_c(*this);
      break;
  }

  cylinder_in_cone_ = alpha_ > 0.0 && beta_ > 0.0;
  if (cylinder_in_cone_) rho_hat0_ = detail::segment_value(*this, 0.0);
  bottle_eligible_ = cylinder_in_cone_ && beta_ > 1.0;

  // Infimum of rho_hat: the limit toward -alpha (0 for vanishing families).
  {
    const double width = std::isfinite(beta_) ? beta_ + alpha_ : 1.0;
    const double probe = detail::segment_value(*this, -alpha_ + width * 1e-12);
    range_min_ = probe < 1e-6 ? 0.0 : probe;
  }
}

// ---------------------------------------------------------------------------
// Theorem-hypothesis checking

struct HypothesisReport {
  double alpha = 0.0;
  double beta = kInf;
  double gamma = kInf;
  double derivative_bound = kInf;
  double rho_hat_limit_at_minus_alpha = kInf;
  bool rho_hat_vanishes_at_minus_alpha = false;
  bool cylinder_in_cone = false;
  bool passes_theorem = false;
  std::vector<std::string> failures;
};

/// Evaluate the uniform-parabolicity existence hypotheses: alpha > 0,
/// beta > 1, rho_hat -> 0 at -alpha, and a finite derivative bound C.
inline HypothesisReport check_theorem_hypotheses(const CurvatureFunction& f) {
  HypothesisReport rep;
  rep.alpha = f.alpha();
  rep.beta = f.beta();
  rep.gamma = f.gamma();
  rep.derivative_bound = f.uniform_c();
  rep.cylinder_in_cone = f.cylinder_in_cone();

  if (!(rep.alpha > 0.0)) rep.failures.push_back("alpha > 0 fails (interval does not reach below 0)");
  if (!rep.cylinder_in_cone) rep.failures.push_back("cylinder direction (1,...,1,0) not in cone");
  if (!(rep.beta > 1.0)) rep.failures.push_back("beta > 1 fails");

  // Estimated limit of rho_hat at the left endpoint, from a shrinking probe
  // sequence; "vanishes" means the sequence decays below a fixed threshold.
  constexpr double kVanishThreshold = 1e-3;
  {
    const double lo = -rep.alpha;
    const double width = std::isfinite(rep.beta) ? rep.beta - lo : 1.0;
    double last = kInf;
    bool decreasing = true;
    for (double d : {1e-4, 1e-6, 1e-8}) {
      const double v = detail::segment_value(f, lo + width * d);
      if (v > last) decreasing = false;
      last = v;
    }
    rep.rho_hat_limit_at_minus_alpha = last;
    rep.rho_hat_vanishes_at_minus_alpha = decreasing && last < kVanishThreshold;
  }
  if (!rep.rho_hat_vanishes_at_minus_alpha)
    rep.failures.push_back("rho_hat does not vanish at -alpha");
  if (!std::isfinite(rep.derivative_bound))
    rep.failures.push_back("derivative of rho_hat unbounded on the interval");

  rep.passes_theorem = rep.alpha > 0.0 && rep.cylinder_in_cone && rep.beta > 1.0 &&
                       rep.rho_hat_vanishes_at_minus_alpha && std::isfinite(rep.derivative_bound);
  return rep;
}

// ---------------------------------------------------------------------------
// Family spec parsing

inline CurvatureFunction CurvatureFunction::parse(std::string_view spec, int n) {
  const auto fail = [&](const std::string& why) -> CurvatureFunction {
    throw std::invalid_argument("unknown family spec '" + std::string(spec) + "': " + why);
  };
  const auto int_param = [&](std::string_view body, std::string_view key) {
    const auto pos = body.find(key);
    if (pos == std::string_view::npos) fail("missing parameter " + std::string(key));
    return std::atoi(std::string(body.substr(pos + key.size())).c_str());
  };

  if (spec == "H") return mean_curvature(n);
  if (spec == "surface-example") return surface_example();
  if (spec.starts_with("sigma-ratio-gen:")) {
    const auto body = spec.substr(16);
    return sigma_ratio_general(int_param(body, "i="), int_param(body, "j="), n);
  }
  if (spec.starts_with("sigma-ratio:")) return sigma_ratio(int_param(spec.substr(12), "k="), n);
  if (spec.starts_with("sigma-root:")) return sigma_root(int_param(spec.substr(11), "k="), n);
  if (spec.starts_with("pnorm:")) {
    const auto body = std::string(spec.substr(6));
    const auto pos = body.find("p=");
    if (pos == std::string::npos) fail("missing parameter p=");
    return p_norm(std::atof(body.c_str() + pos + 2), n);
  }
  if (spec.starts_with("composite:")) {
    std::vector<CompositeRatioTerm> ratios;
    std::vector<CompositeRootTerm> roots;
    int k = 0;
    std::string body(spec.substr(10));
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.starts_with("k=")) {
        k = std::atoi(tok.c_str() + 2);
      } else if (tok.size() >= 4 && tok[0] == 'a' && std::isdigit(tok[1]) && std::isdigit(tok[2]) &&
                 tok[3] == '=') {
        ratios.push_back({tok[1] - '0', tok[2] - '0', std::atof(tok.c_str() + 4)});
      } else if (tok.size() >= 3 && tok[0] == 'b' && std::isdigit(tok[1]) && tok[2] == '=') {
        roots.push_back({tok[1] - '0', std::atof(tok.c_str() + 3)});
      } else {
        fail("unparseable token '" + tok + "'");
      }
    }
    if (k == 0) fail("missing parameter k=");
    return composite(k, n, std::move(ratios), std::move(roots));
  }
  return fail("unrecognized family name");
}

}  // namespace icurv
