#pragma once

// The self-expander profile ODE
//
//   rddot = -((1+rdot^2)/r) * rho_hat^{-1}( (1 - rdot*Q) * rho_hat(0) ),
//   Q = -(r*rdot + h)/(r - rdot*h),
//
// with validated initial data, guarded right-hand side, adaptive bidirectional
// Dormand-Prince 5(4) integration with PI step control and dense output, and
// inflection-point event detection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icurv/geometry.hpp"
#include "icurv/symfun.hpp"
#include "icurv/verdict.hpp"

namespace icurv {

// ---------------------------------------------------------------------------
// States and conditions

/// One point of the profile curve.
struct ProfileState {
  double h = 0.0;
  double r = 1.0;
  double rdot = 0.0;
};

struct InitialConditions {
  double h0 = -1.0;
  double r0 = 1.5;
  double rdot0 = 0.3;
};

struct Validation {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Verdict-returning check of the three strict inequalities on initial data:
/// h0 < 0, r0 > -h0, rdot0 in (0, -h0/r0).
inline Validation validate_initial_conditions(const InitialConditions& ic) {
  Validation v;
  if (!(ic.h0 < 0.0)) v.violations.push_back("h0 < 0 violated");
  if (!(ic.r0 > -ic.h0)) v.violations.push_back("r0 > -h0 violated");
  if (!(ic.rdot0 > 0.0 && ic.rdot0 < -ic.h0 / ic.r0))
    v.violations.push_back("rdot0 in (0, -h0/r0) violated");
  v.ok = v.violations.empty();
  return v;
}

class SingularityError : public std::domain_error {
 public:
  explicit SingularityError(double h)
      : std::domain_error("q_value: denominator r - rdot*h vanishes"), h_(h) {}
  double h() const { return h_; }

 private:
  double h_;
};

/// Q = -(r*rdot + h)/(r - rdot*h).
inline double q_value(const ProfileState& s) {
  const double den = s.r - s.rdot * s.h;
  if (den == 0.0) throw SingularityError(s.h);
  return -(s.r * s.rdot + s.h) / den;
}

// ---------------------------------------------------------------------------
// Guarded right-hand side

enum class ExitSide { Low, High };

class DomainExitError : public std::domain_error {
 public:
  DomainExitError(ExitSide side, double h, double y, const char* reason)
      : std::domain_error(std::string("domain exit: ") + reason), side_(side), h_(h), y_(y) {}
  ExitSide side() const { return side_; }
  double h() const { return h_; }
  double y() const { return y_; }

 private:
  ExitSide side_;
  double h_, y_;
};

/// Constants consulted on every RHS evaluation, fixed per solve.
struct RhsCache {
  double rho_hat0 = 0.0;
  double gamma = kInf;
  double range_min = 0.0;
  double deriv_at0 = 1.0;  // d(rho_hat)/dxi at 0, for the small-argument path

  explicit RhsCache(const CurvatureFunction& f)
      : rho_hat0(f.rho_hat0()), gamma(f.gamma()), range_min(f.range_min()) {
    if (f.cylinder_in_cone()) deriv_at0 = rho_hat_derivative(f, 0.0);
  }
};

struct RhsEval {
  bool ok = false;
  double rddot = 0.0;
  double q = 0.0;
  double y = 0.0;       // domain quantity (1 - rdot*Q) * rho_hat(0)
  ExitSide side{};      // meaningful when !ok
  const char* reason = "";
};

inline RhsEval try_rhs(const CurvatureFunction& f, const RhsCache& c, const ProfileState& s) {
  RhsEval e;
  if (!(s.r > 0.0)) {
    e.side = ExitSide::Low;
    e.reason = "r <= 0";
    return e;
  }
  const double den = s.r - s.rdot * s.h;
  if (!(den > 0.0)) {
    e.side = ExitSide::High;
    e.reason = "r - rdot*h <= 0";
    return e;
  }
  e.q = -(s.r * s.rdot + s.h) / den;
  const double z = s.rdot * e.q;
  e.y = (1.0 - z) * c.rho_hat0;
  if (!(e.y > c.range_min)) {
    e.side = ExitSide::Low;
    e.reason = "domain quantity at or below range of rho_hat";
    return e;
  }
  if (!(e.y < c.gamma)) {
    e.side = ExitSide::High;
    e.reason = "domain quantity at or above gamma";
    return e;
  }
  // For tiny rdot*Q the subtraction 1 - z loses the signal to rounding and
  // the inversion would inject an additive noise floor into the otherwise
  // sign-preserving decay of rdot. First-order expansion of rho_hat^{-1}
  // about rho_hat(0) keeps the evaluation multiplicative in z; the dropped
  // quadratic term is O(z) relative, below 1e-8 on this branch.
  const double xi = std::abs(z) <= 1e-8 ? -(c.rho_hat0 / c.deriv_at0) * z : rho_hat_inverse(f, e.y);
  e.rddot = -((1.0 + s.rdot * s.rdot) / s.r) * xi;
  e.ok = true;
  return e;
}

/// rddot at a profile state; throws DomainExitError when a guard trips.
inline double rhs(const CurvatureFunction& f, const ProfileState& s) {
  const RhsCache cache(f);
  const RhsEval e = try_rhs(f, cache, s);
  if (!e.ok) throw DomainExitError(e.side, s.h, e.y, e.reason);
  return e.rddot;
}

// ---------------------------------------------------------------------------
// Trajectories

struct SolveOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double span = 1e4;        // integrate over [h0 - span', h0 + span'] up to |h| <= span
  double tail_eps = 1e-8;   // tail-flatness certificate threshold (0 disables early stop)
  std::int64_t max_steps = 2'000'000;
  double initial_step = 0.0;  // 0: automatic
};

enum class Termination {
  CertifiedTail,   // both tail certificates attained before the span
  ReachedSpan,
  DomainExitLow,
  DomainExitHigh,
  StepUnderflow,
  MaxSteps,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::CertifiedTail: return "CertifiedTail";
    case Termination::ReachedSpan: return "ReachedSpan";
    case Termination::DomainExitLow: return "DomainExitLow";
    case Termination::DomainExitHigh: return "DomainExitHigh";
    case Termination::StepUnderflow: return "StepUnderflow";
    case Termination::MaxSteps: return "MaxSteps";
  }
  return "?";
}

struct TrajectoryPoint {
  double h = 0.0;
  double r = 0.0;
  double rdot = 0.0;
  double rddot = 0.0;
  double q = 0.0;
  double domain_quantity = 0.0;
  double residual = 0.0;
};

/// Quartic dense-output segment of one accepted step (Hairer's five-term
/// contd5 form), one coefficient set per state component.
struct DenseSegment {
  double h_from = 0.0;
  double dt = 0.0;  // signed
  std::array<double, 5> r{};
  std::array<double, 5> rd{};

  double h_lo() const { return std::min(h_from, h_from + dt); }
  double h_hi() const { return std::max(h_from, h_from + dt); }

  static double eval5(const std::array<double, 5>& c, double theta) {
    const double t1 = 1.0 - theta;
    return c[0] + theta * (c[1] + t1 * (c[2] + theta * (c[3] + t1 * c[4])));
  }
  ProfileState eval(double h) const {
    const double theta = (h - h_from) / dt;
    return {h, eval5(r, theta), eval5(rd, theta)};
  }
};

struct StepStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;       // error-control rejections plus guard shrinks
  std::int64_t rhs_evaluations = 0;
  double max_scaled_error = 0.0;   // largest accepted local error estimate (scaled; <= 1)
};

struct Trajectory {
  std::string family_spec;
  int n = 0;
  InitialConditions ic;
  SolveOptions opts;
  double mu = 0.0;
  std::size_t ic_index = 0;                 // index of the sample at h0
  std::vector<TrajectoryPoint> points;      // h strictly increasing
  std::vector<DenseSegment> segments;       // sorted by h_lo
  StepStats stats;
  Termination termination_left = Termination::ReachedSpan;
  Termination termination_right = Termination::ReachedSpan;

  double h_lo() const { return points.front().h; }
  double h_hi() const { return points.back().h; }

  /// Dense-output state at h (clamped to the covered range).
  ProfileState eval(double h) const {
    if (segments.empty() || h <= h_lo()) {
      const auto& p = h <= h_lo() ? points.front() : points.back();
      return {p.h, p.r, p.rdot};
    }
    if (h >= h_hi()) {
      const auto& p = points.back();
      return {p.h, p.r, p.rdot};
    }
    auto it = std::upper_bound(segments.begin(), segments.end(), h,
                               [](double v, const DenseSegment& s) { return v < s.h_lo(); });
    if (it != segments.begin()) --it;
    return it->eval(std::clamp(h, it->h_lo(), it->h_hi()));
  }
};

struct SolveReport {
  std::string family_spec;
  int n = 0;
  InitialConditions ic;
  double mu = 0.0;
  double q_at_h0 = 0.0;
  double h_star = 0.0;
  double r_at_star = 0.0;
  double r_min_est = 0.0;
  double r_max_est = 0.0;
  double lower_bound_c = 0.0;   // attained form of the a priori lower bound
  double upper_bound_K = 0.0;   // attained supremum plus tail_eps
  double residual_max = 0.0;
  double residual_rms = 0.0;
  Termination termination = Termination::ReachedSpan;
  Termination termination_left = Termination::ReachedSpan;
  Termination termination_right = Termination::ReachedSpan;
  bool has_domain_exit = false;
  double exit_h = 0.0;
  double exit_y = 0.0;
  StepStats stats;
  std::vector<CheckVerdict> invariant_verdicts;  // filled by the verification layer
};

/// Family not admissible for bottle construction.
class EligibilityError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Inflection-point structure violated (zero or multiple sign changes of Q).
class InflectionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) machinery

namespace dp5 {

inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Vec {
  double r = 0.0, rd = 0.0;
};
inline Vec axpy(const Vec& y, double c, const Vec& k) { return {y.r + c * k.r, y.rd + c * k.rd}; }

}  // namespace dp5

namespace detail_ode {

inline constexpr double kSlopeAtolScale = 1e-3;

struct StageResult {
  bool ok = false;
  dp5::Vec y1, k7;
  double err = 0.0;      // scaled error norm
  double q1 = 0.0, y_dom1 = 0.0, rddot1 = 0.0;
  DenseSegment dense;
  ExitSide trip_side{};
  const char* trip_reason = "";
};

// One DP5(4) trial step with guard evaluation at every stage.
inline StageResult attempt_step(const CurvatureFunction& f, const RhsCache& cache, double h,
                                const dp5::Vec& y, const dp5::Vec& k1, double dt,
                                const SolveOptions& opts, StepStats& stats) {
  using dp5::Vec;
  StageResult res;

  const auto deriv = [&](double hh, const Vec& v, Vec& out, RhsEval& ev) {
    ++stats.rhs_evaluations;
    ev = try_rhs(f, cache, {hh, v.r, v.rd});
    if (!ev.ok) return false;
    out = {v.rd, ev.rddot};
    return true;
  };

  RhsEval ev;
  Vec k2, k3, k4, k5, k6, k7, t;

  t = dp5::axpy(y, dt * dp5::a21, k1);
  if (!deriv(h + dp5::c2 * dt, t, k2, ev)) goto tripped;
  t = {y.r + dt * (dp5::a31 * k1.r + dp5::a32 * k2.r), y.rd + dt * (dp5::a31 * k1.rd + dp5::a32 * k2.rd)};
  if (!deriv(h + dp5::c3 * dt, t, k3, ev)) goto tripped;
  t = {y.r + dt * (dp5::a41 * k1.r + dp5::a42 * k2.r + dp5::a43 * k3.r),
       y.rd + dt * (dp5::a41 * k1.rd + dp5::a42 * k2.rd + dp5::a43 * k3.rd)};
  if (!deriv(h + dp5::c4 * dt, t, k4, ev)) goto tripped;
  t = {y.r + dt * (dp5::a51 * k1.r + dp5::a52 * k2.r + dp5::a53 * k3.r + dp5::a54 * k4.r),
       y.rd + dt * (dp5::a51 * k1.rd + dp5::a52 * k2.rd + dp5::a53 * k3.rd + dp5::a54 * k4.rd)};
  if (!deriv(h + dp5::c5 * dt, t, k5, ev)) goto tripped;
  t = {y.r + dt * (dp5::a61 * k1.r + dp5::a62 * k2.r + dp5::a63 * k3.r + dp5::a64 * k4.r + dp5::a65 * k5.r),
       y.rd +
           dt * (dp5::a61 * k1.rd + dp5::a62 * k2.rd + dp5::a63 * k3.rd + dp5::a64 * k4.rd + dp5::a65 * k5.rd)};
  if (!deriv(h + dt, t, k6, ev)) goto tripped;

  res.y1 = {y.r + dt * (dp5::b1 * k1.r + dp5::b3 * k3.r + dp5::b4 * k4.r + dp5::b5 * k5.r + dp5::b6 * k6.r),
            y.rd + dt * (dp5::b1 * k1.rd + dp5::b3 * k3.rd + dp5::b4 * k4.rd + dp5::b5 * k5.rd +
                         dp5::b6 * k6.rd)};
  if (!deriv(h + dt, res.y1, k7, ev)) goto tripped;
  res.k7 = k7;
  res.q1 = ev.q;
  res.y_dom1 = ev.y;
  res.rddot1 = ev.rddot;

  {
    const double er = dt * (dp5::e1 * k1.r + dp5::e3 * k3.r + dp5::e4 * k4.r + dp5::e5 * k5.r +
                            dp5::e6 * k6.r + dp5::e7 * k7.r);
    const double erd = dt * (dp5::e1 * k1.rd + dp5::e3 * k3.rd + dp5::e4 * k4.rd + dp5::e5 * k5.rd +
                             dp5::e6 * k6.rd + dp5::e7 * k7.rd);
    const double scr = opts.atol + opts.rtol * std::max(std::abs(y.r), std::abs(res.y1.r));
    // The slope's absolute floor sits three digits below atol: the tail
    // certificates quantify |rdot|*h and |rddot|*h^2, which would drown in
    // the slope's noise floor at large |h| under the plain atol.
    const double scrd =
        opts.atol * kSlopeAtolScale + opts.rtol * std::max(std::abs(y.rd), std::abs(res.y1.rd));
    const double qr = er / scr, qrd = erd / scrd;
    res.err = std::sqrt(0.5 * (qr * qr + qrd * qrd));
  }

  {
    res.dense.h_from = h;
    res.dense.dt = dt;
    const auto fill = [&](std::array<double, 5>& c, double y0c, double y1c, double k1c, double k3c,
                          double k4c, double k5c, double k6c, double k7c) {
      const double ydiff = y1c - y0c;
      const double bspl = dt * k1c - ydiff;
      c[0] = y0c;
      c[1] = ydiff;
      c[2] = bspl;
      c[3] = ydiff - dt * k7c - bspl;
      c[4] = dt * (dp5::d1 * k1c + dp5::d3 * k3c + dp5::d4 * k4c + dp5::d5 * k5c + dp5::d6 * k6c +
                   dp5::d7 * k7c);
    };
    fill(res.dense.r, y.r, res.y1.r, k1.r, k3.r, k4.r, k5.r, k6.r, k7.r);
    fill(res.dense.rd, y.rd, res.y1.rd, k1.rd, k3.rd, k4.rd, k5.rd, k6.rd, k7.rd);
  }

  res.ok = true;
  return res;

tripped:
  res.trip_side = ev.side;
  res.trip_reason = ev.reason;
  return res;
}

struct LegSample {
  double h, r, rdot, rddot, q, y;
};

struct LegResult {
  std::vector<LegSample> samples;  // excludes the initial point, integration order
  std::vector<DenseSegment> segments;
  Termination termination = Termination::ReachedSpan;
  bool has_exit = false;
  double exit_h = 0.0, exit_y = 0.0;
  std::string exit_reason;
};

// Amplitude hump tracker: the |h|-position after which a tail quantity was
// last seen to grow while above the certificate threshold; the monotone-decay
// window must start past it. Growth below the threshold is integrator noise
// floor and does not move the hump. The recorded position carries a
// one-sample pad, bounding the true hump location from above. The stop must
// fire as early as the window clears the hump: the |rdot| noise floor makes
// |rddot h^2| grow like h^2 eventually, so waiting longer closes the
// certificate window for good.
struct HumpTracker {
  double last_abs = kInf;
  double last_h = 0.0;
  double pos = 0.0;
  void feed(double abs_h, double value, double floor) {
    if (value > std::max(last_abs, floor) * (1.0 + 1e-12))
      pos = abs_h + (abs_h - last_h);  // pad by the local sample spacing
    last_abs = value;
    last_h = abs_h;
  }
};

inline bool tail_certified(const std::vector<LegSample>& samples, double tail_eps, double hump_pos) {
  if (tail_eps <= 0.0 || samples.empty()) return false;
  const LegSample& end = samples.back();
  const double habs = std::abs(end.h);
  if (habs < 10.0) return false;
  if (habs < 10.0 * hump_pos) return false;
  if (!(std::abs(end.rdot) < tail_eps)) return false;
  if (!(std::abs(end.rddot) * end.h * end.h < tail_eps)) return false;

  // Monotone decay of |rdot h| and |rddot h^2| over the trailing decade,
  // with a floor at tail_eps to absorb noise-level wobble.
  const double win = habs / 10.0;
  double prev_a = kInf, prev_b = kInf;
  bool first = true;
  int in_window = 0;
  for (const auto& s : samples) {
    if (std::abs(s.h) < win) continue;
    ++in_window;
    const double a = std::abs(s.rdot * s.h);
    const double b = std::abs(s.rddot * s.h * s.h);
    if (!first) {
      if (a > std::max(prev_a, tail_eps) * (1.0 + 1e-9)) return false;
      if (b > std::max(prev_b, tail_eps) * (1.0 + 1e-9)) return false;
    }
    first = false;
    prev_a = a;
    prev_b = b;
  }
  return in_window >= 2;
}

// Integrate one leg from (h0, y0) toward h_target (sign of direction implied).
inline LegResult integrate_leg(const CurvatureFunction& f, const RhsCache& cache,
                               const ProfileState& start, double h_target, const SolveOptions& opts,
                               StepStats& stats) {
  using dp5::Vec;
  LegResult leg;
  const double dir = h_target > start.h ? 1.0 : -1.0;

  double h = start.h;
  Vec y{start.r, start.rdot};

  RhsEval ev0 = try_rhs(f, cache, start);
  if (!ev0.ok) {
    leg.termination = ev0.side == ExitSide::Low ? Termination::DomainExitLow : Termination::DomainExitHigh;
    leg.has_exit = true;
    leg.exit_h = h;
    leg.exit_y = ev0.y;
    leg.exit_reason = ev0.reason;
    return leg;
  }
  Vec k1{y.rd, ev0.rddot};

  double dt = opts.initial_step > 0.0 ? dir * opts.initial_step
                                      : dir * std::min(0.01 * (1.0 + std::abs(h)), 0.5 * std::abs(h_target - h));
  double facold = 1e-4;
  constexpr double safe = 0.9, beta_pi = 0.04, expo1 = 0.2 - beta_pi * 0.75;
  constexpr double facc1 = 5.0, facc2 = 0.1;  // 1/fac_min, 1/fac_max

  // Stability cap: the slope component carries a contracting linear mode of
  // rate lambda ~ (rho_hat0/rho_hat'(0)) |Q| (1+rdot^2)/r. Explicit RK steps
  // beyond the stable interval would re-amplify the decayed mode at the
  // tolerance floor (and could flip its sign); 2.5 keeps the linear
  // amplification factor inside (0, 1).
  const auto stability_cap = [&cache](double q, double r, double rd) {
    const double lambda =
        (cache.rho_hat0 / cache.deriv_at0) * std::abs(q) * (1.0 + rd * rd) / std::max(r, 1e-300);
    return 2.5 / std::max(lambda, 1e-14);
  };
  double stab_cap = stability_cap(ev0.q, y.r, y.rd);

  HumpTracker hump_a, hump_b;
  std::int64_t guard_shrinks_in_row = 0;

  while (dir * (h_target - h) > 0.0) {
    if (stats.accepted + stats.rejected >= opts.max_steps) {
      leg.termination = Termination::MaxSteps;
      return leg;
    }
    if (std::abs(dt) > stab_cap) dt = dir * stab_cap;
    // land exactly on the target
    if (dir * (h + dt) > dir * h_target) dt = h_target - h;
    const double floor_dt = 1e-13 * std::max(1.0, std::abs(h));
    if (std::abs(dt) < floor_dt) {
      // guard-trip shrinkage ends in DomainExit (classified at trip time);
      // pure error-control shrinkage is a step underflow
      if (guard_shrinks_in_row == 0) leg.termination = Termination::StepUnderflow;
      return leg;
    }

    StageResult st = attempt_step(f, cache, h, y, k1, dt, opts, stats);
    if (!st.ok) {
      // A guard tripped inside the step: shrink toward the boundary so the
      // reported exit height is resolved to the step-floor scale.
      ++stats.rejected;
      ++guard_shrinks_in_row;
      leg.has_exit = true;
      leg.exit_h = h + dt;  // conservative bracket end; tightened as dt shrinks
      const RhsEval probe = try_rhs(f, cache, {h + dt, y.r + dt * k1.r, y.rd + dt * k1.rd});
      leg.exit_y = probe.y;
      leg.exit_reason = st.trip_reason;
      leg.termination =
          st.trip_side == ExitSide::Low ? Termination::DomainExitLow : Termination::DomainExitHigh;
      dt *= 0.5;
      continue;
    }
    guard_shrinks_in_row = 0;

    const double fac11 = std::pow(st.err, expo1);
    if (st.err <= 1.0) {
      facold = std::max(st.err, 1e-4);
      stats.max_scaled_error = std::max(stats.max_scaled_error, st.err);
      ++stats.accepted;
      h += dt;
      y = st.y1;
      k1 = st.k7;  // FSAL
      stab_cap = stability_cap(st.q1, y.r, y.rd);
      leg.samples.push_back({h, y.r, y.rd, st.rddot1, st.q1, st.y_dom1});
      leg.segments.push_back(st.dense);

      hump_a.feed(std::abs(h), std::abs(y.rd * h), opts.tail_eps);
      hump_b.feed(std::abs(h), std::abs(st.rddot1 * h * h), opts.tail_eps);
      if (tail_certified(leg.samples, opts.tail_eps, std::max(hump_a.pos, hump_b.pos))) {
        leg.termination = Termination::CertifiedTail;
        return leg;
      }

      double fac = fac11 / std::pow(facold, beta_pi);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      dt = dt / fac;
    } else {
      ++stats.rejected;
      dt = dt / std::min(facc1, fac11 / safe);
    }
  }
  leg.termination = Termination::ReachedSpan;
  return leg;
}

}  // namespace detail_ode

// ---------------------------------------------------------------------------
// Inflection detection

/// Locate the unique inflection point: the single sign change of Q on
/// (h0, 0), refined through dense output (bisection to |Q| <= 1e-12) when
/// segments are available, by linear interpolation otherwise. Throws
/// InflectionError when the count differs from one, or when a sign change
/// occurs at or before h0.
inline double detect_inflection(const Trajectory& t) {
  if (t.points.empty() || t.points.back().h < 0.0)
    throw InflectionError("detect_inflection: trajectory does not span (h0, 0)");

  const double h0 = t.ic.h0;
  // No sign change allowed on (h_lo, h0].
  for (std::size_t i = 0; i + 1 < t.points.size() && t.points[i + 1].h <= h0; ++i) {
    if (t.points[i].q > 0.0 && t.points[i + 1].q <= 0.0)
      throw InflectionError("detect_inflection: Q sign change before h0");
    if (t.points[i].q < 0.0 && t.points[i + 1].q >= 0.0)
      throw InflectionError("detect_inflection: Q sign change before h0");
  }

  const auto q_at = [&](double h) {
    const ProfileState s = t.eval(h);
    return q_value(s);
  };

  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
    const auto& a = t.points[i];
    const auto& b = t.points[i + 1];
    if (b.h <= h0 || a.h >= 0.0) continue;
    // sub-scan the step so double crossings at sample resolution are not missed
    constexpr int kSub = 8;
    double hp = a.h, qp = a.q;
    const bool have_dense = !t.segments.empty();
    for (int sdx = 1; sdx <= kSub; ++sdx) {
      const double hn = sdx == kSub ? b.h : a.h + (b.h - a.h) * sdx / kSub;
      const double qn = sdx == kSub ? b.q : (have_dense ? q_at(hn) : 0.0);
      if (!have_dense && sdx != kSub) continue;
      if ((qp > 0.0 && qn <= 0.0) || (qp < 0.0 && qn >= 0.0)) {
        double lo = hp, hi = hn, qlo = qp;
        double mid = 0.5 * (lo + hi);
        for (int iter = 0; iter < 200; ++iter) {
          mid = 0.5 * (lo + hi);
          double qm;
          if (have_dense) {
            qm = q_at(mid);
          } else {
            // linear interpolation of the stored Q samples
            qm = qp + (qn - qp) * (mid - hp) / (hn - hp);
          }
          if (std::abs(qm) <= 1e-12 || hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
          if ((qlo > 0.0) == (qm > 0.0)) {
            lo = mid;
            qlo = qm;
          } else {
            hi = mid;
          }
        }
        crossings.push_back(mid);
      }
      hp = hn;
      qp = qn;
    }
  }

  // collapse refinement duplicates from adjacent subintervals
  crossings.erase(std::unique(crossings.begin(), crossings.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-11; }),
                  crossings.end());
  if (crossings.empty())
    throw InflectionError("detect_inflection: no Q sign change found on (h0, 0)");
  if (crossings.size() > 1)
    throw InflectionError("detect_inflection: multiple Q sign changes on (h0, 0): uniqueness violated");
  const double h_star = crossings.front();
  if (!(h_star > h0 && h_star < 0.0))
    throw InflectionError("detect_inflection: refined inflection escaped (h0, 0)");
  return h_star;
}

// ---------------------------------------------------------------------------
// Full bidirectional solve

namespace detail_ode {

inline TrajectoryPoint make_point(const CurvatureFunction& f, const RhsCache& cache,
                                  const ProfileState& s) {
  TrajectoryPoint p;
  p.h = s.h;
  p.r = s.r;
  p.rdot = s.rdot;
  const RhsEval e = try_rhs(f, cache, s);
  p.rddot = e.rddot;
  p.q = e.q;
  p.domain_quantity = e.y;
  return p;
}

inline Termination worst(Termination a, Termination b) {
  const auto rank = [](Termination t) {
    switch (t) {
      case Termination::CertifiedTail: return 0;
      case Termination::ReachedSpan: return 1;
      case Termination::DomainExitLow: return 2;
      case Termination::DomainExitHigh: return 2;
      case Termination::StepUnderflow: return 3;
      case Termination::MaxSteps: return 3;
    }
    return 3;
  };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace detail_ode

/// Integrate the profile ODE both ways from validated initial data, locate
/// the inflection point, and assemble per-sample diagnostics. Requires a
/// bottle-eligible family passing the existence-theorem hypotheses.
inline std::pair<Trajectory, SolveReport> integrate(const CurvatureFunction& f,
                                                    const InitialConditions& ic,
                                                    const SolveOptions& opts = {}) {
  const Validation v = validate_initial_conditions(ic);
  if (!v.ok) {
    std::string msg = "invalid initial conditions: ";
    for (std::size_t i = 0; i < v.violations.size(); ++i)
      msg += (i ? "; " : "") + v.violations[i];
    throw std::invalid_argument(msg);
  }
  if (const HypothesisReport hr = check_theorem_hypotheses(f);
      !f.bottle_eligible() || !hr.passes_theorem) {
    std::string msg = "family " + f.spec_string() + " not admissible for bottle construction: ";
    for (std::size_t i = 0; i < hr.failures.size(); ++i) msg += (i ? "; " : "") + hr.failures[i];
    throw EligibilityError(msg);
  }

  const RhsCache cache(f);
  const ProfileState start{ic.h0, ic.r0, ic.rdot0};

  Trajectory t;
  t.family_spec = f.spec_string();
  t.n = f.dimension();
  t.ic = ic;
  t.opts = opts;
  t.mu = mu_cylinder(f).mu;

  auto left = detail_ode::integrate_leg(f, cache, start, -opts.span, opts, t.stats);
  auto right = detail_ode::integrate_leg(f, cache, start, opts.span, opts, t.stats);
  t.termination_left = left.termination;
  t.termination_right = right.termination;

  t.points.reserve(left.samples.size() + right.samples.size() + 3);
  for (auto it = left.samples.rbegin(); it != left.samples.rend(); ++it)
    t.points.push_back({it->h, it->r, it->rdot, it->rddot, it->q, it->y, 0.0});
  t.ic_index = t.points.size();
  t.points.push_back(detail_ode::make_point(f, cache, start));
  for (const auto& s : right.samples)
    t.points.push_back({s.h, s.r, s.rdot, s.rddot, s.q, s.y, 0.0});

  t.segments.reserve(left.segments.size() + right.segments.size());
  for (const auto& s : left.segments) t.segments.push_back(s);
  for (const auto& s : right.segments) t.segments.push_back(s);
  std::sort(t.segments.begin(), t.segments.end(),
            [](const DenseSegment& a, const DenseSegment& b) { return a.h_lo() < b.h_lo(); });

  SolveReport rep;
  rep.family_spec = t.family_spec;
  rep.n = t.n;
  rep.ic = ic;
  rep.mu = t.mu;
  rep.q_at_h0 = q_value(start);
  rep.termination_left = left.termination;
  rep.termination_right = right.termination;
  rep.termination = detail_ode::worst(left.termination, right.termination);
  if (left.has_exit || right.has_exit) {
    rep.has_domain_exit = true;
    const auto& src = right.has_exit ? right : left;
    rep.exit_h = src.exit_h;
    rep.exit_y = src.exit_y;
  }

  // Inflection point, refined through dense output, then inserted into the
  // sample sequence together with h = 0 so downstream checks sample both.
  const bool spans_zero = t.points.back().h >= 0.0;
  if (spans_zero) {
    rep.h_star = detect_inflection(t);
    rep.r_at_star = t.eval(rep.h_star).r;
    const auto insert_at = [&](double h) {
      auto it = std::lower_bound(t.points.begin(), t.points.end(), h,
                                 [](const TrajectoryPoint& p, double v) { return p.h < v; });
      if (it != t.points.end() && std::abs(it->h - h) < 1e-14 * std::max(1.0, std::abs(h))) return;
      if (it != t.points.begin() && std::abs(std::prev(it)->h - h) < 1e-14 * std::max(1.0, std::abs(h)))
        return;
      const std::size_t idx = static_cast<std::size_t>(it - t.points.begin());
      TrajectoryPoint p = detail_ode::make_point(f, cache, t.eval(h));
      t.points.insert(t.points.begin() + static_cast<std::ptrdiff_t>(idx), p);
      if (idx <= t.ic_index) ++t.ic_index;
    };
    insert_at(rep.h_star);
    insert_at(0.0);
  }

  rep.r_min_est = t.points.front().r;
  rep.r_max_est = t.points.back().r;

  // Attained a priori bounds: the explicit lower-bound constant evaluated
  // with the family's uniform derivative bound; the supremum is the final
  // radius plus the tail threshold.
  {
    const double q0 = rep.q_at_h0;
    const double C = f.uniform_c();
    if (std::isfinite(C) && q0 > 0.0) {
      const double c1 = std::atan(ic.rdot0) - (f.rho_hat0() * q0 / C) * std::log(ic.r0);
      rep.lower_bound_c = std::exp(-C * (std::numbers::pi / 2.0 + c1) / (f.rho_hat0() * q0));
    }
    rep.upper_bound_K = rep.r_max_est + opts.tail_eps;
  }

  // Self-expander residual at every sample.
  const ExpanderParams mu{t.mu};
  double sum_sq = 0.0;
  for (auto& p : t.points) {
    try {
      p.residual = expander_residual(f, p.h, p.r, p.rdot, p.rddot, mu);
    } catch (const ConeError&) {
      p.residual = std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isnan(p.residual) || std::abs(p.residual) > rep.residual_max)
      rep.residual_max = std::abs(p.residual);
    sum_sq += p.residual * p.residual;
  }
  rep.residual_rms = std::sqrt(sum_sq / static_cast<double>(t.points.size()));
  rep.stats = t.stats;
  return {std::move(t), std::move(rep)};
}

}  // namespace icurv
