#pragma once

// Trajectory verification layer: one machine-checkable verdict per lemma-level
// statement about a profile-curve solution. Checks consume sampled
// trajectories; margins are signed distances to violation (positive = safe).

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "icurv/profile_ode.hpp"
#include "icurv/verdict.hpp"

namespace icurv {

namespace detail_checks {

struct Worst {
  double margin = kInf;
  double h = 0.0;
  void fold(double m, double at) {
    if (m < margin) {
      margin = m;
      h = at;
    }
  }
};

// Constant solutions (round cylinders) satisfy the expander equation exactly
// but sit outside the strict-monotonicity dichotomy of the bottle lemmas.
inline bool is_constant_solution(const Trajectory& t) {
  for (const auto& p : t.points)
    if (std::abs(p.rdot) > 1e-15) return false;
  return true;
}

inline std::size_t first_index_after(const Trajectory& t, double h) {
  std::size_t i = 0;
  while (i < t.points.size() && t.points[i].h <= h) ++i;
  return i;
}

// Bracketed sign changes of the stored Q samples. Returns crossing count in
// the three regions (left of h0, inside (h0,0), right of 0) and the linear
// interpolation of the (h0,0) crossing.
struct QCrossings {
  int left = 0, middle = 0, right = 0;
  double h_star = 0.0;
  double qdot_fd = 0.0;  // finite-difference slope across the crossing pair
};

inline QCrossings scan_q_crossings(const Trajectory& t) {
  QCrossings out;
  const double h0 = t.ic.h0;
  for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
    const auto& a = t.points[i];
    const auto& b = t.points[i + 1];
    const bool crossing = (a.q > 0.0 && b.q <= 0.0) || (a.q < 0.0 && b.q >= 0.0);
    if (!crossing) continue;
    if (b.h <= h0) {
      ++out.left;
    } else if (a.h < 0.0) {
      ++out.middle;
      if (out.middle == 1) {
        const double denom = b.q - a.q;
        out.h_star = denom != 0.0 ? a.h - a.q * (b.h - a.h) / denom : 0.5 * (a.h + b.h);
        out.qdot_fd = denom / (b.h - a.h);
      }
    } else {
      ++out.right;
    }
  }
  return out;
}

}  // namespace detail_checks

/// All thirteen lemma-level checks over one trajectory. The trajectory must
/// have been produced for (or synthesized to mimic) the same family, and the
/// expander constant must be the cylinder constant of that family.
inline std::vector<CheckVerdict> run_all_checks(const CurvatureFunction& f, const Trajectory& t,
                                                const ExpanderParams& p) {
  using detail_checks::Worst;

  if (t.family_spec != f.spec_string() || t.n != f.dimension())
    throw std::invalid_argument("run_all_checks: trajectory was produced for family " + t.family_spec +
                                " (n=" + std::to_string(t.n) + "), not " + f.spec_string());
  if (!f.cylinder_in_cone() || std::abs(p.mu * f.rho_hat0() - 1.0) > 1e-12)
    throw std::invalid_argument("run_all_checks: expander constant is not the cylinder constant of " +
                                f.spec_string());
  if (t.points.size() < 3) throw std::invalid_argument("run_all_checks: trajectory has too few samples");

  const bool cylinder = detail_checks::is_constant_solution(t);
  const double h0 = t.ic.h0;
  const double tail_eps = t.opts.tail_eps;
  const double rho0 = f.rho_hat0();
  const auto& pts = t.points;
  const std::size_t n_left = detail_checks::first_index_after(t, h0);  // points with h <= h0

  std::vector<CheckVerdict> out;
  const auto push = [&](CheckId id, bool pass, const Worst& w, std::string note = {}) {
    CheckVerdict v;
    v.check_id = id;
    v.pass = pass;
    v.worst_margin = std::isfinite(w.margin) ? w.margin : 0.0;
    v.worst_location_h = w.h;
    v.note = std::move(note);
    out.push_back(std::move(v));
  };

  const detail_checks::QCrossings qx = detail_checks::scan_q_crossings(t);

  // Monotone: rdot > 0 at every sample (constant solutions are the round-
  // cylinder branch of the dichotomy and pass as such).
  {
    Worst w;
    if (cylinder) {
      w.margin = 0.0;
      push(CheckId::Monotone, true, w, "constant solution (round cylinder)");
    } else {
      for (const auto& s : pts) w.fold(s.rdot, s.h);
      push(CheckId::Monotone, w.margin > 0.0, w);
    }
  }

  // SignLaw: Q*rddot >= -eps pointwise, plus the zero-set band on [h0, 0]:
  // |Q| below 1e-8 forces |rddot| below the linearized band and conversely.
  {
    Worst w;
    bool pass = true;
    for (const auto& s : pts) {
      const double eps = 1e-12 * (1.0 + std::abs(s.q)) * (1.0 + std::abs(s.rddot));
      w.fold(s.q * s.rddot + eps, s.h);
    }
    pass = w.margin >= 0.0;
    constexpr double kBandQ = 1e-8;
    for (const auto& s : pts) {
      if (s.h < h0 || s.h > 0.0) continue;
      double slope = 0.0;
      if (s.domain_quantity > f.range_min() && s.domain_quantity < f.gamma()) {
        const double xi = rho_hat_inverse(f, s.domain_quantity);
        slope = ((1.0 + s.rdot * s.rdot) / s.r) * rho0 * std::abs(s.rdot) / rho_hat_derivative(f, xi);
      }
      if (std::abs(s.q) <= 0.5 * kBandQ) {
        const double band = 2.0 * slope * kBandQ + 1e-14;
        if (std::abs(s.rddot) > band) {
          pass = false;
          w.fold(band - std::abs(s.rddot), s.h);
        }
      }
      if (slope * kBandQ > 1e-13 && std::abs(s.rddot) <= 0.5 * slope * kBandQ) {
        if (std::abs(s.q) > 2.0 * kBandQ) {
          pass = false;
          w.fold(2.0 * kBandQ - std::abs(s.q), s.h);
        }
      }
    }
    push(CheckId::SignLaw, pass, w);
  }

  // IdentityQ: (1 - rdot*Q) agrees with r(1+rdot^2)/(r - rdot*h).
  {
    Worst w;
    for (const auto& s : pts) {
      const double lhs = 1.0 - s.rdot * s.q;
      const double rhs = s.r * (1.0 + s.rdot * s.rdot) / (s.r - s.rdot * s.h);
      const double tol = 1e-13 * (1.0 + std::abs(s.domain_quantity));
      w.fold(tol - std::abs(lhs - rhs), s.h);
    }
    push(CheckId::IdentityQ, w.margin >= 0.0, w);
  }

  // PreInflectionConvex: rddot > 0 and Q nonincreasing on (h_lo, h0].
  {
    Worst w;
    if (cylinder) {
      w.margin = 0.0;
      push(CheckId::PreInflectionConvex, true, w, "constant solution (round cylinder)");
    } else {
      for (std::size_t i = 0; i < n_left; ++i) w.fold(pts[i].rddot, pts[i].h);
      for (std::size_t i = 0; i + 1 < n_left; ++i) {
        const double slack = 1e-12 * (1.0 + std::abs(pts[i].q));
        w.fold(pts[i].q - pts[i + 1].q + slack, pts[i + 1].h);
      }
      push(CheckId::PreInflectionConvex, w.margin > 0.0, w);
    }
  }

  // LowerBoundC: the explicit a priori radius bound on (h_lo, h0], evaluated
  // with the family's uniform derivative bound.
  {
    Worst w;
    std::string note;
    const double q0 = q_value({t.ic.h0, t.ic.r0, t.ic.rdot0});
    double c_bound = 0.0;
    const double C = f.uniform_c();
    if (std::isfinite(C) && q0 > 0.0) {
      const double c1 = std::atan(t.ic.rdot0) - (rho0 * q0 / C) * std::log(t.ic.r0);
      c_bound = std::exp(-C * (std::numbers::pi / 2.0 + c1) / (rho0 * q0));
    } else {
      note = "uniform bound unavailable; degenerate bound 0";
    }
    for (std::size_t i = 0; i < n_left; ++i) w.fold(pts[i].r - c_bound, pts[i].h);
    if (n_left == 0) w.fold(t.ic.r0 - c_bound, t.ic.h0);
    push(CheckId::LowerBoundC, w.margin > 0.0, w, note);
  }

  // UpperBoundK: the supremum K = final radius + tail_eps bounds every
  // sample; the existential bound is asserted as attained-and-finite, with
  // the sup sitting at the end of the trajectory rather than an interior
  // overshoot.
  {
    Worst w;
    const double r_end = pts.back().r;
    const double K = r_end + tail_eps;
    if (!std::isfinite(K)) w.fold(-1.0, pts.back().h);
    for (const auto& s : pts) w.fold(K - s.r, s.h);
    push(CheckId::UpperBoundK, w.margin >= 0.0, w);
  }

  // DomainLow: the domain quantity stays strictly positive.
  {
    Worst w;
    for (const auto& s : pts) w.fold(s.domain_quantity, s.h);
    push(CheckId::DomainLow, w.margin > 0.0, w);
  }

  // DomainHigh: y < rho_hat(0) before the inflection (approached
  // asymptotically from below at the left end, hence a rounding allowance)
  // and y < rho_hat(1) after it.
  {
    Worst w;
    const double split = cylinder || qx.middle == 0 ? 0.0 : qx.h_star;
    const double bound_pre = rho0 + 1e-12 * std::max(1.0, rho0);
    const double bound_post = f.beta() > 1.0 ? rho_hat(f, 1.0) : f.gamma();
    for (const auto& s : pts) {
      if (s.h <= split)
        w.fold(bound_pre - s.domain_quantity, s.h);
      else
        w.fold(bound_post - s.domain_quantity, s.h);
    }
    push(CheckId::DomainHigh, w.margin > 0.0, w);
  }

  // UniqueInflection: exactly one sign change of Q, inside (h0, 0), with Q
  // strictly decreasing across it; none before h0 or after 0.
  {
    Worst w;
    if (cylinder) {
      w.margin = 0.0;
      push(CheckId::UniqueInflection, true, w, "constant solution (round cylinder)");
    } else {
      bool pass = qx.left == 0 && qx.middle == 1 && qx.right == 0;
      std::string note;
      if (qx.left > 0) note = "Q sign change before h0";
      if (qx.middle != 1) note = "expected one Q sign change on (h0,0), found " + std::to_string(qx.middle);
      if (qx.right > 0) note = "Q sign change after 0";
      if (pass) {
        if (!(qx.h_star > h0 && qx.h_star < 0.0)) {
          pass = false;
          note = "inflection escaped (h0, 0)";
        }
        if (!(qx.qdot_fd < 0.0)) {
          pass = false;
          note = "Q not decreasing across inflection";
        }
        w.fold(std::min(qx.h_star - h0, -qx.h_star), qx.h_star);
      } else {
        w.margin = -1.0;
      }
      push(CheckId::UniqueInflection, pass, w, note);
    }
  }

  // Tail decay at each end: |rdot h| and |rddot h^2| nonincreasing in |h|
  // over the trailing decade (floored at tail_eps to absorb underflow-level
  // wobble) and final values below tail_eps.
  const auto tail_check = [&](bool left_side) {
    Worst w;
    bool pass = true;
    const auto& end = left_side ? pts.front() : pts.back();
    const double habs = std::abs(end.h);
    if (habs <= 0.0 || (left_side ? end.h > h0 : end.h < 0.0)) {
      w.margin = -1.0;
      return std::pair<bool, Worst>{false, w};
    }
    w.fold(tail_eps - std::abs(end.rdot * end.h), end.h);
    w.fold(tail_eps - std::abs(end.rddot) * end.h * end.h, end.h);
    const double win = habs / 10.0;
    double prev_a = kInf, prev_b = kInf;
    bool first = true;
    // iterate outward: ascending |h|
    const auto visit = [&](const TrajectoryPoint& s) {
      if (std::abs(s.h) < win) return;
      if (left_side ? s.h > h0 : s.h < 0.0) return;
      const double a = std::abs(s.rdot * s.h);
      const double b = std::abs(s.rddot * s.h * s.h);
      if (!first) {
        w.fold(std::max(prev_a, tail_eps) * (1.0 + 1e-9) - a, s.h);
        w.fold(std::max(prev_b, tail_eps) * (1.0 + 1e-9) - b, s.h);
      }
      first = false;
      prev_a = a;
      prev_b = b;
    };
    if (left_side) {
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) visit(*it);
    } else {
      for (const auto& s : pts) visit(s);
    }
    pass = w.margin >= 0.0;
    return std::pair<bool, Worst>{pass, w};
  };
  {
    auto [pass, w] = tail_check(true);
    push(CheckId::TailDecayLeft, pass, w);
  }
  {
    auto [pass, w] = tail_check(false);
    push(CheckId::TailDecayRight, pass, w);
  }

  // ResidualBound: the expander equation holds along the samples.
  {
    Worst w;
    bool any_nan = false;
    for (const auto& s : pts) {
      if (std::isnan(s.residual)) {
        any_nan = true;
        w.fold(-1.0, s.h);
        continue;
      }
      w.fold(1e-8 - std::abs(s.residual), s.h);
    }
    push(CheckId::ResidualBound, !any_nan && w.margin >= 0.0, w,
         any_nan ? "residual undefined (cone violation) at a sample" : "");
  }

  // DistinctRadii: the two asymptotic radii differ by a definite margin.
  {
    Worst w;
    if (cylinder) {
      w.margin = 0.0;
      push(CheckId::DistinctRadii, true, w, "constant solution (round cylinder)");
    } else {
      const double diff = pts.back().r - pts.front().r;
      w.fold(diff - 1e-6, pts.back().h);
      push(CheckId::DistinctRadii, w.margin > 0.0, w);
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// Report comparison

struct ReportDiff {
  double d_h_star = 0.0;
  double d_r_min = 0.0;
  double d_r_max = 0.0;
  double tol = 0.0;
  bool within = false;
};

/// Differences between two solve reports of the same configuration; used for
/// oracle-versus-adaptive and tolerance-sweep regression.
inline ReportDiff compare_reports(const SolveReport& a, const SolveReport& b, double tol) {
  if (a.family_spec != b.family_spec || a.n != b.n)
    throw std::invalid_argument("compare_reports: family mismatch (" + a.family_spec + " vs " +
                                b.family_spec + ")");
  if (a.ic.h0 != b.ic.h0 || a.ic.r0 != b.ic.r0 || a.ic.rdot0 != b.ic.rdot0)
    throw std::invalid_argument("compare_reports: initial conditions differ");
  ReportDiff d;
  d.tol = tol;
  d.d_h_star = std::abs(a.h_star - b.h_star);
  d.d_r_min = std::abs(a.r_min_est - b.r_min_est);
  d.d_r_max = std::abs(a.r_max_est - b.r_max_est);
  d.within = d.d_h_star <= tol && d.d_r_min <= tol && d.d_r_max <= tol;
  return d;
}

/// Integrate and verify in one call; the report's verdict list is filled.
inline std::pair<Trajectory, SolveReport> solve_with_checks(const CurvatureFunction& f,
                                                            const InitialConditions& ic,
                                                            const SolveOptions& opts = {}) {
  auto [t, rep] = integrate(f, ic, opts);
  rep.invariant_verdicts = run_all_checks(f, t, ExpanderParams{t.mu});
  return {std::move(t), std::move(rep)};
}

inline bool all_pass(const std::vector<CheckVerdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const CheckVerdict& v) { return v.pass; });
}

}  // namespace icurv
