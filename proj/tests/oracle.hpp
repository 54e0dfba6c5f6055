#pragma once

// Test-only oracles, deliberately independent of the library's evaluation
// paths:
//   * subset-enumeration elementary symmetric polynomials;
//   * a fixed-step classic RK4 integrator for the profile ODE with its own
//     segment formulas and closed-form inversion (mean curvature and the
//     adjacent sigma ratio), plus Richardson step-halving drivers;
//   * a brute-force shape operator for rotational profiles assembled from
//     finite differences of the parametrization.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials by subset enumeration (exponential; only
// for small n).

inline double sigma_enum(const std::vector<double>& lam, int k) {
  const int n = static_cast<int>(lam.size());
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double prod = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) prod *= lam[static_cast<std::size_t>(i)];
    total += prod;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Fixed-step RK4 profile integrator with its own family formulas.

inline double binom(int m, int r) {
  if (r < 0 || r > m) return 0.0;
  double v = 1.0;
  for (int t = 1; t <= std::min(r, m - r); ++t)
    v = v * static_cast<double>(m - std::min(r, m - r) + t) / static_cast<double>(t);
  return v;
}

/// The two construction families: rho = H, and rho = sigma_{k+1}/sigma_k.
struct OdeFamily {
  int n = 2;
  bool ratio = false;
  int k = 1;

  double rho_hat0() const {
    if (!ratio) return static_cast<double>(n - 1);
    return binom(n - 1, k + 1) / binom(n - 1, k);
  }
  double rho_hat(double xi) const {
    if (!ratio) return static_cast<double>(n - 1) + xi;
    return (binom(n - 1, k + 1) + binom(n - 1, k) * xi) / (binom(n - 1, k) + binom(n - 1, k - 1) * xi);
  }
  double inverse(double y) const {
    if (!ratio) return y - static_cast<double>(n - 1);
    const double ck = binom(n - 1, k), ckm = binom(n - 1, k - 1), ckp = binom(n - 1, k + 1);
    return (y * ck - ckp) / (ck - y * ckm);
  }
};

struct OdeState {
  double h, r, rd;
};

inline double ode_rhs(const OdeFamily& f, double h, double r, double rd) {
  const double q = -(r * rd + h) / (r - rd * h);
  const double y = (1.0 - rd * q) * f.rho_hat0();
  return -((1.0 + rd * rd) / r) * f.inverse(y);
}

inline OdeState rk4_to(const OdeFamily& f, OdeState s, double h_to, long steps) {
  const double dt = (h_to - s.h) / static_cast<double>(steps);
  const double h0 = s.h;
  for (long i = 0; i < steps; ++i) {
    const double h = h0 + dt * static_cast<double>(i);
    const double k1r = s.rd, k1d = ode_rhs(f, h, s.r, s.rd);
    const double k2r = s.rd + 0.5 * dt * k1d, k2d = ode_rhs(f, h + 0.5 * dt, s.r + 0.5 * dt * k1r, k2r);
    const double k3r = s.rd + 0.5 * dt * k2d, k3d = ode_rhs(f, h + 0.5 * dt, s.r + 0.5 * dt * k2r, k3r);
    const double k4r = s.rd + dt * k3d, k4d = ode_rhs(f, h + dt, s.r + dt * k3r, k4r);
    s.r += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    s.rd += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
  }
  s.h = h_to;
  return s;
}

inline double q_of(const OdeState& s) { return -(s.r * s.rd + s.h) / (s.r - s.rd * s.h); }

// Inflection point: integrate [h0, 0] on a fixed grid, bracket the sign
// change of Q, then bisect in h re-integrating from the bracket start with
// RK4 substeps.
inline double find_h_star(const OdeFamily& f, OdeState start, long grid) {
  OdeState s = start;
  const double dt = (0.0 - start.h) / static_cast<double>(grid);
  OdeState prev = s;
  double q_prev = q_of(s);
  for (long i = 1; i <= grid; ++i) {
    const double h_next = start.h + dt * static_cast<double>(i);
    s = rk4_to(f, s, h_next, 1);
    const double q_next = q_of(s);
    if (q_prev > 0.0 && q_next <= 0.0) {
      double lo = prev.h, hi = s.h;
      for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const OdeState sm = rk4_to(f, prev, mid, 64);
        if (q_of(sm) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = s;
    q_prev = q_next;
  }
  throw std::runtime_error("oracle: no inflection found on [h0, 0]");
}

/// Golden numbers from the step-halved oracle: the fixed grid is halved
/// until three successive halvings agree within `tol` on every tracked
/// value (the inflection point and r at the probe heights).
struct GoldenResult {
  double h_star = 0.0;
  std::vector<double> r_at;  // parallel to the probe heights
  long grid = 0;             // per unit h at convergence
};

inline GoldenResult golden_run(const OdeFamily& f, const OdeState& start,
                               const std::vector<double>& probes, double tol = 1e-8) {
  GoldenResult last{};
  int agreements = 0;
  for (long per_unit = 256; per_unit <= 262144; per_unit *= 2) {
    GoldenResult cur;
    cur.grid = per_unit;
    cur.h_star = find_h_star(f, start, static_cast<long>(-start.h * static_cast<double>(per_unit)) + 1);
    for (double hp : probes) {
      const long steps = std::max<long>(1, static_cast<long>(std::abs(hp - start.h) * static_cast<double>(per_unit)) + 1);
      cur.r_at.push_back(rk4_to(f, start, hp, steps).r);
    }
    if (!last.r_at.empty()) {
      double worst = std::abs(cur.h_star - last.h_star);
      for (std::size_t i = 0; i < probes.size(); ++i)
        worst = std::max(worst, std::abs(cur.r_at[i] - last.r_at[i]));
      agreements = worst <= tol ? agreements + 1 : 0;
    }
    last = cur;
    if (agreements >= 3) return last;
  }
  throw std::runtime_error("oracle: step halving did not converge to the requested tolerance");
}

// ---------------------------------------------------------------------------
// Brute-force shape operator of a rotational profile.

namespace fd {

inline double det(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> sub(n - 1, std::vector<double>(n - 1));
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t w = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != c) sub[i - 1][w++] = m[i][j];
    }
    total += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * det(sub);
  }
  return total;
}

// Normal direction to n vectors in R^{n+1} (generalized cross product).
inline std::vector<double> cross(const std::vector<std::vector<double>>& tangents) {
  const std::size_t n = tangents.size();
  std::vector<double> nu(n + 1);
  for (std::size_t c = 0; c <= n; ++c) {
    std::vector<std::vector<double>> sub(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t w = 0;
      for (std::size_t j = 0; j <= n; ++j)
        if (j != c) sub[i][w++] = tangents[i][j];
    }
    nu[c] = (c % 2 == 0 ? 1.0 : -1.0) * det(sub);
  }
  return nu;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a[p][j], aqj = a[q][j];
          a[p][j] = c * apj - s * aqj;
          a[q][j] = s * apj + c * aqj;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

// Lower Cholesky factor.
inline std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = g[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j)
        L[i][i] = std::sqrt(s);
      else
        L[i][j] = s / L[j][j];
    }
  }
  return L;
}

inline std::vector<double> forward_solve(const std::vector<std::vector<double>>& L,
                                         std::vector<double> b) {
  const std::size_t n = L.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= L[i][k] * b[k];
    b[i] /= L[i][i];
  }
  return b;
}

}  // namespace fd

/// Principal curvatures (ascending) of the rotational hypersurface generated
/// by the profile graph r(h), at parameter point (theta0, h0), via a finite
/// difference shape operator: tangents and second derivatives of
/// F(theta, h) = r(h) Phi(theta) + h e_{n+1} are formed by Richardson-
/// extrapolated central differences; the normal comes from the generalized
/// cross product; the eigenvalues from g^{-1} h via a symmetric similarity.
inline std::vector<double> shape_operator_curvatures(const std::function<double(double)>& profile,
                                                     int n, double h0,
                                                     const std::vector<double>& theta0) {
  const std::size_t dim = static_cast<std::size_t>(n);  // surface dimension
  // Phi: spherical coordinates on S^{n-1} in R^n
  const auto phi = [&](const std::vector<double>& th) {
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    double sines = 1.0;
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(n); ++i) {
      p[i] = sines * std::cos(th[i]);
      sines *= std::sin(th[i]);
    }
    p[static_cast<std::size_t>(n) - 1] = sines;
    return p;
  };
  const auto F = [&](const std::vector<double>& u) {
    std::vector<double> th(u.begin(), u.end() - 1);
    const double h = u.back();
    const double r = profile(h);
    std::vector<double> out = phi(th);
    for (auto& v : out) v *= r;
    out.push_back(h);
    return out;
  };

  std::vector<double> u0(theta0.begin(), theta0.end());
  u0.push_back(h0);

  const auto partial = [&](std::size_t i, double s) {
    std::vector<double> up = u0, um = u0;
    up[i] += s;
    um[i] -= s;
    const auto fp = F(up), fm = F(um);
    std::vector<double> d(fp.size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = (fp[c] - fm[c]) / (2.0 * s);
    return d;
  };
  const auto partial_rich = [&](std::size_t i) {
    const double s = 2e-3;
    const auto d1 = partial(i, s), d2 = partial(i, s / 2.0);
    std::vector<double> d(d1.size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = (4.0 * d2[c] - d1[c]) / 3.0;
    return d;
  };
  const auto second = [&](std::size_t i, std::size_t j, double s) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    if (i == j) {
      std::vector<double> up = u0, um = u0;
      up[i] += s;
      um[i] -= s;
      const auto fp = F(up), fm = F(um), f0 = F(u0);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] = (fp[c] - 2.0 * f0[c] + fm[c]) / (s * s);
    } else {
      std::vector<double> upp = u0, upm = u0, ump = u0, umm = u0;
      upp[i] += s;
      upp[j] += s;
      upm[i] += s;
      upm[j] -= s;
      ump[i] -= s;
      ump[j] += s;
      umm[i] -= s;
      umm[j] -= s;
      const auto fpp = F(upp), fpm = F(upm), fmp = F(ump), fmm = F(umm);
      for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = (fpp[c] - fpm[c] - fmp[c] + fmm[c]) / (4.0 * s * s);
    }
    return out;
  };
  const auto second_rich = [&](std::size_t i, std::size_t j) {
    const double s = 2e-3;
    const auto d1 = second(i, j, s), d2 = second(i, j, s / 2.0);
    std::vector<double> d(d1.size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = (4.0 * d2[c] - d1[c]) / 3.0;
    return d;
  };

  std::vector<std::vector<double>> tangents;
  for (std::size_t i = 0; i < dim; ++i) tangents.push_back(partial_rich(i));

  std::vector<double> nu = fd::cross(tangents);
  double norm = 0.0;
  for (double v : nu) norm += v * v;
  norm = std::sqrt(norm);
  for (auto& v : nu) v /= norm;
  // inward orientation: against the outward radial direction (Phi, 0)
  const auto ph = phi(theta0);
  double radial = 0.0;
  for (std::size_t c = 0; c + 1 < nu.size(); ++c) radial += nu[c] * ph[c];
  if (radial > 0.0)
    for (auto& v : nu) v = -v;

  std::vector<std::vector<double>> g(dim, std::vector<double>(dim)), hform(dim, std::vector<double>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c <= dim; ++c) dot += tangents[i][c] * tangents[j][c];
      g[i][j] = dot;
      const auto sec = second_rich(i, j);
      double hij = 0.0;
      for (std::size_t c = 0; c <= dim; ++c) hij += sec[c] * nu[c];
      hform[i][j] = hij;
    }

  // eigenvalues of g^{-1} h through the symmetric matrix L^{-1} h L^{-T}
  const auto L = fd::cholesky(g);
  std::vector<std::vector<double>> a(dim, std::vector<double>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<double> col(dim);
    for (std::size_t i = 0; i < dim; ++i) col[i] = hform[i][j];
    col = fd::forward_solve(L, col);
    for (std::size_t i = 0; i < dim; ++i) a[i][j] = col[i];
  }
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) row[j] = a[i][j];
    row = fd::forward_solve(L, row);
    for (std::size_t j = 0; j < dim; ++j) a[i][j] = row[j];
  }
  auto ev = fd::jacobi_eigenvalues(a);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace oracle
