#pragma once

// Differential geometry of rotational hypersurfaces described by a profile
// graph r(h): principal curvatures, support function (inward normal
// convention), the expander constants mu for round spheres and cylinders,
// and the pointwise self-expander residual  -1/rho - mu <F, nu>.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "icurv/symfun.hpp"

namespace icurv {

/// Self-expander constant in -1/rho = mu <F, nu>, mu > 0.
struct ExpanderParams {
  double mu = 0.0;
};

/// Principal curvatures of the rotational hypersurface at a profile point:
/// n-1 tangential entries 1/(r sqrt(1+rdot^2)) followed by the profile
/// curvature -rddot/(1+rdot^2)^{3/2}.
inline std::vector<double> principal_curvatures(double r, double rdot, double rddot, int n) {
  if (!(r > 0.0)) throw std::domain_error("principal_curvatures: r must be positive");
  if (n < 2) throw std::invalid_argument("principal_curvatures: n must be >= 2");
  const double w = std::sqrt(1.0 + rdot * rdot);
  std::vector<double> lambdas(static_cast<std::size_t>(n), 1.0 / (r * w));
  lambdas.back() = -rddot / (w * w * w);
  return lambdas;
}

/// Support function <F, nu> = (rdot*h - r)/sqrt(1+rdot^2), inward normal;
/// equals -radius on round cylinders and spheres.
inline double support_function(double h, double r, double rdot) {
  if (!(r > 0.0)) throw std::domain_error("support_function: r must be positive");
  return (rdot * h - r) / std::sqrt(1.0 + rdot * rdot);
}

/// Expander constant of the round cylinder: mu = 1/rho(1,...,1,0).
inline ExpanderParams mu_cylinder(const CurvatureFunction& f) {
  if (!f.cylinder_in_cone())
    throw ConeError("cylinder direction (1,...,1,0) not in cone",
                    [&] {
                      std::vector<double> l(static_cast<std::size_t>(f.dimension()), 1.0);
                      l.back() = 0.0;
                      return l;
                    }());
  return {1.0 / f.rho_hat0()};
}

/// Expander constant of the round sphere: mu = 1/rho(1,...,1).
inline ExpanderParams mu_sphere(const CurvatureFunction& f) {
  const std::vector<double> ones(static_cast<std::size_t>(f.dimension()), 1.0);
  return {1.0 / eval_rho(f, ones)};  // eval_rho raises ConeError when (1,...,1) is inadmissible
}

/// Pointwise self-expander residual -1/rho(lambda) - mu <F, nu>; identically
/// zero on exact self-expanders. The composite family evaluates rho through
/// its segment factorization rho(a,...,a,b) = a * rho_hat(b/a), whose
/// xi-interval extends beyond the conservative general-lambda cone.
inline double expander_residual(const CurvatureFunction& f, double h, double r, double rdot,
                                double rddot, const ExpanderParams& p) {
  const auto lambdas = principal_curvatures(r, rdot, rddot, f.dimension());
  double rho;
  if (f.family() == Family::Composite) {
    const double a = lambdas.front();
    const double xi = lambdas.back() / a;
    if (!(xi > -f.alpha() && xi < f.beta())) throw ConeError("profile direction outside segment interval", lambdas);
    rho = a * detail::segment_value(f, xi);
  } else {
    rho = eval_rho(f, lambdas);
  }
  return -1.0 / rho - p.mu * support_function(h, r, rdot);
}

}  // namespace icurv
