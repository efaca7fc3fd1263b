#ifndef NLLAB_KERNEL_HPP
#define NLLAB_KERNEL_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "nllab/quadrature.hpp"

namespace nllab {

/// Ellipticity envelope (sigma, lambda, Lambda) of the scale-invariant
/// kernel class. Everything downstream reads its bounds from here.
struct EllipticityParams {
  double sigma;      ///< order, in (1, 2)
  double lambda_lo;  ///< lower kernel bound, > 0
  double lambda_hi;  ///< upper kernel bound, >= lambda_lo

  void validate() const {
    if (!(sigma > 1.0 && sigma < 2.0))
      throw std::invalid_argument("EllipticityParams: sigma must be in (1,2)");
    if (!(lambda_lo > 0.0 && lambda_hi >= lambda_lo &&
          std::isfinite(lambda_hi)))
      throw std::invalid_argument(
          "EllipticityParams: need 0 < lambda_lo <= lambda_hi < inf");
  }

  /// Largest admissible |drift| in the class.
  double drift_bound() const { return lambda_hi / (sigma - 1.0); }
};

using KernelFn = std::function<double(double)>;

/// One linear operator of the class: kernel density K(y) in
/// [lambda_lo, lambda_hi] plus a drift b with |b| <= Lambda/(sigma-1).
struct KernelSpec {
  KernelFn kernel;
  double drift = 0.0;
  EllipticityParams params;

  /// Checks the class invariants on the audit mesh. Pointwise-for-all-y is
  /// impossible for closures, so the mesh is the contract.
  void validate() const {
    params.validate();
    if (!kernel) throw std::invalid_argument("KernelSpec: empty kernel");
    if (std::abs(drift) > params.drift_bound() * (1.0 + 1e-12))
      throw std::invalid_argument("KernelSpec: drift exceeds class bound");
    for (double y : audit_mesh()) {
      double k = kernel(y);
      if (!(k >= params.lambda_lo * (1.0 - 1e-12) &&
            k <= params.lambda_hi * (1.0 + 1e-12)))
        throw std::invalid_argument("KernelSpec: kernel leaves [lambda,Lambda]");
    }
  }

  bool in_class() const {
    try {
      validate();
    } catch (const std::invalid_argument&) {
      return false;
    }
    return true;
  }
};

/// Drift-to-nonlocal conversion: J carries the drift as an odd kernel on
/// B_{R0}, K' = K - J, and the eps-truncated pair regularizes the origin.
struct ConvertedKernel {
  double r0 = 0.0;
  KernelFn j_fn;
  KernelFn k_prime;
  double eps = 0.0;
  KernelFn k_prime_eps;
  KernelFn j_eps;
  EllipticityParams params;
  double drift = 0.0;      ///< original drift, kept for reconstruction checks
  double j_slope = 0.0;    ///< J(y) = j_slope * y on |y| < r0
};

/// Radius of the ball carrying the drift kernel. In n = 1 the defining
/// equation (2-s) R0^{-1} \int_{B_{R0}} |y|^2 / |y|^{1+s} dy = 4L/(l(s-1))
/// collapses to the closed form below.
inline double solve_r0(const EllipticityParams& p) {
  p.validate();
  return std::pow(p.lambda_lo * (p.sigma - 1.0) / (2.0 * p.lambda_hi),
                  1.0 / (p.sigma - 1.0));
}

/// General-equation fallback: bisection on R0 |-> 2 R0^{1-sigma}. Kept behind
/// the same interface to document the construction; agrees with solve_r0.
inline double solve_r0_bisection(const EllipticityParams& p) {
  p.validate();
  double target = 4.0 * p.lambda_hi / (p.lambda_lo * (p.sigma - 1.0));
  auto lhs = [&](double r) {
    double a = 1e-4 * r;
    // analytic below a where the integrand is exactly y^{1-sigma}
    double head = std::pow(a, 2.0 - p.sigma) / (2.0 - p.sigma);
    return (2.0 - p.sigma) / r *
           (head + integrate_singular([](double y) { return y * y; }, a, r,
                                      p.sigma)) *
           2.0;  // both signs of y
  };
  double lo = 1e-8, hi = 1.0;
  while (lhs(hi) > target) hi *= 2.0;
  while (lhs(lo) < target) lo *= 0.5;
  for (int i = 0; i < 200; ++i) {
    double mid = std::sqrt(lo * hi);
    (lhs(mid) > target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

/// Splits L_{K,b} into an elliptic part K' and an odd drift kernel J with
/// b = (2-sigma) \int y J(y) / |y|^{1+sigma} dy and sup|J| <= lambda/4.
inline ConvertedKernel drift_to_nonlocal(const KernelSpec& k) {
  k.params.validate();
  ConvertedKernel c;
  c.params = k.params;
  c.drift = k.drift;
  c.r0 = solve_r0(k.params);
  double slope = k.drift * k.params.lambda_lo * (k.params.sigma - 1.0) /
                 (4.0 * k.params.lambda_hi * c.r0);
  c.j_slope = slope;
  double r0 = c.r0;
  c.j_fn = [slope, r0](double y) {
    return std::abs(y) < r0 ? slope * y : 0.0;
  };
  KernelFn base = k.kernel;
  KernelFn j = c.j_fn;
  c.k_prime = [base, j](double y) { return base(y) - j(y); };
  c.eps = 0.0;
  c.k_prime_eps = c.k_prime;
  c.j_eps = c.j_fn;
  return c;
}

/// K'_eps = lambda inside B_eps, K' outside; J_eps vanishes inside B_eps.
/// eps = 0 is the identity on (K', J).
inline ConvertedKernel truncate_kernel(const ConvertedKernel& c, double eps) {
  if (eps < 0.0) throw std::invalid_argument("truncate_kernel: eps < 0");
  ConvertedKernel out = c;
  out.eps = eps;
  if (eps == 0.0) {
    out.k_prime_eps = c.k_prime;
    out.j_eps = c.j_fn;
    return out;
  }
  double lambda = c.params.lambda_lo;
  KernelFn kp = c.k_prime;
  KernelFn j = c.j_fn;
  out.k_prime_eps = [kp, lambda, eps](double y) {
    return std::abs(y) <= eps ? lambda : kp(y);
  };
  out.j_eps = [j, eps](double y) { return std::abs(y) <= eps ? 0.0 : j(y); };
  return out;
}

/// Recovers the drift from its nonlocal representation by reference
/// quadrature of (2-sigma) \int y J(y) / |y|^{1+sigma} dy.
inline double reconstruct_drift(const ConvertedKernel& c,
                                double rel_tol = 1e-9) {
  if (c.j_slope == 0.0) return 0.0;
  double s = c.params.sigma;
  // y J(y) is even, so both signs contribute equally; below a the
  // integrand is exactly j_slope y^{1-sigma}, integrated in closed form.
  double a = 1e-4 * c.r0;
  double head = c.j_slope * std::pow(a, 2.0 - s) / (2.0 - s);
  double half =
      head + integrate_singular([&](double y) { return y * c.j_fn(y); }, a,
                                c.r0, s, rel_tol);
  return (2.0 - s) * 2.0 * half;
}

/// Class rescaling: Ktilde(y) = K(kappa y) and the drift picks up the
/// first-moment of K over B_1 \ B_kappa. Membership in the class is
/// preserved; the operator identity is exercised in the operator tests.
inline KernelSpec rescale(const KernelSpec& k, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw std::invalid_argument("rescale: kappa must be in (0,1]");
  KernelSpec out;
  out.params = k.params;
  KernelFn base = k.kernel;
  out.kernel = [base, kappa](double y) { return base(kappa * y); };
  if (kappa == 1.0) {
    out.drift = k.drift;
    return out;
  }
  double s = k.params.sigma;
  double pos = integrate_singular([&](double y) { return y * base(y); }, kappa,
                                  1.0, s);
  double neg = integrate_singular([&](double y) { return y * base(-y); },
                                  kappa, 1.0, s);
  double moment = (2.0 - s) * (pos - neg);
  // The compensator acquires the first moment of K over B_1 \ B_kappa with
  // a minus sign; verified against direct evaluation of both sides.
  out.drift = std::pow(kappa, s - 1.0) * (k.drift - moment);
  return out;
}

/// Named kernel presets used by config files.
///   "constant"   K == value
///   "two-sided"  K = Lambda on y > 0, lambda on y < 0
///   "oscillating" K = lambda + (Lambda-lambda)(1+sin(log|y|))/2
inline KernelSpec make_preset(const std::string& preset,
                              const EllipticityParams& p, double drift,
                              double value = 1.0) {
  p.validate();
  KernelSpec k;
  k.params = p;
  k.drift = drift;
  if (preset == "constant") {
    k.kernel = [value](double) { return value; };
  } else if (preset == "two-sided") {
    double lo = p.lambda_lo, hi = p.lambda_hi;
    k.kernel = [lo, hi](double y) { return y > 0.0 ? hi : lo; };
  } else if (preset == "oscillating") {
    double lo = p.lambda_lo, hi = p.lambda_hi;
    k.kernel = [lo, hi](double y) {
      double a = std::abs(y);
      if (a <= 0.0) return lo;
      return lo + (hi - lo) * 0.5 * (1.0 + std::sin(std::log(a)));
    };
  } else {
    throw std::invalid_argument("unknown kernel preset: " + preset);
  }
  return k;
}

}  // namespace nllab

#endif  // NLLAB_KERNEL_HPP
