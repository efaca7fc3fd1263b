#ifndef NLLAB_QUADRATURE_HPP
#define NLLAB_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace nllab {

/// Compensated (Kahan) accumulator. All reductions in the library go through
/// this in a fixed order so results are bitwise reproducible across thread
/// counts.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

namespace detail {

inline double midpoint_panel(const std::function<double(double)>& f, double a,
                             double b, int n) {
  KahanSum s;
  double w = (b - a) / n;
  for (int i = 0; i < n; ++i) s.add(f(a + (i + 0.5) * w));
  return s.value() * w;
}

}  // namespace detail

/// Composite midpoint on dyadically refined panels. Refines until the
/// relative change drops below `rel_tol`. Meant for 1-D integrands that are
/// smooth away from the endpoints; callers split at known singularities.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-8) {
  if (!(b > a)) return 0.0;
  int n = 16;
  double prev = detail::midpoint_panel(f, a, b, n);
  for (int iter = 0; iter < 22; ++iter) {
    n *= 2;
    double cur = detail::midpoint_panel(f, a, b, n);
    double scale = std::max({1e-300, std::abs(cur), std::abs(prev)});
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  return prev;
}

/// Reference quadrature of \int_a^b f(y) / y^{1+sigma} dy on 0 < a < b,
/// split on dyadic subintervals so the grading follows the kernel decay.
inline double integrate_singular(const std::function<double(double)>& f,
                                 double a, double b, double sigma,
                                 double rel_tol = 1e-8) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_singular: a <= 0");
  KahanSum s;
  double lo = a;
  while (lo < b) {
    double hi = std::min(2.0 * lo, b);
    s.add(integrate(
        [&](double y) { return f(y) * std::pow(y, -1.0 - sigma); }, lo, hi,
        rel_tol));
    lo = hi;
  }
  return s.value();
}

/// Logarithmically spaced audit mesh: `per_sign` magnitudes per sign in
/// [lo, hi]. Pointwise kernel-class invariants are checked on this mesh.
inline std::vector<double> audit_mesh(std::size_t per_sign = 512,
                                      double lo = 1e-6, double hi = 1e3) {
  std::vector<double> mesh;
  mesh.reserve(2 * per_sign);
  double ratio = std::log(hi / lo) / static_cast<double>(per_sign - 1);
  for (std::size_t i = 0; i < per_sign; ++i) {
    double y = lo * std::exp(ratio * static_cast<double>(i));
    mesh.push_back(-y);
    mesh.push_back(y);
  }
  return mesh;
}

}  // namespace nllab

#endif  // NLLAB_QUADRATURE_HPP
