#ifndef NLLAB_OPERATORS_HPP
#define NLLAB_OPERATORS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nllab/field.hpp"
#include "nllab/kernel.hpp"
#include "nllab/quadrature.hpp"

namespace nllab {

/// Node/weight layout for the singular integral: below `inner_cut` the
/// second-difference integrand is replaced by its Taylor term and integrated
/// analytically; from there to `outer_cut` composite midpoint on
/// geometrically graded panels. Every operator evaluation in a run shares
/// one scheme, so pointwise inequalities between operators are exact at the
/// discrete level.
struct QuadratureScheme {
  double inner_cut = 1e-4;
  double outer_cut = 100.0;
  std::vector<std::pair<double, double>> nodes;  ///< (y, weight), y > 0 ascending

  static QuadratureScheme make(double inner_cut, double outer_cut,
                               double ratio = 1.15, int sub = 4) {
    if (!(inner_cut > 0.0 && outer_cut >= 2.0 && ratio > 1.0 && sub >= 1))
      throw std::invalid_argument("QuadratureScheme: bad layout parameters");
    QuadratureScheme q;
    q.inner_cut = inner_cut;
    q.outer_cut = outer_cut;
    double lo = inner_cut;
    while (lo < outer_cut) {
      double hi = std::min(lo * ratio, outer_cut);
      double w = (hi - lo) / sub;
      for (int j = 0; j < sub; ++j)
        q.nodes.emplace_back(lo + (j + 0.5) * w, w);
      lo = hi;
    }
    return q;
  }

  /// Scheme matched to a grid: inner cut at max(h/2, 1e-4).
  static QuadratureScheme for_grid(double h, double outer_cut = 100.0,
                                   double ratio = 1.15, int sub = 4) {
    return make(std::max(0.5 * h, 1e-4), outer_cut, ratio, sub);
  }

  /// High-resolution scheme for analytic reference checks.
  static QuadratureScheme reference() { return make(1e-4, 100.0, 1.06, 8); }

  void validate() const {
    KahanSum total;
    for (auto& [y, w] : nodes) {
      if (!(w > 0.0)) throw std::invalid_argument("QuadratureScheme: weight <= 0");
      total.add(w);
    }
    if (!std::isfinite(total.value()))
      throw std::invalid_argument("QuadratureScheme: weight sum not finite");
  }

  /// Magnitude of the dropped tail for data bounded by `bound`, kernel
  /// bounded by `lambda_hi`. Reported by the solver, never silently ignored.
  double tail_bound(const EllipticityParams& p, double bound) const {
    return 2.0 * (2.0 - p.sigma) / p.sigma * p.lambda_hi * bound *
           std::pow(outer_cut, -p.sigma);
  }
};

/// delta u(x; y) = u(x+y) - u(x) - Du(x) y 1_{B_1}(y).
inline double delta_u(const Slice& u, double x, double y) {
  double d = u(x + y) - u(x);
  if (std::abs(y) < 1.0) d -= u.du(x) * y;
  return d;
}

namespace detail {

inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string(what) + ": non-finite result");
}

}  // namespace detail

/// L^sigma_{K,b} u(x): singular quadrature of the second-order increment
/// against (2-sigma) K(y)/|y|^{1+sigma} plus the drift term.
inline double evaluate_linear(const Slice& u, const KernelSpec& k, double x,
                              const QuadratureScheme& q) {
  double s = k.params.sigma;
  double ux = u(x);
  double dux = u.du(x);
  double d2 = u.d2u(x);
  double a = q.inner_cut;
  double inner = 0.5 * d2 * (k.kernel(0.5 * a) + k.kernel(-0.5 * a)) *
                 std::pow(a, 2.0 - s);
  KahanSum sum;
  for (auto& [y, w] : q.nodes) {
    double comp = std::abs(y) < 1.0 ? dux * y : 0.0;
    double dp = u(x + y) - ux - comp;
    double dm = u(x - y) - ux + comp;
    sum.add(w * (dp * k.kernel(y) + dm * k.kernel(-y)) *
            std::pow(y, -1.0 - s));
  }
  double v = inner + (2.0 - s) * sum.value() + k.drift * dux;
  detail::check_finite(v, "evaluate_linear");
  return v;
}

/// Pucci-type extremal envelopes over the class: closed-form pointwise
/// maximizer K = Lambda where delta u > 0 (lambda otherwise) and extremal
/// drift, evaluated on the same nodes as the linear operators.
inline double evaluate_extremal(const Slice& u, int sign,
                                const EllipticityParams& p, double x,
                                const QuadratureScheme& q) {
  if (sign != +1 && sign != -1)
    throw std::invalid_argument("evaluate_extremal: sign must be +-1");
  double s = p.sigma;
  double lo = p.lambda_lo, hi = p.lambda_hi;
  double ux = u(x);
  double dux = u.du(x);
  double d2 = u.d2u(x);
  auto env = [&](double d) {
    return sign > 0 ? hi * std::max(d, 0.0) + lo * std::min(d, 0.0)
                    : lo * std::max(d, 0.0) + hi * std::min(d, 0.0);
  };
  double inner = env(d2) * std::pow(q.inner_cut, 2.0 - s);
  KahanSum sum;
  for (auto& [y, w] : q.nodes) {
    double comp = std::abs(y) < 1.0 ? dux * y : 0.0;
    double dp = u(x + y) - ux - comp;
    double dm = u(x - y) - ux + comp;
    sum.add(w * (env(dp) + env(dm)) * std::pow(y, -1.0 - s));
  }
  double v = inner + (2.0 - s) * sum.value() +
             sign * p.drift_bound() * std::abs(dux);
  detail::check_finite(v, "evaluate_extremal");
  return v;
}

/// A fully non-linear operator: a single linear member, an extremal tag, or
/// a finite inf-sup family, optionally x-modulated by a smooth weight that
/// blends the inf-sup and sup-inf combinations.
struct OperatorSpec {
  enum class Variant { Linear, ExtremalPlus, ExtremalMinus, InfSup };

  Variant variant = Variant::Linear;
  EllipticityParams params;
  std::vector<std::vector<KernelSpec>> families;
  std::function<double(double)> modulation;  ///< empty => pure inf-sup

  static OperatorSpec linear(KernelSpec k) {
    OperatorSpec op;
    op.variant = Variant::Linear;
    op.params = k.params;
    op.families = {{std::move(k)}};
    return op;
  }
  static OperatorSpec extremal(int sign, const EllipticityParams& p) {
    OperatorSpec op;
    op.variant = sign > 0 ? Variant::ExtremalPlus : Variant::ExtremalMinus;
    op.params = p;
    return op;
  }
  static OperatorSpec inf_sup(std::vector<std::vector<KernelSpec>> fams,
                              std::function<double(double)> mod = {}) {
    if (fams.empty() || fams.front().empty())
      throw std::invalid_argument("OperatorSpec: empty inf-sup family");
    OperatorSpec op;
    op.variant = Variant::InfSup;
    op.params = fams.front().front().params;
    op.families = std::move(fams);
    op.modulation = std::move(mod);
    return op;
  }

  bool x_dependent() const { return static_cast<bool>(modulation); }

  /// Combines frozen member values {L u} at the point z. This is the
  /// I(z, {a_L}) slot that mollification averages over.
  double combine(double z, const std::vector<std::vector<double>>& vals) const {
    double infsup = std::numeric_limits<double>::infinity();
    double supinf = -std::numeric_limits<double>::infinity();
    for (const auto& fam : vals) {
      double mx = -std::numeric_limits<double>::infinity();
      double mn = std::numeric_limits<double>::infinity();
      for (double v : fam) {
        mx = std::max(mx, v);
        mn = std::min(mn, v);
      }
      infsup = std::min(infsup, mx);
      supinf = std::max(supinf, mn);
    }
    if (!modulation) return infsup;
    double w = modulation(z);
    return w * infsup + (1.0 - w) * supinf;
  }
};

/// I u(x) = inf_a sup_b L_{a,b} u(x) with dispatch for the linear and
/// extremal variants. I(0) = 0 holds structurally.
inline double evaluate_operator(const Slice& u, const OperatorSpec& op,
                                double x, const QuadratureScheme& q) {
  switch (op.variant) {
    case OperatorSpec::Variant::Linear:
      return evaluate_linear(u, op.families[0][0], x, q);
    case OperatorSpec::Variant::ExtremalPlus:
      return evaluate_extremal(u, +1, op.params, x, q);
    case OperatorSpec::Variant::ExtremalMinus:
      return evaluate_extremal(u, -1, op.params, x, q);
    case OperatorSpec::Variant::InfSup: {
      std::vector<std::vector<double>> vals(op.families.size());
      for (std::size_t i = 0; i < op.families.size(); ++i) {
        vals[i].reserve(op.families[i].size());
        for (const auto& k : op.families[i])
          vals[i].push_back(evaluate_linear(u, k, x, q));
      }
      return op.combine(x, vals);
    }
  }
  throw std::logic_error("evaluate_operator: unreachable");
}

/// Truncated fractional Laplacian (-Delta)_h^{sigma/2}: symmetric
/// second-difference quadrature excluding |y| <= hcut. hcut = 0 recovers
/// the full operator up to the inner Taylor correction.
inline double truncated_fraclap(const Slice& u, double x, double sigma,
                                double hcut, const QuadratureScheme& q) {
  if (hcut < 0.0) throw std::invalid_argument("truncated_fraclap: hcut < 0");
  double ux = u(x);
  double inner = 0.0;
  double a = q.inner_cut;
  if (hcut < a)
    inner = u.d2u(x) * (std::pow(a, 2.0 - sigma) -
                        (hcut > 0.0 ? std::pow(hcut, 2.0 - sigma) : 0.0));
  KahanSum sum;
  for (auto& [y, w] : q.nodes) {
    if (y <= hcut) continue;
    sum.add(w * (u(x + y) + u(x - y) - 2.0 * ux) * std::pow(y, -1.0 - sigma));
  }
  double v = inner + (2.0 - sigma) * sum.value();
  detail::check_finite(v, "truncated_fraclap");
  return v;
}

/// L^eps_{K,b}: the drift-to-nonlocal rewrite with K'_eps, J_eps. Evaluated
/// as evaluate_linear plus a correction supported in |y| <= eps, so eps = 0
/// reduces to the linear operator identically.
inline double evaluate_regularized(const Slice& u, const KernelSpec& k,
                                   double eps, double x,
                                   const QuadratureScheme& q) {
  if (eps < 0.0) throw std::invalid_argument("evaluate_regularized: eps < 0");
  double base = evaluate_linear(u, k, x, q);
  if (eps == 0.0) return base;

  ConvertedKernel c = truncate_kernel(drift_to_nonlocal(k), eps);
  double s = k.params.sigma;
  double lambda = k.params.lambda_lo;
  double ux = u(x);
  double dux = u.du(x);
  double d2 = u.d2u(x);

  // Analytic piece below a: delta u (lambda - K') has even part
  // (1/2) u'' y^2 (lambda - K), the odd J factor cancels across signs;
  // -(u(x+y)-u(x)) J keeps the even part -u' y * slope * y.
  double a = std::min({q.inner_cut, eps, c.j_slope != 0.0 ? c.r0 : eps});
  double corr = 0.0;
  if (a > 0.0) {
    double kp = k.kernel(0.5 * a), km = k.kernel(-0.5 * a);
    corr += (0.5 * d2 * (2.0 * lambda - kp - km) - 2.0 * dux * c.j_slope) *
            std::pow(a, 2.0 - s);
  }
  if (eps > a) {
    auto integrand = [&](double y, double sgn) {
      double yy = sgn * y;
      double del = u(x + yy) - ux - dux * yy;  // eps < 1 in practice; guard:
      if (std::abs(yy) >= 1.0) del = u(x + yy) - ux;
      double odd = u(x + yy) - ux;
      return (del * (lambda - c.k_prime(yy)) - odd * c.j_fn(yy)) *
             std::pow(y, -1.0 - s);
    };
    corr += (2.0 - s) *
            (integrate([&](double y) { return integrand(y, +1.0); }, a, eps,
                       1e-7) +
             integrate([&](double y) { return integrand(y, -1.0); }, a, eps,
                       1e-7));
  }
  double v = base + corr;
  detail::check_finite(v, "evaluate_regularized");
  return v;
}

/// Fixed 9-point discretization of a smooth positive mollifier supported in
/// B_1 with unit mass.
struct MollifierStencil {
  std::array<double, 9> offsets;
  std::array<double, 9> weights;

  MollifierStencil() {
    KahanSum total;
    for (int j = 0; j < 9; ++j) {
      double sj = -0.8 + 0.2 * j;
      offsets[j] = sj;
      weights[j] = std::exp(-1.0 / (1.0 - sj * sj));
      total.add(weights[j]);
    }
    for (auto& w : weights) w /= total.value();
  }
};

/// I_eps u(x): mollification in the frozen-coefficient slot only. The
/// regularized member values are taken at x; the x-dependence of the
/// combination is averaged over z near x.
inline double evaluate_mollified(const Slice& u, const OperatorSpec& op,
                                 double eps, double x,
                                 const QuadratureScheme& q) {
  if (!(eps > 0.0)) throw std::invalid_argument("evaluate_mollified: eps <= 0");
  if (op.variant != OperatorSpec::Variant::InfSup)
    throw std::invalid_argument("evaluate_mollified: inf-sup operator required");
  std::vector<std::vector<double>> vals(op.families.size());
  for (std::size_t i = 0; i < op.families.size(); ++i) {
    vals[i].reserve(op.families[i].size());
    for (const auto& k : op.families[i])
      vals[i].push_back(evaluate_regularized(u, k, eps, x, q));
  }
  static const MollifierStencil stencil;
  if (!op.x_dependent()) return op.combine(x, vals);
  KahanSum sum;
  for (int j = 0; j < 9; ++j)
    sum.add(stencil.weights[j] * op.combine(x + eps * stencil.offsets[j], vals));
  double v = sum.value();
  detail::check_finite(v, "evaluate_mollified");
  return v;
}

/// Precompiled evaluation of an OperatorSpec on a fixed scheme: kernel values
/// and singular weights are tabulated once, and the per-node second
/// differences are shared across all members of an inf-sup family. Agrees
/// with evaluate_operator up to round-off; the time loop uses this form.
class OperatorEvaluator {
 public:
  OperatorEvaluator(OperatorSpec op, const QuadratureScheme& q)
      : op_(std::move(op)), q_(q) {
    double s = op_.params.sigma;
    ys_.reserve(q_.nodes.size());
    base_.reserve(q_.nodes.size());
    for (auto& [y, w] : q_.nodes) {
      ys_.push_back(y);
      base_.push_back((2.0 - s) * w * std::pow(y, -1.0 - s));
    }
    inner_pow_ = std::pow(q_.inner_cut, 2.0 - s);
    for (const auto& fam : op_.families) {
      tables_.emplace_back();
      for (const auto& k : fam) {
        Table t;
        t.drift = k.drift;
        t.inner = 0.5 * (k.kernel(0.5 * q_.inner_cut) +
                         k.kernel(-0.5 * q_.inner_cut)) *
                  inner_pow_;
        t.cp.reserve(ys_.size());
        t.cm.reserve(ys_.size());
        for (std::size_t j = 0; j < ys_.size(); ++j) {
          t.cp.push_back(base_[j] * k.kernel(ys_[j]));
          t.cm.push_back(base_[j] * k.kernel(-ys_[j]));
        }
        tables_.back().push_back(std::move(t));
      }
    }
  }

  double operator()(const Slice& u, double x) const {
    double ux = u(x);
    double dux = u.du(x);
    double d2 = u.d2u(x);
    std::size_t n = ys_.size();
    std::vector<double> dp_(n), dm_(n);
    for (std::size_t j = 0; j < n; ++j) {
      double y = ys_[j];
      double comp = y < 1.0 ? dux * y : 0.0;
      dp_[j] = u(x + y) - ux - comp;
      dm_[j] = u(x - y) - ux + comp;
    }
    using V = OperatorSpec::Variant;
    if (op_.variant == V::ExtremalPlus || op_.variant == V::ExtremalMinus) {
      int sign = op_.variant == V::ExtremalPlus ? +1 : -1;
      double lo = op_.params.lambda_lo, hi = op_.params.lambda_hi;
      auto env = [&](double d) {
        return sign > 0 ? hi * std::max(d, 0.0) + lo * std::min(d, 0.0)
                        : lo * std::max(d, 0.0) + hi * std::min(d, 0.0);
      };
      KahanSum sum;
      for (std::size_t j = 0; j < n; ++j)
        sum.add(base_[j] * (env(dp_[j]) + env(dm_[j])));
      double v = env(d2) * inner_pow_ + sum.value() +
                 sign * op_.params.drift_bound() * std::abs(dux);
      detail::check_finite(v, "OperatorEvaluator");
      return v;
    }
    std::vector<std::vector<double>> vals_(tables_.size());
    for (std::size_t i = 0; i < tables_.size(); ++i) {
      vals_[i].resize(tables_[i].size());
      for (std::size_t m = 0; m < tables_[i].size(); ++m) {
        const Table& t = tables_[i][m];
        KahanSum sum;
        for (std::size_t j = 0; j < n; ++j)
          sum.add(t.cp[j] * dp_[j] + t.cm[j] * dm_[j]);
        vals_[i][m] = t.inner * d2 + sum.value() + t.drift * dux;
      }
    }
    double v = op_.variant == V::Linear ? vals_[0][0] : op_.combine(x, vals_);
    detail::check_finite(v, "OperatorEvaluator");
    return v;
  }

  const OperatorSpec& spec() const { return op_; }
  const QuadratureScheme& scheme() const { return q_; }

 private:
  struct Table {
    std::vector<double> cp, cm;
    double inner = 0.0;
    double drift = 0.0;
  };
  OperatorSpec op_;
  QuadratureScheme q_;
  std::vector<double> ys_, base_;
  double inner_pow_ = 0.0;
  std::vector<std::vector<Table>> tables_;
};

// Field-level wrappers: evaluate at a stored time of a trajectory.

inline double evaluate_linear(const SpaceTimeField& f, const KernelSpec& k,
                              double x, double t, const QuadratureScheme& q) {
  return evaluate_linear(GridSlice(f, f.time_index(t)), k, x, q);
}
inline double evaluate_extremal(const SpaceTimeField& f, int sign,
                                const EllipticityParams& p, double x, double t,
                                const QuadratureScheme& q) {
  return evaluate_extremal(GridSlice(f, f.time_index(t)), sign, p, x, q);
}
inline double evaluate_operator(const SpaceTimeField& f, const OperatorSpec& op,
                                double x, double t, const QuadratureScheme& q) {
  return evaluate_operator(GridSlice(f, f.time_index(t)), op, x, q);
}
inline double delta_u(const SpaceTimeField& f, double x, double y, double t) {
  return delta_u(GridSlice(f, f.time_index(t)), x, y);
}
inline double truncated_fraclap(const SpaceTimeField& f, double x, double t,
                                double sigma, double hcut,
                                const QuadratureScheme& q) {
  return truncated_fraclap(GridSlice(f, f.time_index(t)), x, sigma, hcut, q);
}

}  // namespace nllab

#endif  // NLLAB_OPERATORS_HPP
