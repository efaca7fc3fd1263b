#ifndef NLLAB_SOLVER_HPP
#define NLLAB_SOLVER_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nllab/field.hpp"
#include "nllab/operators.hpp"
#include "nllab/parallel.hpp"

namespace nllab {

/// u_t - Iu = f on (-1,1) x (t_start, 0] with exterior data g on the
/// parabolic boundary.
struct ProblemSpec {
  OperatorSpec op;
  std::function<double(double, double)> rhs;  ///< f(x, t)
  ExteriorData exterior;
  double t_start = -1.0;
  EllipticityParams params;
};

struct SolverConfig {
  double h = 0.01;
  double cfl = 0.5;          ///< safety factor in (0,1)
  double r_max = 4.0;
  double outer_cut = 100.0;  ///< quadrature tail radius
  double quad_ratio = 1.15;
  int quad_sub = 4;

  // scheme selection
  bool regularized_fixedpoint = false;
  double eps = 0.05;
  int max_iter = 60;
  double fp_tol = 1e-6;

  void validate() const {
    if (!(h > 0.0 && cfl > 0.0 && cfl < 1.0 && r_max >= 2.0))
      throw std::invalid_argument("SolverConfig: bad h/cfl/r_max");
  }
};

struct CflError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FixedPointError : std::runtime_error {
  FixedPointError(std::string msg, std::vector<double> gaps_)
      : std::runtime_error(std::move(msg)), gaps(std::move(gaps_)) {}
  std::vector<double> gaps;  ///< iterate-gap sequence
};

/// Diagnostics from a solve: the time step actually used, the maximal
/// re-evaluated defect |delta_t u - Iu - f| on sampled steps, and the
/// reported tail-truncation interval.
struct SolveReport {
  double dt = 0.0;
  double residual_max = 0.0;
  double residual_tol = 0.0;
  double tail_bound = 0.0;
  std::vector<double> fp_gaps;  ///< fixed-point iterate gaps, if applicable
};

namespace detail {

/// Diagonal coefficient of -I at a node: the CFL constant comes from the
/// actual quadrature weight sum, not an analytic bound.
inline double diagonal_coefficient(const QuadratureScheme& q,
                                   const EllipticityParams& p, double h) {
  double s = p.sigma;
  KahanSum w;
  for (auto& [y, wt] : q.nodes) w.add(wt * std::pow(y, -1.0 - s));
  double outer = 2.0 * (2.0 - s) * p.lambda_hi * w.value();
  double inner = 2.0 * p.lambda_hi * std::pow(q.inner_cut, 2.0 - s) / (h * h);
  return outer + inner;
}

}  // namespace detail

inline double stable_dt(const ProblemSpec& prob, const SolverConfig& cfg,
                        const QuadratureScheme& q) {
  double c = detail::diagonal_coefficient(q, prob.params, cfg.h);
  double dt = cfg.cfl / c;
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw CflError("stable_dt: non-positive time step");
  return dt;
}

/// One explicit Euler step: u^{k+1} = u^k + dt (I u^k + f) on interior
/// nodes; exterior nodes refreshed from g at the new time. Appends the new
/// slice to the field.
inline void step_explicit(SpaceTimeField& f, const ProblemSpec& prob,
                          const QuadratureScheme& q, double dt,
                          const OperatorEvaluator* ev = nullptr) {
  std::size_t k = f.steps() - 1;
  double t = f.time(k);
  if (dt * detail::diagonal_coefficient(q, prob.params, f.grid.h) > 1.0)
    throw CflError("step_explicit: monotonicity coefficient negative");
  GridSlice slice(f, k);
  const GridMeta& g = f.grid;
  std::vector<double> next(g.n, 0.0);
  parallel_for(g.n, [&](std::size_t i) {
    double x = g.x(i);
    if (g.interior(i)) {
      double iu = ev ? (*ev)(slice, x) : evaluate_operator(slice, prob.op, x, q);
      next[i] = f.values[k][i] + dt * (iu + prob.rhs(x, t));
    } else {
      next[i] = prob.exterior(x, t + dt);
    }
  });
  for (double v : next)
    if (!std::isfinite(v))
      throw std::runtime_error("step_explicit: non-finite state");
  f.values.push_back(std::move(next));
}

namespace detail {

inline SpaceTimeField init_field(const ProblemSpec& prob,
                                 const SolverConfig& cfg) {
  SpaceTimeField f;
  f.grid = GridMeta::make(cfg.h, cfg.r_max);
  f.t_start = prob.t_start;
  f.exterior = prob.exterior;
  f.values.emplace_back(f.grid.n, 0.0);
  for (std::size_t i = 0; i < f.grid.n; ++i)
    f.values[0][i] = prob.exterior(f.grid.x(i), prob.t_start);
  return f;
}

inline double residual_at(const SpaceTimeField& f, const ProblemSpec& prob,
                          const QuadratureScheme& q, std::size_t k) {
  // Defect of the stored trajectory: compare the forward difference with
  // the operator re-evaluated on the old slice.
  GridSlice slice(f, k);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    if (!f.grid.interior(i)) continue;
    double x = f.grid.x(i);
    double lhs = (f.values[k + 1][i] - f.values[k][i]) / f.dt;
    double rhs = evaluate_operator(slice, prob.op, x, q) +
                 prob.rhs(x, f.time(k));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace detail

/// Marches the explicit scheme over (t_start, 0]. The residual report
/// re-evaluates the operator on a sampled subset of stored steps.
inline SpaceTimeField solve(const ProblemSpec& prob, const SolverConfig& cfg,
                            SolveReport* report = nullptr) {
  cfg.validate();
  QuadratureScheme q = QuadratureScheme::for_grid(cfg.h, cfg.outer_cut,
                                                  cfg.quad_ratio, cfg.quad_sub);
  double dt = stable_dt(prob, cfg, q);
  auto nsteps = static_cast<std::size_t>(std::ceil(-prob.t_start / dt));
  dt = -prob.t_start / static_cast<double>(nsteps);  // land exactly on t = 0

  SpaceTimeField f = detail::init_field(prob, cfg);
  f.dt = dt;
  OperatorEvaluator ev(prob.op, q);
  for (std::size_t k = 0; k < nsteps; ++k) step_explicit(f, prob, q, dt, &ev);

  if (report) {
    report->dt = dt;
    report->tail_bound = q.tail_bound(prob.params, prob.exterior.sup_norm);
    std::size_t stride = std::max<std::size_t>(1, nsteps / 16);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < f.steps(); k += stride)
      worst = std::max(worst, detail::residual_at(f, prob, q, k));
    report->residual_max = worst;
    double lip = detail::diagonal_coefficient(q, prob.params, cfg.h);
    report->residual_tol = 10.0 * dt * lip;
  }
  return f;
}

/// Picard iteration for the regularized problem: G maps u to the solution
/// of the linear problem v_t - Lv = f + F(u) with L the constant-lambda
/// kernel and F(u) = I_eps u - Lu frozen along the previous trajectory.
inline SpaceTimeField solve_regularized_fixedpoint(const ProblemSpec& prob,
                                                   const SolverConfig& cfg,
                                                   SolveReport* report = nullptr) {
  cfg.validate();
  QuadratureScheme q = QuadratureScheme::for_grid(cfg.h, cfg.outer_cut,
                                                  cfg.quad_ratio, cfg.quad_sub);
  double dt = stable_dt(prob, cfg, q);
  auto nsteps = static_cast<std::size_t>(std::ceil(-prob.t_start / dt));
  dt = -prob.t_start / static_cast<double>(nsteps);

  double lambda = prob.params.lambda_lo;
  KernelSpec base;
  base.params = prob.params;
  base.drift = 0.0;
  base.kernel = [lambda](double) { return lambda; };

  // Initial iterate: g on the complement, linear interpolation of g(+-1, t)
  // across the interior.
  SpaceTimeField prev = detail::init_field(prob, cfg);
  prev.dt = dt;
  prev.values.resize(nsteps + 1, std::vector<double>(prev.grid.n, 0.0));
  for (std::size_t k = 0; k <= nsteps; ++k) {
    double t = prev.time(k);
    double gl = prob.exterior(-1.0, t), gr = prob.exterior(1.0, t);
    for (std::size_t i = 0; i < prev.grid.n; ++i) {
      double x = prev.grid.x(i);
      prev.values[k][i] = prev.grid.interior(i)
                              ? 0.5 * (1.0 - x) * gl + 0.5 * (1.0 + x) * gr
                              : prob.exterior(x, t);
    }
  }
  if (prev.steps() > 0) prev.refresh_exterior(0);

  std::vector<double> gaps;
  for (int it = 0; it < cfg.max_iter; ++it) {
    // F(u_prev) along the stored trajectory.
    std::vector<std::vector<double>> fu(nsteps + 1,
                                        std::vector<double>(prev.grid.n, 0.0));
    parallel_for(nsteps + 1, [&](std::size_t k) {
      GridSlice slice(prev, k);
      for (std::size_t i = 0; i < prev.grid.n; ++i) {
        if (!prev.grid.interior(i)) continue;
        double x = prev.grid.x(i);
        double ieps =
            prob.op.variant == OperatorSpec::Variant::InfSup
                ? evaluate_mollified(slice, prob.op, cfg.eps, x, q)
                : evaluate_regularized(slice, prob.op.families[0][0], cfg.eps,
                                       x, q);
        fu[k][i] = ieps - evaluate_linear(slice, base, x, q);
      }
    });

    ProblemSpec lin = prob;
    lin.op = OperatorSpec::linear(base);
    SpaceTimeField* prev_ptr = &prev;
    auto rhs = prob.rhs;
    const std::vector<std::vector<double>>* fu_ptr = &fu;
    lin.rhs = [rhs, prev_ptr, fu_ptr](double x, double t) {
      std::size_t k = prev_ptr->time_index(t);
      const GridMeta& g = prev_ptr->grid;
      auto i = static_cast<std::size_t>(std::llround((x + g.r_max) / g.h));
      return rhs(x, t) + (*fu_ptr)[k][i];
    };

    OperatorEvaluator lin_ev(lin.op, q);
    SpaceTimeField next = detail::init_field(lin, cfg);
    next.dt = dt;
    for (std::size_t k = 0; k < nsteps; ++k)
      step_explicit(next, lin, q, dt, &lin_ev);

    double gap = 0.0;
    for (std::size_t k = 0; k <= nsteps; ++k)
      for (std::size_t i = 0; i < next.grid.n; ++i)
        gap = std::max(gap, std::abs(next.values[k][i] - prev.values[k][i]));
    gaps.push_back(gap);
    prev = std::move(next);
    if (gap <= cfg.fp_tol) {
      if (report) {
        report->dt = dt;
        report->fp_gaps = gaps;
        report->tail_bound = q.tail_bound(prob.params, prob.exterior.sup_norm);
      }
      return prev;
    }
  }
  throw FixedPointError("solve_regularized_fixedpoint: no convergence after " +
                            std::to_string(cfg.max_iter) + " iterations",
                        gaps);
}

}  // namespace nllab

#endif  // NLLAB_SOLVER_HPP
