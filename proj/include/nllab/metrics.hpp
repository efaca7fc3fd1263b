#ifndef NLLAB_METRICS_HPP
#define NLLAB_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nllab/field.hpp"
#include "nllab/quadrature.hpp"

namespace nllab {

/// Q_r(x,t) = B_r(x) x (t - r^sigma, t].
struct ParabolicCylinder {
  double x = 0.0;
  double t = 0.0;
  double r = 1.0;

  double height(double sigma) const { return std::pow(r, sigma); }
  bool contains(double xx, double tt, double sigma) const {
    return std::abs(xx - x) < r && tt > t - height(sigma) - 1e-12 &&
           tt <= t + 1e-12;
  }
};

struct ReportRow {
  std::string kind;
  double exponent = 0.0;
  double scale = 0.0;
  double value = 0.0;
  double fit_residual = 0.0;
};

/// Seminorm values, fitted exponents, and decay tables from the audit suite.
struct RegularityReport {
  std::vector<ReportRow> rows;

  void add(std::string kind, double exponent, double scale, double value,
           double residual = 0.0) {
    rows.push_back({std::move(kind), exponent, scale, value, residual});
  }

  /// CSV rows: scenario,kind,exponent,scale,value,fit_residual
  std::string to_csv(const std::string& scenario) const {
    std::string out = "scenario,kind,exponent,scale,value,fit_residual\n";
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%.12g,%.12g,%.12g\n",
                    scenario.c_str(), r.kind.c_str(), r.exponent, r.scale,
                    r.value, r.fit_residual);
      out += buf;
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Time increments

/// delta_tau u(x,t) = u(x,t) - u(x,t-tau), tau snapped to a step multiple.
inline double delta_tau(const SpaceTimeField& f, double x, double t,
                        double tau) {
  std::size_t k = f.time_index(t);
  auto m = static_cast<long>(std::lround(tau / f.dt));
  if (m < 0 || static_cast<long>(k) - m < 0)
    throw std::out_of_range("delta_tau: t - tau outside stored window");
  GridSlice a(f, k), b(f, k - static_cast<std::size_t>(m));
  return a(x) - b(x);
}

/// Iterated increment delta^2_tau u = delta_tau(delta_tau u).
inline double delta2_tau(const SpaceTimeField& f, double x, double t,
                         double tau) {
  std::size_t k = f.time_index(t);
  auto m = static_cast<long>(std::lround(tau / f.dt));
  if (m < 0 || static_cast<long>(k) - 2 * m < 0)
    throw std::out_of_range("delta2_tau: t - 2 tau outside stored window");
  GridSlice a(f, k), b(f, k - static_cast<std::size_t>(m)),
      c(f, k - static_cast<std::size_t>(2 * m));
  return a(x) - 2.0 * b(x) + c(x);
}

// ---------------------------------------------------------------------------
// Norms

/// \int |u(y)| min(1, |y|^{-1-sigma}) dy with the same tail policy as the
/// operators: analytic evaluation out to `outer_cut`, a bound beyond.
inline double l1_sigma_norm(const Slice& u, double sigma,
                            double outer_cut = 100.0,
                            double* tail_bound = nullptr) {
  double core = integrate([&](double y) { return std::abs(u(y)); }, -1.0, 1.0,
                          1e-7);
  double pos = integrate_singular([&](double y) { return std::abs(u(y)); },
                                  1.0, outer_cut, sigma, 1e-7);
  double neg = integrate_singular([&](double y) { return std::abs(u(-y)); },
                                  1.0, outer_cut, sigma, 1e-7);
  double v = core + pos + neg;
  if (tail_bound) *tail_bound = 2.0 / sigma * std::pow(outer_cut, -sigma);
  if (!std::isfinite(v))
    throw std::runtime_error("l1_sigma_norm: non-finite tail");
  return v;
}

namespace detail {

struct CylinderPoints {
  std::vector<std::size_t> xs;  ///< node indices
  std::vector<std::size_t> ts;  ///< time indices
};

inline CylinderPoints cylinder_points(const SpaceTimeField& f,
                                      const ParabolicCylinder& Q,
                                      double sigma) {
  CylinderPoints p;
  for (std::size_t i = 0; i < f.grid.n; ++i)
    if (std::abs(f.grid.x(i) - Q.x) < Q.r) p.xs.push_back(i);
  for (std::size_t k = 0; k < f.steps(); ++k) {
    double t = f.time(k);
    if (t > Q.t - Q.height(sigma) - 1e-12 && t <= Q.t + 1e-12)
      p.ts.push_back(k);
  }
  if (p.xs.empty() || p.ts.empty())
    throw std::invalid_argument("cylinder contains no grid points");
  return p;
}

inline double parabolic_dist(double dx, double dt_, double sigma) {
  return std::abs(dx) + std::pow(std::abs(dt_), 1.0 / sigma);
}

}  // namespace detail

/// Parabolic Hoelder seminorm sup |u(p)-u(p')| / dist(p,p')^alpha over the
/// cylinder. Full pair enumeration when feasible, otherwise seeded
/// stratified sampling by dyadic distance so refinement studies compare.
inline double parabolic_holder_seminorm(const SpaceTimeField& f,
                                        const ParabolicCylinder& Q,
                                        double alpha, double sigma,
                                        std::size_t pair_budget = 50000) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("parabolic_holder_seminorm: alpha in (0,1]");
  auto pts = detail::cylinder_points(f, Q, sigma);
  std::size_t np = pts.xs.size() * pts.ts.size();
  double best = 0.0;
  auto quot = [&](std::size_t i1, std::size_t k1, std::size_t i2,
                  std::size_t k2) {
    if (i1 == i2 && k1 == k2) return;
    double d = detail::parabolic_dist(f.grid.x(i1) - f.grid.x(i2),
                                      f.time(k1) - f.time(k2), sigma);
    double num = std::abs(f.values[k1][i1] - f.values[k2][i2]);
    best = std::max(best, num / std::pow(d, alpha));
  };
  if (np * (np - 1) / 2 <= pair_budget) {
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = a + 1; b < np; ++b)
        quot(pts.xs[a % pts.xs.size()], pts.ts[a / pts.xs.size()],
             pts.xs[b % pts.xs.size()], pts.ts[b / pts.xs.size()]);
    return best;
  }
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_int_distribution<std::size_t> pick_x(0, pts.xs.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_t(0, pts.ts.size() - 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int strata = 14;
  std::size_t per = pair_budget / strata;
  double dmax = 2.0 * Q.r + std::pow(Q.height(sigma), 1.0 / sigma);
  for (int j = 0; j < strata; ++j) {
    double dj = dmax * std::pow(0.5, j);
    for (std::size_t m = 0; m < per; ++m) {
      std::size_t i1 = pts.xs[pick_x(rng)];
      std::size_t k1 = pts.ts[pick_t(rng)];
      double x2 = f.grid.x(i1) + unit(rng) * dj;
      double t2 = f.time(k1) - std::abs(unit(rng)) * std::pow(dj, sigma);
      auto i2 = static_cast<long>(std::lround((x2 + f.grid.r_max) / f.grid.h));
      auto k2 = static_cast<long>(std::lround((t2 - f.t_start) / f.dt));
      i2 = std::clamp<long>(i2, static_cast<long>(pts.xs.front()),
                            static_cast<long>(pts.xs.back()));
      k2 = std::clamp<long>(k2, static_cast<long>(pts.ts.front()),
                            static_cast<long>(pts.ts.back()));
      quot(i1, k1, static_cast<std::size_t>(i2), static_cast<std::size_t>(k2));
    }
  }
  return best;
}

/// Tail seminorm of exterior data: sup over the dyadic tau ladder of the
/// L^1_sigma-weighted time increment outside B_r.
inline double tail_seminorm(const ExteriorData& g, double r, double gamma,
                            double sigma, double t_lo, double t_hi,
                            double tau_floor, double outer_cut = 100.0) {
  if (!(r > 0.0)) throw std::invalid_argument("tail_seminorm: r <= 0");
  double best = 0.0;
  for (double tau = 0.5; tau >= tau_floor * (1.0 - 1e-12); tau *= 0.5) {
    int nt = 33;
    for (int j = 0; j < nt; ++j) {
      double t = t_lo + tau + (t_hi - (t_lo + tau)) * j / (nt - 1);
      if (t > t_hi || t - tau < t_lo) continue;
      auto inc = [&](double y) {
        return std::abs(g(y, t) - g(y, t - tau));
      };
      double mass = 0.0;
      if (r < 1.0)
        mass += integrate([&](double y) { return inc(y) + inc(-y); }, r, 1.0,
                          1e-7);
      double lo = std::max(r, 1.0);
      mass += integrate_singular([&](double y) { return inc(y); }, lo,
                                 outer_cut, sigma, 1e-7);
      mass += integrate_singular([&](double y) { return inc(-y); }, lo,
                                 outer_cut, sigma, 1e-7);
      if (!std::isfinite(mass))
        throw std::runtime_error("tail_seminorm: non-finite tail");
      best = std::max(best, mass / std::pow(tau, gamma / sigma));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Exponent fitting

struct ExponentFit {
  double exponent = 0.0;
  double residual = 0.0;  ///< max absolute deviation of the log-log fit
  bool degenerate = false;  ///< all-zero increments; exponent is +inf marker
};

/// Least-squares slope of log(sup) against log(tau). Degenerate input (all
/// sups zero) is flagged and reported as +inf.
inline ExponentFit fit_power_law(const std::vector<double>& taus,
                                 const std::vector<double>& sups) {
  ExponentFit out;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (sups[i] > 0.0) {
      lx.push_back(std::log(taus[i]));
      ly.push_back(std::log(sups[i]));
    }
  }
  if (lx.size() < 2) {
    out.degenerate = true;
    out.exponent = std::numeric_limits<double>::infinity();
    return out;
  }
  double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icept = (sy - slope * sx) / n;
  for (std::size_t i = 0; i < lx.size(); ++i)
    out.residual =
        std::max(out.residual, std::abs(ly[i] - (slope * lx[i] + icept)));
  out.exponent = slope;
  return out;
}

namespace detail {

/// Dyadic tau ladder snapped to step multiples, largest first, with the two
/// levels nearest the step dropped (they are discretization-noise
/// dominated).
inline std::vector<double> tau_ladder(double dt, double tau_max,
                                      int drop_near_dt = 2) {
  std::vector<double> taus;
  for (double tau = 0.5; tau >= dt * (1.0 - 1e-9); tau *= 0.5) {
    if (tau > tau_max + 1e-12) continue;
    double snapped = std::max(1.0, std::round(tau / dt)) * dt;
    if (taus.empty() || snapped < taus.back() * (1.0 - 1e-9))
      taus.push_back(snapped);
  }
  for (int d = 0; d < drop_near_dt && taus.size() > 5; ++d) taus.pop_back();
  return taus;
}

}  // namespace detail

/// Fits the time exponent of a stored series: slope of log sup_t |delta_tau|
/// versus log tau over the dyadic ladder restricted to the cylinder window.
inline ExponentFit fit_time_exponent_series(const std::vector<double>& u,
                                            double dt, std::size_t k_lo,
                                            std::size_t k_hi) {
  if (k_hi <= k_lo) throw std::invalid_argument("empty time window");
  double window = static_cast<double>(k_hi - k_lo) * dt;
  auto taus = detail::tau_ladder(dt, window);
  if (taus.size() < 5)
    throw std::invalid_argument("fit_time_exponent: fewer than 5 tau levels");
  std::vector<double> sups;
  for (double tau : taus) {
    auto m = static_cast<std::size_t>(std::lround(tau / dt));
    double sup = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      if (k < m) continue;
      sup = std::max(sup, std::abs(u[k] - u[k - m]));
    }
    sups.push_back(sup);
  }
  return fit_power_law(taus, sups);
}

inline ExponentFit fit_time_exponent(const SpaceTimeField& f, double x,
                                     const ParabolicCylinder& Q,
                                     double sigma) {
  auto i = static_cast<std::size_t>(
      std::lround((x + f.grid.r_max) / f.grid.h));
  std::vector<double> series(f.steps());
  for (std::size_t k = 0; k < f.steps(); ++k) series[k] = f.values[k][i];
  std::size_t k_hi = f.time_index(std::min(Q.t, f.time(f.steps() - 1)));
  double t_lo = std::max(Q.t - Q.height(sigma), f.t_start);
  std::size_t k_lo = f.time_index(t_lo + (t_lo > f.t_start ? 0.0 : 0.0));
  return fit_time_exponent_series(series, f.dt, k_lo, k_hi);
}

/// Discrete time derivative of a trajectory at one node (forward
/// differences; last step one-sided backward).
inline std::vector<double> time_derivative_series(const SpaceTimeField& f,
                                                  double x) {
  auto i = static_cast<std::size_t>(
      std::lround((x + f.grid.r_max) / f.grid.h));
  std::vector<double> ut(f.steps());
  for (std::size_t k = 0; k + 1 < f.steps(); ++k)
    ut[k] = (f.values[k + 1][i] - f.values[k][i]) / f.dt;
  if (f.steps() >= 2) ut[f.steps() - 1] = ut[f.steps() - 2];
  return ut;
}

// ---------------------------------------------------------------------------
// Oscillation decay audit

struct DecayTable {
  std::vector<double> scales;  ///< mu^i
  std::vector<double> values;  ///< A_i
  double rate = 0.0;           ///< fitted alpha-hat
  double residual = 0.0;
};

/// Measures A_i = sup_tau [delta_tau u / tau^beta]_{C^{0,eps}(Q_{mu^i})}
/// across nested cylinders and fits the geometric decay rate.
inline DecayTable oscillation_decay_audit(const SpaceTimeField& f, double beta,
                                          double eps_h, double mu,
                                          double x0, double t0, double sigma,
                                          double r0 = 0.5) {
  if (!(mu > 0.0 && mu < 1.0))
    throw std::invalid_argument("oscillation_decay_audit: mu in (0,1)");
  DecayTable table;
  for (int i = 0;; ++i) {
    double r = r0 * std::pow(mu, i);
    if (r < 2.0 * f.grid.h || std::pow(r, sigma) < 8.0 * f.dt) break;
    ParabolicCylinder Q{x0, t0, r};
    auto taus = detail::tau_ladder(f.dt, 0.5, 0);
    if (taus.size() > 6) taus.resize(6);
    double a_i = 0.0;
    for (double tau : taus) {
      auto m = static_cast<std::size_t>(std::lround(tau / f.dt));
      // Derived field delta_tau u / tau^beta restricted to times >= tau.
      SpaceTimeField d;
      d.grid = f.grid;
      d.t_start = f.t_start + static_cast<double>(m) * f.dt;
      d.dt = f.dt;
      d.exterior = f.exterior;
      double norm = std::pow(tau, beta);
      for (std::size_t k = m; k < f.steps(); ++k) {
        std::vector<double> slice(f.grid.n);
        for (std::size_t j = 0; j < f.grid.n; ++j)
          slice[j] = (f.values[k][j] - f.values[k - m][j]) / norm;
        d.values.push_back(std::move(slice));
      }
      if (d.values.empty()) continue;
      try {
        a_i = std::max(a_i, parabolic_holder_seminorm(d, Q, eps_h, sigma));
      } catch (const std::invalid_argument&) {
        // cylinder fell outside the derived window at this tau
      }
    }
    table.scales.push_back(r);
    table.values.push_back(a_i);
  }
  if (table.scales.size() < 3)
    throw std::invalid_argument(
        "oscillation_decay_audit: fewer than 3 usable scales");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < table.values.size(); ++i)
    if (table.values[i] > 0.0) {
      xs.push_back(std::pow(mu, static_cast<double>(i)));
      ys.push_back(table.values[i]);
    }
  auto fit = fit_power_law(xs, ys);
  table.rate = fit.degenerate ? 0.0 : fit.exponent;
  table.residual = fit.residual;
  return table;
}

// ---------------------------------------------------------------------------
// Truncation / rescaling device

/// Quintic-smoothstep cutoff: 1 on B_2, 0 outside B_4, C^2 in between.
inline double cutoff_eta(double x) {
  double a = std::abs(x);
  if (a <= 2.0) return 1.0;
  if (a >= 4.0) return 0.0;
  double s = (a - 2.0) / 2.0;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

/// v(x,t) = eta(x) u(x/scale, t/scale^sigma) with the exterior closure set
/// to zero outside supp eta.
inline SpaceTimeField truncate_rescale(const SpaceTimeField& f, double sigma,
                                       double scale = 16.0) {
  if (f.grid.r_max < 4.0)
    throw std::invalid_argument("truncate_rescale: grid must cover B_4");
  if (f.steps() < 8)
    throw std::invalid_argument("truncate_rescale: scale underflows grid resolution");
  SpaceTimeField out;
  out.grid = f.grid;
  out.t_start = f.t_start;
  out.dt = f.dt;
  out.exterior = ExteriorData{[](double, double) { return 0.0; }, 0.0};
  double tscale = std::pow(scale, sigma);
  for (std::size_t k = 0; k < f.steps(); ++k) {
    double t_in = out.time(k) / tscale;
    // linear interpolation in time between stored slices
    double r = (t_in - f.t_start) / f.dt;
    auto k0 = static_cast<std::size_t>(std::clamp(
        r, 0.0, static_cast<double>(f.steps() - 1)));
    std::size_t k1 = std::min(k0 + 1, f.steps() - 1);
    double w = std::clamp(r - static_cast<double>(k0), 0.0, 1.0);
    GridSlice s0(f, k0), s1(f, k1);
    std::vector<double> slice(f.grid.n);
    for (std::size_t i = 0; i < f.grid.n; ++i) {
      double x = f.grid.x(i);
      double eta = cutoff_eta(x);
      slice[i] = eta == 0.0 ? 0.0
                            : eta * ((1.0 - w) * s0(x / scale) +
                                     w * s1(x / scale));
    }
    out.values.push_back(std::move(slice));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Appendix lemma verifiers

struct MaxPrincipleResult {
  bool hypothesis = false;
  bool conclusion = false;
  bool holds = false;  ///< implication status
  double endpoint_dev = 0.0;
  double sup_d2 = 0.0;
  double sup_u = 0.0;
};

/// Endpoint-pinned samples on [-1,0] with all second increments bounded by
/// one must themselves be bounded by one.
inline MaxPrincipleResult verify_max_principle_lemma(
    const std::vector<double>& u, double tol = 1e-9) {
  if (u.size() < 3)
    throw std::invalid_argument("verify_max_principle_lemma: too few samples");
  MaxPrincipleResult r;
  std::size_t n = u.size() - 1;  // t_k = -1 + k/n
  r.endpoint_dev = std::max(std::abs(u.front()), std::abs(u.back()));
  for (std::size_t m = 1; 2 * m <= n; ++m)
    for (std::size_t k = 2 * m; k <= n; ++k)
      r.sup_d2 = std::max(r.sup_d2,
                          std::abs(u[k] - 2.0 * u[k - m] + u[k - 2 * m]));
  for (double v : u) r.sup_u = std::max(r.sup_u, std::abs(v));
  r.hypothesis = r.endpoint_dev <= tol && r.sup_d2 <= 1.0 + tol;
  r.conclusion = r.sup_u <= 1.0 + tol;
  r.holds = !r.hypothesis || r.conclusion;
  return r;
}

struct InterpolationReport {
  std::string regime;  ///< "small-tau" (a+b<1) or "derivative" (a+b>1)
  double lhs = 0.0;
  double rhs = 0.0;
  double c_hat = 0.0;  ///< empirical constant LHS/RHS
};

namespace detail {

inline double holder_star_seminorm(const std::vector<double>& v, double dt,
                                   double alpha) {
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, std::abs(v[i] - v[j]) /
                                std::pow(dt * static_cast<double>(j - i), alpha));
  return best;
}

}  // namespace detail

/// Interpolation inequalities on the dyadic ladder. The constants in such
/// bounds are existential, so the testable statement is stability of the
/// measured ratio under time refinement.
inline InterpolationReport verify_interpolation_bounds(
    const std::vector<double>& u, double alpha, double beta) {
  if (u.size() < 9)
    throw std::invalid_argument("verify_interpolation_bounds: too few samples");
  double ab = alpha + beta;
  if (std::abs(ab - 1.0) < 1e-9)
    throw std::invalid_argument("verify_interpolation_bounds: alpha+beta == 1");
  InterpolationReport rep;
  std::size_t n = u.size() - 1;
  double dt = 1.0 / static_cast<double>(n);
  if (ab < 1.0) {
    rep.regime = "small-tau";
    // sup_{tau < taubar} |delta_tau u(0)| / tau^{a+b}
    // <= |delta_taubar u(0)| / taubar^{a+b} + C sup_tau [delta_tau u / tau^b]
    std::size_t mbar = n / 2;  // taubar = 1/2
    double lhs = 0.0;
    for (std::size_t m = 1; m < mbar; ++m)
      lhs = std::max(lhs, std::abs(u[n] - u[n - m]) /
                              std::pow(dt * static_cast<double>(m), ab));
    double anchor =
        std::abs(u[n] - u[n - mbar]) / std::pow(dt * static_cast<double>(mbar), ab);
    double semi = 0.0;
    for (std::size_t m = 1; 2 * m <= n; m *= 2) {
      std::vector<double> d(n + 1 - m);
      for (std::size_t k = m; k <= n; ++k)
        d[k - m] = (u[k] - u[k - m]) / std::pow(dt * static_cast<double>(m), beta);
      semi = std::max(semi, detail::holder_star_seminorm(d, dt, alpha));
    }
    rep.lhs = lhs;
    rep.rhs = anchor + semi;
  } else {
    rep.regime = "derivative";
    // osc u + sup |delta^2_tau u| / tau^{a+b} controls the C^{0,a+b-1}
    // norm of u_t.
    double lo = u[0], hi = u[0];
    for (double v : u) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double d2 = 0.0;
    for (std::size_t m = 1; 2 * m <= n; ++m)
      for (std::size_t k = 2 * m; k <= n; ++k)
        d2 = std::max(d2, std::abs(u[k] - 2.0 * u[k - m] + u[k - 2 * m]) /
                              std::pow(dt * static_cast<double>(m), ab));
    std::vector<double> ut(n);
    for (std::size_t k = 0; k < n; ++k) ut[k] = (u[k + 1] - u[k]) / dt;
    double sup_ut = 0.0;
    for (double v : ut) sup_ut = std::max(sup_ut, std::abs(v));
    rep.lhs = sup_ut + detail::holder_star_seminorm(ut, dt, ab - 1.0);
    rep.rhs = (hi - lo) + d2;
  }
  rep.c_hat = rep.rhs > 0.0 ? rep.lhs / rep.rhs
                            : (rep.lhs > 0.0
                                   ? std::numeric_limits<double>::infinity()
                                   : 0.0);
  return rep;
}

}  // namespace nllab

#endif  // NLLAB_METRICS_HPP
