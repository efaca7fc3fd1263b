#ifndef NLLAB_FIELD_HPP
#define NLLAB_FIELD_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace nllab {

/// Analytically evaluable complement data g(y, t). `sup_norm` bounds |g| and
/// is used for the reported tail-truncation interval.
struct ExteriorData {
  std::function<double(double, double)> g;
  double sup_norm = 1.0;

  double operator()(double y, double t) const { return g(y, t); }
};

/// A function of space at one frozen time, evaluable on the whole line.
/// Operators only see this interface; discrete fields and analytic test
/// profiles both implement it.
class Slice {
 public:
  virtual ~Slice() = default;
  virtual double operator()(double x) const = 0;
  /// Finite-difference step used for Du / D2u.
  virtual double step() const = 0;

  virtual double du(double x) const {
    double h = step();
    return ((*this)(x + h) - (*this)(x - h)) / (2.0 * h);
  }
  virtual double d2u(double x) const {
    double h = step();
    return ((*this)(x + h) - 2.0 * (*this)(x) + (*this)(x - h)) / (h * h);
  }
};

/// Wraps a closure as a Slice; used by tests and by derived fields.
class AnalyticSlice final : public Slice {
 public:
  AnalyticSlice(std::function<double(double)> f, double fd_step = 1e-3)
      : f_(std::move(f)), h_(fd_step) {}
  double operator()(double x) const override { return f_(x); }
  double step() const override { return h_; }

 private:
  std::function<double(double)> f_;
  double h_;
};

struct GridMeta {
  double h = 0.01;
  double r_max = 4.0;
  std::size_t n = 0;  ///< node count; x_i = -r_max + i h

  static GridMeta make(double h, double r_max) {
    if (!(h > 0.0 && r_max >= 2.0))
      throw std::invalid_argument("GridMeta: need h > 0 and r_max >= 2");
    GridMeta g;
    g.h = h;
    g.r_max = r_max;
    g.n = static_cast<std::size_t>(std::llround(2.0 * r_max / h)) + 1;
    return g;
  }
  double x(std::size_t i) const { return -r_max + static_cast<double>(i) * h; }
  bool interior(std::size_t i) const { return std::abs(x(i)) < 1.0 - 1e-12; }
};

/// Interior grid values of u plus the exterior-data closure. Values on
/// non-interior nodes mirror the exterior data at each stored time.
class SpaceTimeField {
 public:
  GridMeta grid;
  double t_start = -1.0;
  double dt = 0.0;
  std::vector<std::vector<double>> values;  ///< values[k][i] = u(x_i, t_k)
  ExteriorData exterior;

  std::size_t steps() const { return values.size(); }
  double time(std::size_t k) const {
    return t_start + static_cast<double>(k) * dt;
  }
  /// Index of the stored time nearest t (times are uniform).
  std::size_t time_index(double t) const {
    if (values.empty()) throw std::out_of_range("field has no stored times");
    double r = (t - t_start) / dt;
    long k = std::lround(r);
    if (k < 0 || static_cast<std::size_t>(k) >= values.size())
      throw std::out_of_range("time outside stored window");
    return static_cast<std::size_t>(k);
  }

  /// Fills one slice from the exterior closure on all non-interior nodes.
  void refresh_exterior(std::size_t k) {
    auto& v = values[k];
    double t = time(k);
    for (std::size_t i = 0; i < grid.n; ++i)
      if (!grid.interior(i)) v[i] = exterior(grid.x(i), t);
  }

  bool finite() const {
    for (const auto& v : values)
      for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
  }
};

/// Discrete field at one stored time: linear interpolation between nodes,
/// exterior closure beyond the grid, one-sided 2nd-order Du at the two
/// interior nodes adjacent to the boundary of (-1,1).
class GridSlice final : public Slice {
 public:
  GridSlice(const SpaceTimeField& f, std::size_t k)
      : f_(&f), k_(k), t_(f.time(k)) {}

  double operator()(double x) const override {
    const GridMeta& g = f_->grid;
    if (std::abs(x) >= g.r_max) return f_->exterior(x, t_);
    double r = (x + g.r_max) / g.h;
    auto i = static_cast<std::size_t>(r);
    if (i + 1 >= g.n) return f_->values[k_][g.n - 1];
    double w = r - static_cast<double>(i);
    const auto& v = f_->values[k_];
    return (1.0 - w) * v[i] + w * v[i + 1];
  }

  double step() const override { return f_->grid.h; }

  double du(double x) const override {
    const GridMeta& g = f_->grid;
    long i = node_at(x);
    if (i < 0) return Slice::du(x);
    const auto& v = f_->values[k_];
    auto ui = [&](long j) { return v[static_cast<std::size_t>(j)]; };
    // One-sided second-order stencils at the interior nodes next to +-1.
    double xl = g.x(static_cast<std::size_t>(i));
    if (g.interior(static_cast<std::size_t>(i))) {
      if (xl - g.h <= -1.0 + 1e-12 && i + 2 < static_cast<long>(g.n))
        return (-3.0 * ui(i) + 4.0 * ui(i + 1) - ui(i + 2)) / (2.0 * g.h);
      if (xl + g.h >= 1.0 - 1e-12 && i - 2 >= 0)
        return (3.0 * ui(i) - 4.0 * ui(i - 1) + ui(i - 2)) / (2.0 * g.h);
    }
    if (i - 1 < 0 || i + 1 >= static_cast<long>(g.n)) return Slice::du(x);
    return (ui(i + 1) - ui(i - 1)) / (2.0 * g.h);
  }

  double d2u(double x) const override {
    const GridMeta& g = f_->grid;
    long i = node_at(x);
    if (i < 1 || i + 1 >= static_cast<long>(g.n)) return Slice::d2u(x);
    const auto& v = f_->values[k_];
    return (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (g.h * g.h);
  }

  double time() const { return t_; }

 private:
  long node_at(double x) const {
    const GridMeta& g = f_->grid;
    double r = (x + g.r_max) / g.h;
    long i = std::lround(r);
    if (i < 0 || i >= static_cast<long>(g.n)) return -1;
    if (std::abs(r - static_cast<double>(i)) > 1e-9) return -1;
    return i;
  }

  const SpaceTimeField* f_;
  std::size_t k_;
  double t_;
};

}  // namespace nllab

#endif  // NLLAB_FIELD_HPP
