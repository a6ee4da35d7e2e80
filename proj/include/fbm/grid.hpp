#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fbm {

struct TimeGrid {
  double t_start = 0.0;
  double dt = 1.0;
  std::size_t n_steps = 1;

  TimeGrid() = default;
  TimeGrid(double t0, double step, std::size_t n) : t_start(t0), dt(step), n_steps(n) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  }

  std::size_t n_nodes() const { return n_steps + 1; }
  double node(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
  double t_end() const { return node(n_steps); }
  double length() const { return static_cast<double>(n_steps) * dt; }

  bool same_as(const TimeGrid& o, double tol = 1e-12) const {
    return n_steps == o.n_steps && std::abs(t_start - o.t_start) <= tol &&
           std::abs(dt - o.dt) <= tol;
  }

  // nearest node index; throws if t is not a node up to tol*dt
  std::size_t index_of(double t, double tol = 1e-9) const {
    double x = (t - t_start) / dt;
    double r = std::round(x);
    if (r < 0.0 || r > static_cast<double>(n_steps) || std::abs(x - r) > tol)
      throw std::invalid_argument("TimeGrid: time is not a grid node");
    return static_cast<std::size_t>(r);
  }
};

// vector-valued function sampled on a uniform grid, row-major (node, component)
struct SampledFunction {
  TimeGrid grid;
  int d = 1;
  std::vector<double> values;
  bool zero_at_origin = false;

  SampledFunction() = default;
  SampledFunction(const TimeGrid& g, int dim, bool zero0 = false)
      : grid(g), d(dim), values(g.n_nodes() * static_cast<std::size_t>(dim), 0.0),
        zero_at_origin(zero0) {
    if (d < 1) throw std::invalid_argument("SampledFunction: d must be >= 1");
  }

  double& at(std::size_t k, int c) { return values[k * static_cast<std::size_t>(d) + c]; }
  double at(std::size_t k, int c) const { return values[k * static_cast<std::size_t>(d) + c]; }
  std::span<double> node_view(std::size_t k) {
    return {values.data() + k * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
  std::span<const double> node_view(std::size_t k) const {
    return {values.data() + k * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }

  void check() const {
    if (values.size() != grid.n_nodes() * static_cast<std::size_t>(d))
      throw std::invalid_argument("SampledFunction: size mismatch");
    if (zero_at_origin)
      for (int c = 0; c < d; ++c)
        if (at(0, c) != 0.0)
          throw std::invalid_argument("SampledFunction: zero_at_origin violated");
  }
};

// vector-valued path on explicit (possibly non-uniform) strictly increasing times
struct Curve {
  std::vector<double> t;
  int d = 1;
  std::vector<double> v;  // row-major (node, component)

  std::size_t n_nodes() const { return t.size(); }
  double& at(std::size_t k, int c) { return v[k * static_cast<std::size_t>(d) + c]; }
  double at(std::size_t k, int c) const { return v[k * static_cast<std::size_t>(d) + c]; }

  void check() const {
    if (t.size() < 1) throw std::invalid_argument("Curve: empty");
    if (v.size() != t.size() * static_cast<std::size_t>(d))
      throw std::invalid_argument("Curve: size mismatch");
    for (std::size_t k = 1; k < t.size(); ++k)
      if (!(t[k] > t[k - 1])) throw std::invalid_argument("Curve: times not increasing");
  }

  // linear interpolation, clamped at the ends
  void value_at(double time, double* out) const {
    if (time <= t.front()) {
      for (int c = 0; c < d; ++c) out[c] = at(0, c);
      return;
    }
    if (time >= t.back()) {
      for (int c = 0; c < d; ++c) out[c] = at(t.size() - 1, c);
      return;
    }
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (t[mid] <= time ? lo : hi) = mid;
    }
    double u = (time - t[lo]) / (t[hi] - t[lo]);
    for (int c = 0; c < d; ++c) out[c] = (1.0 - u) * at(lo, c) + u * at(hi, c);
  }
};

// past noise path on R_-: nodes ascending, last node 0, w(0) = 0
struct PastPath {
  std::vector<double> t;
  int d = 1;
  std::vector<double> v;

  std::size_t n_nodes() const { return t.size(); }
  double extent() const { return -t.front(); }
  double& at(std::size_t k, int c) { return v[k * static_cast<std::size_t>(d) + c]; }
  double at(std::size_t k, int c) const { return v[k * static_cast<std::size_t>(d) + c]; }

  void check() const {
    if (t.size() < 2) throw std::invalid_argument("PastPath: needs >= 2 nodes");
    if (v.size() != t.size() * static_cast<std::size_t>(d))
      throw std::invalid_argument("PastPath: size mismatch");
    for (std::size_t k = 1; k < t.size(); ++k)
      if (!(t[k] > t[k - 1])) throw std::invalid_argument("PastPath: times not increasing");
    if (std::abs(t.back()) > 1e-12) throw std::invalid_argument("PastPath: last node must be 0");
    for (int c = 0; c < d; ++c)
      if (std::abs(at(t.size() - 1, c)) > 1e-12)
        throw std::invalid_argument("PastPath: w(0) must be 0");
  }

  // linear interpolation at time s in [t.front(), 0]; zero outside on the right
  void value_at(double s, double* out) const {
    if (s >= t.back()) {
      for (int c = 0; c < d; ++c) out[c] = at(t.size() - 1, c);
      return;
    }
    if (s <= t.front()) {
      for (int c = 0; c < d; ++c) out[c] = at(0, c);
      return;
    }
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      (t[mid] <= s ? lo : hi) = mid;
    }
    double u = (s - t[lo]) / (t[hi] - t[lo]);
    for (int c = 0; c < d; ++c) out[c] = (1.0 - u) * at(lo, c) + u * at(hi, c);
  }
};

}  // namespace fbm
