#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fbm/grid.hpp"
#include "fbm/rng.hpp"

namespace fbm::core {

struct HurstParams {
  double H = 0.5;
  int d = 1;
  double c_H = 1.0;         // moving-average normalization making Var(W_1) = 1
  double c_tilde_H = 1.0;   // local-nondeterminism constant c_H^2 / (2H)
};

// numeric normalization: c_H = V_H^{-1/2} with
// V_H = 1/(2H) + int_0^inf ((1+r)^{H-1/2} - r^{H-1/2})^2 dr
double mvn_normalization(double H);

HurstParams make_hurst(double H, int d);

// scalar covariance factor (times identity): (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2
double fbm_covariance(double s, double t, const HurstParams& p);

// white-noise increments over the past mesh; intervals [nodes[i], nodes[i+1]],
// nodes ascending and ending at 0
struct PastDriver {
  std::vector<double> nodes;
  std::vector<double> db;  // row-major (interval, component)
  int d = 1;
  std::size_t n_intervals() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

struct FbmPath {
  HurstParams par;
  TimeGrid grid;
  std::vector<double> values;   // row-major (node, component)
  std::vector<double> driver;   // (step, component) increments of B, empty if absent
  PastDriver past_driver;       // empty if sampled without a past
  std::optional<PastPath> past; // sampled past segment when conditioning supplied one

  bool has_driver() const { return !driver.empty(); }
  double& at(std::size_t k, int c) { return values[k * static_cast<std::size_t>(par.d) + c]; }
  double at(std::size_t k, int c) const { return values[k * static_cast<std::size_t>(par.d) + c]; }
};

// dense-covariance Gaussian sampler; grids up to 8192 nodes
FbmPath sample_fbm_exact(const HurstParams& p, const TimeGrid& g, rng::Stream& rs);

// moving-average sampler: Riemann-Liouville part with exact per-step kernel
// variance on the freshest substep and midpoint kernels on older substeps,
// plus the past correction truncated at -past_horizon; grid must start at 0
FbmPath sample_fbm_mvn(const HurstParams& p, const TimeGrid& g, double past_horizon,
                       rng::Stream& rs);

// L2 size of the truncated tail beyond -past_horizon at time t
double mvn_tail_sd(const HurstParams& p, double t, double past_horizon);

// exact per-coordinate variance produced by the discretized scheme at grid
// time t (sum of squared kernel weights); deterministic truncation diagnostic
double mvn_scheme_variance(const HurstParams& p, const TimeGrid& g, double past_horizon,
                           double t);

struct CondMeanVar {
  std::vector<double> mean;
  double var = 0.0;  // per coordinate, analytic c_tilde_H |t-s|^{2H}
};

// conditional law of W_t given the driver up to grid node s (and the past);
// requires a path generated with its driver
CondMeanVar conditional_mean_var(const FbmPath& path, double s, double t);

// e^{-lambda tau} X_t + int_0^tau lambda e^{-lambda(tau-r)} (X_t - X_r) dr,
// trapezoidal in r, tau measured from the first grid node; equals the
// exponential-kernel stochastic integral when X starts at 0
std::vector<double> exp_kernel_integral(const SampledFunction& x, double lambda, double t);

// hybrid-rule kernel weights: kappa[j] multiplies the driver increment j steps
// back; kappa[1] carries the exact fresh-substep variance
std::vector<double> mvn_kernel_weights(double H, double dt, std::size_t n_steps);

// average of the past-correction kernel over [a,b] (a < b <= 0) at time t > 0
double mvn_past_weight(double H, double t, double a, double b);

}  // namespace fbm::core
