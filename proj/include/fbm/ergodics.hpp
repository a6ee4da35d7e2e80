#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fbm/sde.hpp"

namespace fbm::ergodics {

// thinned long-run samples with a product histogram on [-box, box]^d;
// out-of-box samples are clamped into the edge cells so the histogram mass
// always equals the sample count
struct EmpiricalMeasure {
  int d = 1;
  double box = 0.0;
  int bins = 0;
  std::vector<double> sample_times;
  std::vector<double> samples;          // row-major (sample, component)
  std::vector<std::int64_t> histogram;  // bins^d cells, coordinate 0 slowest
  double stationarity_l1 = 0.0;         // first vs second half histogram distance
  // per unit window [t, t+1]: sup Euclid norm and Holder seminorm at
  // holder_exponent, increments capped at lag 1
  std::vector<double> window_starts;
  std::vector<double> window_sup;
  std::vector<double> window_holder;
  double holder_exponent = 0.0;

  std::size_t count() const { return sample_times.size(); }
  std::size_t cells() const { return histogram.size(); }
};

// single trajectory on [0, T_total] with the step size and dynamics of cfg;
// samples every `thinning` steps after burn_in; gamma < H is the window
// Holder exponent (gamma <= 0 selects 0.8 H); a blow-up aborts with the
// failure time in the message
EmpiricalMeasure long_run(const sde::SdeConfig& cfg, double T_total, double burn_in,
                          std::size_t thinning, rng::Stream& rs, double box = 4.0,
                          int bins = 64, double gamma = -1.0, double past_horizon = 0.0);

enum class MeasureDistance { histogram_l1, wasserstein1 };

// histogram_l1: total-mass-normalized L1 over cells (range [0, 2]);
// wasserstein1: max over coordinates of the quantile-coupling W1 of the
// stored samples
double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                        MeasureDistance kind);

struct TightnessTable {
  double gamma = 0.0;
  std::vector<double> kappas;
  std::vector<double> window_starts;
  std::vector<double> values;  // row-major (window, kappa), mean exp(kappa ||X||^2)
  std::vector<char> stable;    // per kappa: finite everywhere and max/min <= 2
  double kappa0 = 0.0;         // largest kappa whose grid prefix is all stable
};

// exponential square moments of the C^gamma norm over unit windows, batch
// means; the first burn_windows windows are dropped
TightnessTable tightness_report(std::span<const sde::SolutionPath> batch, double gamma,
                                std::span<const double> kappas, std::size_t burn_windows = 0);

struct CouplingReport {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> initial;        // per pair |x0_i - x0_j|
  std::vector<double> window_starts;  // unit windows
  std::vector<double> curves;         // row-major (pair, window), mean sup distance
  double median_ratio = 0.0;          // median of terminal / initial over pairs, paths
};

// evolves every x0 under each shared noise path and measures pairwise sup
// distances per unit window; pairs with zero initial separation are excluded
// from the median ratio
CouplingReport coupling_contraction(const sde::SdeConfig& cfg,
                                    std::span<const std::vector<double>> x0_list,
                                    std::span<const core::FbmPath> noise);

struct JacobianPath {
  TimeGrid grid;
  int d = 1;
  std::vector<double> jac;  // node-major d x d row-major blocks, jac_0 = I
  std::vector<double> inv;
  double max_identity_drift = 0.0;  // sup over nodes of max |J Jinv - I|

  std::span<const double> jac_at(std::size_t k) const;
  std::span<const double> inv_at(std::size_t k) const;
};

// forward and inverse linearizations along sol, one step per grid step:
// J_{k+1} = e^{dt U_k} (I + dt G_k) J_k with G = grad g_J, U = grad u frozen
// at X_k, and the inverse equation stepped with the inverse factors
JacobianPath jacobian_evolve(const sde::SolutionPath& sol, const besov::BesovDrift& drift,
                             const besov::DissipativeField& u);

// mean over the batch of (sup + Holder seminorm)^2 of the Frobenius matrix
// path on [t_start, t_start + 1]; raw conditional-moment statistic
double jacobian_holder_moment(std::span<const JacobianPath> batch, double exponent);

struct NoiseDerivative {
  SampledFunction by_ode;       // K_{k+1} = e^{dt U}(I + dt G) K_k + dv_k
  SampledFunction by_jacobian;  // J_k sum_{i<k} Jinv_{i+1} dv_i
  double max_rel_discrepancy = 0.0;
};

// directional noise derivative for direction path v with v(0) = 0, computed
// by both routes with the shared propagator factors
NoiseDerivative noise_derivative(const sde::SolutionPath& sol, const besov::BesovDrift& drift,
                                 const besov::DissipativeField& u, const SampledFunction& v);

struct GirsanovPath {
  SampledFunction h;         // c~ D^{H-1/2} of the running drift integral
  std::vector<double> hdot;  // row-major (step, component) forward differences
  double w12_norm2 = 0.0;    // int |hdot|^2 dt
  // per-step removal shift from the triangular solve of the moving-average
  // kernel system against the scheme's own drift path theta - theta_0; the
  // adapted discretization of hdot, so exp(-sum shift dB - ...) has mean 1
  std::vector<double> shift;
};

// drift-removal path for the solution's own drift b = g_J + u; requires
// H < 1/2; the constant 1 / (c_H Gamma(H + 1/2)) makes the H - 1/2 fractional
// integral of h recover int b(X) ds
GirsanovPath girsanov_drift(const sde::SolutionPath& sol, const besov::BesovDrift& drift,
                            const besov::DissipativeField& u);

// exp(-sum shift dB - (1/2) sum shift^2 dt) against the solution's driver
// increments; under this weight the solution's law is the driftless one
double girsanov_weight(const sde::SolutionPath& sol, const GirsanovPath& gp);

struct NovikovReport {
  std::vector<double> norms;        // per path ||h||^2_{W^{1,2}}
  std::vector<double> batch_means;  // per batch mean of exp(norm / 2)
  double statistic = 0.0;           // median of the batch means
  bool unstable = false;            // batch means spread beyond 2x
};

NovikovReport novikov_statistic(std::span<const sde::SolutionPath> batch,
                                const besov::BesovDrift& drift,
                                const besov::DissipativeField& u, int n_batches = 8);

}  // namespace fbm::ergodics
