#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fbm/besov.hpp"
#include "fbm/core.hpp"
#include "fbm/grid.hpp"

namespace fbm::sewing {

// two-parameter germ A(s,t) with claimed decay exponents for diagnostics
struct Germ {
  int d = 1;
  std::function<void(double s, double t, double* out)> eval;
  std::vector<double> exponents;
};

struct SewingResult {
  int d = 1;
  std::vector<double> nodes;       // finest dyadic partition of [s,t]
  std::vector<double> values;      // running limit approximation, row-major per node
  std::vector<double> limit;      // full-interval value at the deepest level
  std::vector<double> increments;  // ||A^k - A^{k-1}||, k = 1..levels
  double rate = 0.0;               // fitted c in increments ~ 2^{-c k}
  double r2 = 0.0;
  bool exact = false;              // every ladder increment at the noise floor
};

// dyadic Riemann sums A^k with midpoint refinement; rate fitted by least
// squares over the last ceil(levels/2) ladder entries
SewingResult sew(const Germ& germ, double s, double t, int levels);

// field evaluable under heat smoothing of a given kernel variance
struct SmoothedField {
  int d = 1;
  std::function<void(const double* x, double t_heat, double* out)> value;
};

SmoothedField constant_field(std::vector<double> c);
SmoothedField drift_field(besov::BesovDrift g);

// integral over [s,t] of (G_{c_tilde (r-s)^{2H}} g)(phi_s + mean_curve(r)),
// adaptive Simpson to 1e-9; the germ of the averaged drift increment
std::vector<double> averaged_field(const SmoothedField& g, std::span<const double> phi_s,
                                   const Curve& mean_curve, const core::HurstParams& par,
                                   double s, double t);

struct DecayRow {
  double v = 0.0;
  double local_sum = 0.0;     // ladder increments above the cut level
  double global_bound = 0.0;  // triangle bound through the cut-level partition
  double total = 0.0;
};

struct DecayReport {
  double lambda = 0.0;
  std::vector<DecayRow> rows;  // per V, sup over the horizon family
  double best_v = 0.0;         // V minimizing the total bound
};

// evaluates the cut-level decomposition on windows [T-1, T]: the fine-scale
// ladder sum above level floor(log2|t-s|)+V against the coarse triangle bound
DecayReport decay_sew(const std::function<Germ(double)>& family, std::span<const double> horizons,
                      double lambda, std::span<const double> v_grid, int extra_levels);

// empirically calibrated constant for gronwall_bound; see calibrate_gronwall_mu
inline constexpr double kGronwallMu = 1.8;

// exp(mu (1 v |T-S|) ((2C1)^{1/(a1-eta)} + (2C2)^{1/a2})) (|rho_S| + 2C3 (1 ^ |T-S|^{a3}))
double gronwall_bound(double c1, double c2, double c3, double alpha1, double alpha2, double alpha3,
                      double eta, double s, double t, double rho_s_norm, double mu = kGronwallMu);

struct GronwallHypothesis {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double alpha1 = 1.5, alpha2 = 0.5, alpha3 = 1.0, eta = 0.75;
};

struct GronwallCheck {
  bool hypothesis_ok = false;
  double viol_s = 0.0, viol_t = 0.0;  // first violating pair when hypothesis fails
  double viol_ratio = 0.0;            // increment / hypothesis right side at that pair
  double lhs = 0.0;                   // sup norm + eta-Holder seminorm of rho
  double bound = 0.0;
  bool pass = false;
};

// verifies the increment hypothesis on all node pairs, then the closed bound
GronwallCheck check_gronwall(const SampledFunction& rho, const GronwallHypothesis& hyp,
                             double mu = kGronwallMu);

// synthetic saturating path for calibration and validation, deterministic in seed
struct GronwallSample {
  SampledFunction rho;
  GronwallHypothesis hyp;
};
GronwallSample make_gronwall_sample(std::uint64_t seed);

// smallest mu with zero failures over a seeded family of saturating paths
double calibrate_gronwall_mu(std::uint64_t seed, int n_paths);

}  // namespace fbm::sewing
