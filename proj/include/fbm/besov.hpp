#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fbm/rng.hpp"

namespace fbm::besov {

// lacunary cosine series g_c(x) = sum_j a_j cos(2^j <e_j, x> + phi_{j,c}),
// a_j = A 2^{-alpha j}, e_j cycling through the coordinate basis; the dyadic
// block norms are exact, which keeps rate tests sharp
struct BesovDrift {
  double alpha = 0.0;
  int J = 0;
  double A = 1.0;
  int d = 1;
  std::uint64_t seed = 0;
  std::vector<double> amps;    // per level, length J+1
  std::vector<double> phases;  // row-major (level, output coordinate)

  int direction(int j) const { return j % d; }
  double freq(int j) const { return std::ldexp(1.0, j); }

  // g heat-smoothed with kernel variance t (t = 0 evaluates g itself)
  void value(const double* x, double t, double* out) const;
  // Jacobian, row-major (output c, input k)
  void gradient(const double* x, double t, double* out) const;
  // sum of damped mode amplitudes, an upper bound for sup |G_t g|
  double mode_sup(double t) const;
};

BesovDrift make_lacunary_drift(double alpha, int J, double A, int d, std::uint64_t seed);

// field with every mode damped by exp(-t 4^j / 2); evaluating it at time 0
// reproduces value(x, t) bitwise
BesovDrift heat_mollify(const BesovDrift& g, double t);

// Gaussian Fourier multiplier at frequency k and kernel variance t
double heat_damp(double k, double t);

// exact dyadic block norm sup_j 2^{alpha' j} (block sup)
double block_norm(const BesovDrift& g, double alpha_prime);

// block norm of a - b for two drifts from the same family (equal alpha, A, d,
// seed); the survivors are the levels present in exactly one of the two
double block_norm_difference(const BesovDrift& a, const BesovDrift& b, double alpha_prime);

// thermic-characterization estimate sup_{t in [t_lo,t_hi]} t^{-alpha/2} sup_x |G_t g|
// with the x-sup taken over dense per-direction 1-d grids
double besov_norm_estimate(const BesovDrift& g, double alpha, double t_lo, double t_hi);

// sup_x of the Jacobian max-row-norm of G_t g, same search strategy
double gradient_sup_estimate(const BesovDrift& g, double t);

enum class ScalingLabel { supercritical, critical, subcritical };
enum class StrengthLabel { none, weak, strong };

struct RegimeLabel {
  ScalingLabel scaling;
  StrengthLabel strength;
};

// scaling label from alpha vs 1 - 1/H; strength: strong if alpha > 1 - 1/(2H),
// else weak if alpha > 1/2 - 1/(2H), else none
RegimeLabel classify_regime(double alpha, double H);

std::string to_string(ScalingLabel s);
std::string to_string(StrengthLabel s);

// u(x) = lin_coeff x + pert_amp sin(pert_freq x) componentwise
struct DissipativeField {
  double lambda = 0.0;  // claimed dissipation rate
  double lin_coeff = 0.0;
  double pert_amp = 0.0;
  double pert_freq = 0.0;
  int d = 1;

  void value(const double* x, double* out) const;
  double lipschitz_pert() const;
};

DissipativeField make_dissipative(double lambda, int d, double pert_amp = 0.0,
                                  double pert_freq = 0.0);

struct ConfiningReport {
  bool pass = false;
  // max over sampled pairs of <u(x)-u(y), x-y>/|x-y|^2; must stay below
  // -(lambda - lip_pert)
  double worst_monotone = 0.0;
  double monotone_threshold = 0.0;
  // max over sampled pairs of |u(x)-u(y)|/|x-y|; must stay below lambda + lip_pert
  double worst_gradient = 0.0;
  double gradient_threshold = 0.0;
  std::vector<double> witness_x, witness_y;  // populated on failure
};

ConfiningReport check_confining(const DissipativeField& u, std::size_t sample_count, double box,
                                rng::Stream& rs);

}  // namespace fbm::besov
