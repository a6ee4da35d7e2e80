#pragma once

#include "fbm/core.hpp"
#include "fbm/grid.hpp"
#include "fbm/rng.hpp"

namespace fbm::cond {

// weights of the past-path norm sup |w_t - w_s| / (|t-s|^gamma (1+|t|+|s|)^delta)
struct NoiseNormParams {
  double gamma = 0.0;
  double delta = 0.0;
};

// midpoint-ish defaults inside the admissible ranges gamma in (0,H),
// delta in (H-gamma, 1-gamma)
NoiseNormParams default_noise_params(double H);
void validate_noise_params(double H, const NoiseNormParams& p);

double wminus_norm(const PastPath& w, const NoiseNormParams& p);

// prediction kernel x^{H+1/2} / (1+x); the u-integral in its textbook form
// collapses to an incomplete-Beta identity, so no quadrature is needed
double kernel_f(double x, double H);

// same kernel evaluated by adaptive quadrature of the defining u-integral
// (direct form for x >= 1, cancellation-free rewrite below); oracle route
double kernel_f_quadrature(double x, double H);

// overall operator prefactor cos(pi H)/pi = 1/(Gamma(H+1/2) Gamma(1/2-H));
// vanishes at H = 1/2
double conditioning_prefactor(double H);

// companion constant in the factorization (H-1/2) c_H c_{1-H} of the
// prefactor; fixed by requiring the operator to equal the exact conditional
// mean (Gaussian-regression oracle), giving -1/(Gamma(H+1/2) Gamma(3/2-H) c_H)
double c_one_minus_h(double H);

struct ApplyAResult {
  SampledFunction path;     // (A w)_t on the output grid
  double tail_bound = 0.0;  // analytic bound on the part of the r-integral beyond the past extent
  double norm_gamma_delta = 0.0;
};

// conditional-mean operator (A w)_t = pref * int_0^inf r^{-1} f(t/r) w_{-r} dr
// on a log-spaced r-mesh over [dt*1e-3, extent]; H = 1/2 yields the zero path
ApplyAResult apply_A(const PastPath& w, double H, const TimeGrid& out_grid,
                     const NoiseNormParams* np = nullptr);

// W^H given the past path w: fresh Riemann-Liouville part plus A w
core::FbmPath conditioned_fbm(const PastPath& w, const core::HurstParams& p,
                              const TimeGrid& grid, rng::Stream& rs);

// (R_T w)(t) = w(-T) - w(t-T) on [0,T], nodes inherited from w
Curve flip_R(const PastPath& w, double T);

// (theta_t w)(s) = w(s+t) - w(t) for s >= 0; t must be a grid node
SampledFunction shift_theta(const SampledFunction& w_plus, double t);

// past path seen from time t: w+(t+s) - w+(t) for s in (-t, 0],
// w-(t+s) - w+(t) for s <= -t
PastPath shift_concat(const PastPath& w_minus, const SampledFunction& w_plus, double t);

}  // namespace fbm::cond
