#pragma once

#include "fbm/grid.hpp"

namespace fbm::fraccalc {

enum class NegKind { integral, derivative };

// I^alpha f with the kernel integrated exactly against piecewise-linear data;
// alpha in [0,1), alpha = 0 is the identity
SampledFunction frac_integral(const SampledFunction& f, double alpha);

// D^alpha f = d/dt I^{1-alpha} f, centered differences with one-sided ends
SampledFunction frac_derivative(const SampledFunction& f, double alpha);

// negative-order operators, alpha in (-1,0]:
//   integral:   I^alpha f = d/dt I^{1+alpha} f
//   derivative: D^alpha f = D^{1+alpha} int_0^. f
SampledFunction frac_op_negative(const SampledFunction& f, double alpha, NegKind kind);

// increment form (t-s)^alpha d f_s for alpha in (-1,0); requires f(0) = 0 and
// Holder regularity above -alpha (estimated on dyadic lags)
SampledFunction frac_increment(const SampledFunction& f, double alpha);

struct SemigroupReport {
  double semigroup_dev = 0.0;   // sup |I^a I^b f - I^{a+b} f|
  double inversion_dev = 0.0;   // sup |I^a D^a f - f|
  double semigroup_scale = 0.0; // sup |I^{a+b} f|
  double inversion_scale = 0.0; // sup |f|
};

SemigroupReport semigroup_check(const SampledFunction& f, double alpha, double beta);

// F_t = int_0^t f ds, trapezoidal; F(0) = 0
SampledFunction cumulative_trapezoid(const SampledFunction& f);

// fitted log-log slope of dyadic-lag sup increments, cheap Holder estimate
double holder_slope_estimate(const SampledFunction& f);

}  // namespace fbm::fraccalc
