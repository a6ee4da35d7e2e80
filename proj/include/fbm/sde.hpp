#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fbm/besov.hpp"
#include "fbm/core.hpp"
#include "fbm/grid.hpp"

namespace fbm::sde {

enum class Scheme { euler, averaged };

struct SdeConfig {
  core::HurstParams hurst;
  besov::BesovDrift drift;
  besov::DissipativeField u;
  std::vector<double> x0;
  SampledFunction psi;  // empty values mean zero perturbation
  TimeGrid grid;
  Scheme scheme = Scheme::euler;
  int j_override = -1;  // truncation level; < 0 selects mollification_level
};

// ceil(H log2(1/dt)) clamped to [0, j_max]: spatial cutoff matched to the
// noise displacement scale dt^H
int mollification_level(double H, double dt, int j_max);

struct SolutionPath {
  SampledFunction x;
  SampledFunction theta;  // x - w - psi at every node
  core::FbmPath noise;
  SampledFunction psi;
  int j_used = 0;
};

// X_{k+1} = X_k + (g_J(X_k) + u(X_k)) dt + dW_k + dpsi_k; the linear part of u
// switches to semi-implicit once lambda dt > 1/2
SolutionPath solve_euler(const SdeConfig& cfg, const core::FbmPath& noise);

// drift increment per step from the heat-smoothed field integrated along the
// conditional mean of W, with theta frozen at the step start
SolutionPath solve_averaged(const SdeConfig& cfg, const core::FbmPath& noise);

SolutionPath solve(const SdeConfig& cfg, const core::FbmPath& noise);

// variation-of-constants path int_0^t e^{-lambda(t-r)} d(W + psi)_r
SampledFunction ou_reference(double lambda, const core::FbmPath& noise,
                             const SampledFunction& psi);

double holder_seminorm(const SampledFunction& path, double exponent, double window);

struct RemainderReport {
  bool constant_remainder = false;
  std::vector<double> lags;
  std::vector<double> second_moment;
  double exponent = 0.0;  // half the log-log slope of the second moment
  double r2 = 0.0;
};

RemainderReport remainder_report(std::span<const SolutionPath> batch);
RemainderReport remainder_report(const SolutionPath& sol);

struct StabilityReport {
  std::vector<double> discrepancy;
  std::vector<double> distance;  // batch mean of sup_{[0,1]} |X1 - X2|
  double slope = 0.0;
  double r2 = 0.0;
};

// distance against the block-norm gap of truncation pairs; strong regime only
StabilityReport stability_rate(const SdeConfig& cfg, std::span<const std::pair<int, int>> j_pairs,
                               double alpha_prime, std::span<const core::FbmPath> noise);

// distance against the initial-condition gap along the first coordinate
StabilityReport stability_rate(const SdeConfig& cfg, std::span<const double> x0_offsets,
                               std::span<const core::FbmPath> noise);

// saturation exponent chi = (1 + (2 alpha - 1) H) / (1 + alpha H) for the
// sup-response to a bounded perturbation
double response_exponent(double alpha, double H);

struct ResponseReport {
  double chi = 0.0;
  std::vector<double> eps;
  std::vector<double> response;  // batch mean of sup |X^{eps psi} - X|
  double power = 0.0;
  double r2 = 0.0;
};

ResponseReport psi_perturbation_response(const SdeConfig& cfg, const SampledFunction& psi_base,
                                         std::span<const double> eps,
                                         std::span<const core::FbmPath> noise);

}  // namespace fbm::sde
