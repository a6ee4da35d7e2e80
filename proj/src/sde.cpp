#include "fbm/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fbm/numerics.hpp"
#include "fbm/sewing.hpp"

namespace fbm::sde {

namespace {

besov::BesovDrift truncate_drift(const besov::BesovDrift& g, int j) {
  besov::BesovDrift out = g;
  out.J = j;
  out.amps.resize(static_cast<std::size_t>(j) + 1);
  out.phases.resize(static_cast<std::size_t>(j) + 1);
  return out;
}

bool zero_amps(const besov::BesovDrift& g) {
  for (double a : g.amps)
    if (a != 0.0) return false;
  return true;
}

void require_regime(const besov::BesovDrift& g, double H, bool strong, const char* who) {
  if (zero_amps(g)) return;
  auto lab = besov::classify_regime(g.alpha, H);
  if (lab.strength == besov::StrengthLabel::none)
    throw std::invalid_argument(std::string(who) + ": drift outside the simulable regime");
  if (strong && lab.strength != besov::StrengthLabel::strong)
    throw std::invalid_argument(std::string(who) +
                                ": uniqueness diagnostics disabled outside the strong regime");
}

void validate(const SdeConfig& cfg, const core::FbmPath& noise, bool need_driver,
              const char* who) {
  const int d = cfg.hurst.d;
  if (cfg.drift.d != d || cfg.u.d != d || static_cast<int>(cfg.x0.size()) != d ||
      noise.par.d != d)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (!noise.grid.same_as(cfg.grid))
    throw std::invalid_argument(std::string(who) + ": noise grid does not match config grid");
  if (std::abs(noise.par.H - cfg.hurst.H) > 1e-12)
    throw std::invalid_argument(std::string(who) + ": noise H does not match config H");
  if (!cfg.psi.values.empty()) {
    if (!cfg.psi.grid.same_as(cfg.grid) || cfg.psi.d != d)
      throw std::invalid_argument(std::string(who) + ": psi does not live on the config grid");
  }
  if (need_driver && !noise.has_driver())
    throw std::invalid_argument(std::string(who) + ": noise carries no driver increments");
  require_regime(cfg.drift, cfg.hurst.H, false, who);
}

SolutionPath march(const SdeConfig& cfg, const core::FbmPath& noise, bool averaged,
                   const char* tag) {
  validate(cfg, noise, averaged, tag);
  const int d = cfg.hurst.d;
  const std::size_t n = cfg.grid.n_steps;
  const double dt = cfg.grid.dt;
  const bool has_psi = !cfg.psi.values.empty();
  const bool semi = cfg.u.lambda * dt > 0.5;
  const double divisor = 1.0 - dt * cfg.u.lin_coeff;

  SolutionPath sol;
  sol.j_used = cfg.j_override >= 0 ? std::min(cfg.j_override, cfg.drift.J)
                                   : mollification_level(cfg.hurst.H, dt, cfg.drift.J);
  besov::BesovDrift gj = truncate_drift(cfg.drift, sol.j_used);
  const bool no_drift = zero_amps(gj);

  sol.x = SampledFunction(cfg.grid, d);
  sol.theta = SampledFunction(cfg.grid, d);
  sol.psi = cfg.psi;
  sol.noise = noise;

  sewing::SmoothedField field;
  if (averaged && !no_drift) field = sewing::drift_field(gj);

  std::vector<double> xk(cfg.x0), gv(d), uv(d), dr(d), phi(d);
  for (int c = 0; c < d; ++c) sol.x.at(0, c) = xk[c];

  for (std::size_t k = 0; k < n; ++k) {
    std::fill(dr.begin(), dr.end(), 0.0);
    if (!no_drift) {
      if (!averaged) {
        gj.value(xk.data(), 0.0, gv.data());
        for (int c = 0; c < d; ++c) dr[c] = dt * gv[c];
      } else {
        const double tk = cfg.grid.node(k);
        for (int c = 0; c < d; ++c)
          phi[c] = xk[c] - noise.at(k, c) - (has_psi ? cfg.psi.at(k, c) : 0.0);
        Curve cv;
        cv.d = d;
        cv.t.push_back(tk);
        for (int c = 0; c < d; ++c)
          cv.v.push_back(noise.at(k, c) + (has_psi ? cfg.psi.at(k, c) : 0.0));
        for (int m = 1; m <= 4; ++m) {
          const double f = m / 4.0;
          auto mv = core::conditional_mean_var(noise, tk, tk + f * dt);
          cv.t.push_back(tk + f * dt);
          for (int c = 0; c < d; ++c) {
            const double pr =
                has_psi ? (1.0 - f) * cfg.psi.at(k, c) + f * cfg.psi.at(k + 1, c) : 0.0;
            cv.v.push_back(mv.mean[c] + pr);
          }
        }
        auto inc = sewing::averaged_field(field, phi, cv, cfg.hurst, tk, tk + dt);
        for (int c = 0; c < d; ++c) dr[c] = inc[c];
      }
    }
    cfg.u.value(xk.data(), uv.data());
    for (int c = 0; c < d; ++c) {
      const double dw = noise.at(k + 1, c) - noise.at(k, c);
      const double dp = has_psi ? cfg.psi.at(k + 1, c) - cfg.psi.at(k, c) : 0.0;
      double next;
      if (!semi) {
        next = xk[c] + dr[c] + dt * uv[c] + dw + dp;
      } else {
        const double pert = uv[c] - cfg.u.lin_coeff * xk[c];
        next = (xk[c] + dr[c] + dt * pert + dw + dp) / divisor;
      }
      if (!std::isfinite(next))
        throw std::runtime_error(std::string(tag) + ": non-finite state at step " +
                                 std::to_string(k));
      sol.x.at(k + 1, c) = next;
      xk[c] = next;
    }
  }
  for (std::size_t k = 0; k <= n; ++k)
    for (int c = 0; c < d; ++c)
      sol.theta.at(k, c) = sol.x.at(k, c) - noise.at(k, c) - (has_psi ? cfg.psi.at(k, c) : 0.0);
  return sol;
}

// batch mean over shared-noise pairs of sup_{t <= 1} |X1 - X2|
double mean_sup_distance(const SdeConfig& a, const SdeConfig& b,
                         std::span<const core::FbmPath> noise) {
  num::KahanSum acc;
  for (const auto& w : noise) {
    auto xa = solve(a, w);
    auto xb = solve(b, w);
    double sup = 0.0;
    for (std::size_t k = 0; k < a.grid.n_nodes(); ++k) {
      if (a.grid.node(k) > 1.0 + 1e-12) break;
      double s2 = 0.0;
      for (int c = 0; c < a.hurst.d; ++c) {
        const double dv = xa.x.at(k, c) - xb.x.at(k, c);
        s2 += dv * dv;
      }
      sup = std::max(sup, std::sqrt(s2));
    }
    acc.add(sup);
  }
  return acc.value() / static_cast<double>(noise.size());
}

void fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double& slope,
                double& r2) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2) {
    slope = 0.0;
    r2 = 0.0;
    return;
  }
  auto fit = num::linfit(lx, ly);
  slope = fit.slope;
  r2 = fit.r2;
}

}  // namespace

int mollification_level(double H, double dt, int j_max) {
  if (!(H > 0.0) || !(H < 1.0))
    throw std::invalid_argument("mollification_level: H must lie in (0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("mollification_level: dt must be > 0");
  if (j_max < 0) throw std::invalid_argument("mollification_level: j_max must be >= 0");
  const double v = H * std::log2(1.0 / dt);
  const int j = v <= 0.0 ? 0 : static_cast<int>(std::ceil(v - 1e-9));
  return std::min(j, j_max);
}

SolutionPath solve_euler(const SdeConfig& cfg, const core::FbmPath& noise) {
  return march(cfg, noise, false, "solve_euler");
}

SolutionPath solve_averaged(const SdeConfig& cfg, const core::FbmPath& noise) {
  return march(cfg, noise, true, "solve_averaged");
}

SolutionPath solve(const SdeConfig& cfg, const core::FbmPath& noise) {
  return cfg.scheme == Scheme::averaged ? solve_averaged(cfg, noise) : solve_euler(cfg, noise);
}

SampledFunction ou_reference(double lambda, const core::FbmPath& noise,
                             const SampledFunction& psi) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ou_reference: lambda must be > 0");
  const int d = noise.par.d;
  const bool has_psi = !psi.values.empty();
  if (has_psi && (!psi.grid.same_as(noise.grid) || psi.d != d))
    throw std::invalid_argument("ou_reference: psi does not live on the noise grid");
  SampledFunction z(noise.grid, d);
  for (std::size_t k = 0; k < noise.grid.n_nodes(); ++k)
    for (int c = 0; c < d; ++c) {
      const double v = noise.at(k, c) + (has_psi ? psi.at(k, c) : 0.0);
      const double v0 = noise.at(0, c) + (has_psi ? psi.at(0, c) : 0.0);
      z.at(k, c) = v - v0;
    }
  SampledFunction y(noise.grid, d);
  for (std::size_t k = 0; k < noise.grid.n_nodes(); ++k) {
    auto v = core::exp_kernel_integral(z, lambda, noise.grid.node(k));
    for (int c = 0; c < d; ++c) y.at(k, c) = v[c];
  }
  return y;
}

double holder_seminorm(const SampledFunction& path, double exponent, double window) {
  if (!(exponent > 0.0) || !(exponent <= 1.0))
    throw std::invalid_argument("holder_seminorm: exponent must lie in (0, 1]");
  if (!(window > 0.0) || window > 1.0)
    throw std::invalid_argument("holder_seminorm: window must lie in (0, 1]");
  std::vector<double> times(path.grid.n_nodes());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = path.grid.node(k);
  return num::holder_seminorm(times, path.values, path.d, exponent, window);
}

RemainderReport remainder_report(std::span<const SolutionPath> batch) {
  if (batch.empty()) throw std::invalid_argument("remainder_report: empty batch");
  const auto& grid = batch.front().x.grid;
  const int d = batch.front().x.d;
  for (const auto& sol : batch)
    if (!sol.x.grid.same_as(grid) || sol.x.d != d)
      throw std::invalid_argument("remainder_report: batch is not grid-aligned");

  const std::size_t n = grid.n_steps;
  std::vector<std::size_t> steps;
  for (std::size_t L = 4; L <= n / 8; L *= 2) steps.push_back(L);
  if (steps.size() < 2)
    throw std::invalid_argument("remainder_report: grid too short for a lag sweep");

  RemainderReport rep;
  const std::size_t stride = std::max<std::size_t>(1, n / 64);
  for (std::size_t L : steps) {
    num::KahanSum acc;
    std::size_t count = 0;
    for (const auto& sol : batch) {
      for (std::size_t s0 = 0; s0 + L <= n; s0 += stride) {
        double s2 = 0.0;
        for (int c = 0; c < d; ++c) {
          const double dv = sol.theta.at(s0 + L, c) - sol.theta.at(s0, c);
          s2 += dv * dv;
        }
        acc.add(s2);
        ++count;
      }
    }
    rep.lags.push_back(static_cast<double>(L) * grid.dt);
    rep.second_moment.push_back(acc.value() / static_cast<double>(count));
  }

  double peak = 0.0;
  for (double m2 : rep.second_moment) peak = std::max(peak, m2);
  if (peak < 1e-24) {
    rep.constant_remainder = true;
    return rep;
  }
  std::vector<double> lx(rep.lags.size()), ly(rep.lags.size());
  for (std::size_t i = 0; i < rep.lags.size(); ++i) {
    lx[i] = std::log(rep.lags[i]);
    ly[i] = std::log(rep.second_moment[i]);
  }
  auto fit = num::linfit(lx, ly);
  rep.exponent = 0.5 * fit.slope;
  rep.r2 = fit.r2;
  return rep;
}

RemainderReport remainder_report(const SolutionPath& sol) {
  return remainder_report(std::span<const SolutionPath>(&sol, 1));
}

StabilityReport stability_rate(const SdeConfig& cfg, std::span<const std::pair<int, int>> j_pairs,
                               double alpha_prime, std::span<const core::FbmPath> noise) {
  if (j_pairs.empty()) throw std::invalid_argument("stability_rate: no pairs");
  if (noise.empty()) throw std::invalid_argument("stability_rate: empty noise batch");
  require_regime(cfg.drift, cfg.hurst.H, true, "stability_rate");

  StabilityReport rep;
  for (auto [ja, jb] : j_pairs) {
    if (ja < 0 || jb < 0 || ja > cfg.drift.J || jb > cfg.drift.J)
      throw std::invalid_argument("stability_rate: truncation level out of range");
    auto ga = truncate_drift(cfg.drift, ja);
    auto gb = truncate_drift(cfg.drift, jb);
    rep.discrepancy.push_back(besov::block_norm_difference(ga, gb, alpha_prime));
    SdeConfig ca = cfg, cb = cfg;
    ca.j_override = ja;
    cb.j_override = jb;
    rep.distance.push_back(mean_sup_distance(ca, cb, noise));
  }
  fit_loglog(rep.discrepancy, rep.distance, rep.slope, rep.r2);
  return rep;
}

StabilityReport stability_rate(const SdeConfig& cfg, std::span<const double> x0_offsets,
                               std::span<const core::FbmPath> noise) {
  if (x0_offsets.empty()) throw std::invalid_argument("stability_rate: no offsets");
  if (noise.empty()) throw std::invalid_argument("stability_rate: empty noise batch");
  require_regime(cfg.drift, cfg.hurst.H, true, "stability_rate");

  StabilityReport rep;
  for (double off : x0_offsets) {
    SdeConfig cb = cfg;
    cb.x0[0] += off;
    rep.discrepancy.push_back(std::abs(off));
    rep.distance.push_back(mean_sup_distance(cfg, cb, noise));
  }
  fit_loglog(rep.discrepancy, rep.distance, rep.slope, rep.r2);
  return rep;
}

double response_exponent(double alpha, double H) {
  if (!(H > 0.0) || !(H < 1.0))
    throw std::invalid_argument("response_exponent: H must lie in (0, 1)");
  const double num = 1.0 + (2.0 * alpha - 1.0) * H;
  const double den = 1.0 + alpha * H;
  if (!(num > 0.0) || !(den > 0.0))
    throw std::invalid_argument("response_exponent: requires at least the weak regime");
  return num / den;
}

ResponseReport psi_perturbation_response(const SdeConfig& cfg, const SampledFunction& psi_base,
                                         std::span<const double> eps,
                                         std::span<const core::FbmPath> noise) {
  if (eps.empty()) throw std::invalid_argument("psi_perturbation_response: no eps values");
  if (noise.empty()) throw std::invalid_argument("psi_perturbation_response: empty noise batch");
  if (!psi_base.grid.same_as(cfg.grid) || psi_base.d != cfg.hurst.d)
    throw std::invalid_argument("psi_perturbation_response: psi_base off the config grid");
  for (double e : eps)
    if (e < 0.0) throw std::invalid_argument("psi_perturbation_response: eps must be >= 0");

  ResponseReport rep;
  rep.chi = response_exponent(cfg.drift.alpha, cfg.hurst.H);
  rep.eps.assign(eps.begin(), eps.end());
  rep.response.assign(eps.size(), 0.0);

  SdeConfig base = cfg;
  base.psi = SampledFunction();
  std::vector<num::KahanSum> acc(eps.size());
  for (const auto& w : noise) {
    auto x0 = solve(base, w);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (eps[i] == 0.0) continue;
      SdeConfig pc = cfg;
      pc.psi = psi_base;
      for (double& v : pc.psi.values) v *= eps[i];
      auto xe = solve(pc, w);
      double sup = 0.0;
      for (std::size_t k = 0; k < cfg.grid.n_nodes(); ++k) {
        double s2 = 0.0;
        for (int c = 0; c < cfg.hurst.d; ++c) {
          const double dv = xe.x.at(k, c) - x0.x.at(k, c);
          s2 += dv * dv;
        }
        sup = std::max(sup, std::sqrt(s2));
      }
      acc[i].add(sup);
    }
  }
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (eps[i] > 0.0) rep.response[i] = acc[i].value() / static_cast<double>(noise.size());
  fit_loglog(rep.eps, rep.response, rep.power, rep.r2);
  return rep;
}

}  // namespace fbm::sde
