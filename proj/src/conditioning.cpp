#include "fbm/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fbm/numerics.hpp"

namespace fbm::cond {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr int kMeshPerDecade = 256;

void require_h(double H) {
  if (!(H > 0.0 && H < 0.5)) throw std::invalid_argument("conditioning: H must be in (0,1/2)");
}

}  // namespace

NoiseNormParams default_noise_params(double H) {
  require_h(H);
  return {0.6 * H, 0.4 * H + 0.01};
}

void validate_noise_params(double H, const NoiseNormParams& p) {
  if (!(p.gamma > 0.0 && p.gamma < H))
    throw std::invalid_argument("NoiseNormParams: gamma must be in (0,H)");
  if (!(p.delta > H - p.gamma && p.delta < 1.0 - p.gamma))
    throw std::invalid_argument("NoiseNormParams: delta must be in (H-gamma, 1-gamma)");
}

double wminus_norm(const PastPath& w, const NoiseNormParams& p) {
  w.check();
  std::size_t n = w.n_nodes();
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s2 = 0.0;
      for (int c = 0; c < w.d; ++c) {
        double diff = w.at(j, c) - w.at(i, c);
        s2 += diff * diff;
      }
      double gap = w.t[j] - w.t[i];
      double weight = std::pow(gap, p.gamma) * std::pow(1.0 - w.t[i] - w.t[j], p.delta);
      best = std::max(best, std::sqrt(s2) / weight);
    }
  }
  return best;
}

double kernel_f(double x, double H) {
  require_h(H);
  if (!(x > 0.0)) throw std::invalid_argument("kernel_f: x must be > 0");
  return std::pow(x, H + 0.5) / (1.0 + x);
}

double kernel_f_quadrature(double x, double H) {
  require_h(H);
  if (!(x > 0.0)) throw std::invalid_argument("kernel_f: x must be > 0");
  boost::math::quadrature::tanh_sinh<double> ts;
  if (x >= 1.0) {
    double i = ts.integrate(
        [x, H](double u) { return std::pow(u + x, H - 2.5) * std::pow(1.0 - u, 0.5 - H); }, 0.0,
        1.0, 1e-12);
    return std::pow(x, H - 0.5) + (H - 1.5) * x * i;
  }
  double i = ts.integrate(
      [x, H](double u) {
        return std::pow(u + x, H - 2.5) * (-std::expm1((0.5 - H) * std::log1p(-u)));
      },
      0.0, 1.0, 1e-12);
  return x * std::pow(1.0 + x, H - 1.5) + (1.5 - H) * x * i;
}

double conditioning_prefactor(double H) {
  if (!(H > 0.0 && H <= 0.5)) throw std::invalid_argument("conditioning: H must be in (0,1/2]");
  if (H == 0.5) return 0.0;
  return std::cos(kPi * H) / kPi;
}

double c_one_minus_h(double H) {
  if (!(H > 0.0 && H <= 0.5)) throw std::invalid_argument("conditioning: H must be in (0,1/2]");
  double c_h = core::mvn_normalization(H);
  return -1.0 / (std::tgamma(H + 0.5) * std::tgamma(1.5 - H) * c_h);
}

ApplyAResult apply_A(const PastPath& w, double H, const TimeGrid& out_grid,
                     const NoiseNormParams* np) {
  w.check();
  if (!(H > 0.0 && H <= 0.5)) throw std::invalid_argument("apply_A: H must be in (0,1/2]");
  if (std::abs(out_grid.t_start) > 1e-12)
    throw std::invalid_argument("apply_A: output grid must start at 0");

  ApplyAResult res;
  res.path = SampledFunction(out_grid, w.d, true);
  NoiseNormParams p = (H < 0.5) ? (np ? *np : default_noise_params(H))
                                : NoiseNormParams{0.25, 0.3};
  if (np) validate_noise_params(H, p);
  res.norm_gamma_delta = wminus_norm(w, p);
  double pref = conditioning_prefactor(H);
  if (pref == 0.0) return res;  // H = 1/2: no memory

  double r_lo = out_grid.dt * 1e-3;
  double r_hi = w.extent();
  if (!(r_hi > r_lo)) throw std::invalid_argument("apply_A: past extent too small");
  double ds = std::log(10.0) / kMeshPerDecade;
  std::size_t n_mesh = static_cast<std::size_t>(std::ceil(std::log(r_hi / r_lo) / ds)) + 1;
  ds = std::log(r_hi / r_lo) / static_cast<double>(n_mesh - 1);

  std::vector<double> r(n_mesh), wv(n_mesh * static_cast<std::size_t>(w.d));
  for (std::size_t i = 0; i < n_mesh; ++i) {
    r[i] = r_lo * std::exp(ds * static_cast<double>(i));
    w.value_at(-r[i], &wv[i * static_cast<std::size_t>(w.d)]);
  }

  for (std::size_t k = 1; k <= out_grid.n_steps; ++k) {
    double t = out_grid.node(k);
    std::vector<num::KahanSum> acc(w.d);
    for (std::size_t i = 0; i < n_mesh; ++i) {
      double weight = (i == 0 || i + 1 == n_mesh) ? 0.5 : 1.0;  // dr/r = ds
      double fk = kernel_f(t / r[i], H) * weight;
      for (int c = 0; c < w.d; ++c) acc[c].add(fk * wv[i * static_cast<std::size_t>(w.d) + c]);
    }
    for (int c = 0; c < w.d; ++c) res.path.at(k, c) = pref * ds * acc[c].value();
  }

  // beyond the extent T: |w_{-r}| <= ||w|| r^gamma (1+r)^delta and
  // f(t/r) <= (t/r)^{H+1/2}, so the missing mass is bounded by
  // pref ||w|| C_T t^{H+1/2} T^{gamma+delta-H-1/2} / (H+1/2-gamma-delta)
  double expo = H + 0.5 - p.gamma - p.delta;
  double c_t = std::pow((1.0 + r_hi) / r_hi, p.delta);
  double t_max = out_grid.t_end();
  res.tail_bound = std::abs(pref) * res.norm_gamma_delta * c_t *
                   std::pow(t_max, H + 0.5) * std::pow(r_hi, -expo) / expo;
  return res;
}

core::FbmPath conditioned_fbm(const PastPath& w, const core::HurstParams& p,
                              const TimeGrid& grid, rng::Stream& rs) {
  if (w.d != p.d) throw std::invalid_argument("conditioned_fbm: dimension mismatch");
  core::FbmPath path = core::sample_fbm_mvn(p, grid, 0.0, rs);
  ApplyAResult mean = apply_A(w, p.H, grid);
  for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] += mean.path.values[i];
  path.past = w;
  return path;
}

Curve flip_R(const PastPath& w, double T) {
  w.check();
  if (!(T > 0.0) || T > w.extent() + 1e-12)
    throw std::invalid_argument("flip_R: T must lie within the past extent");
  std::vector<double> w_at_mT(w.d);
  w.value_at(-T, w_at_mT.data());

  Curve out;
  out.d = w.d;
  for (std::size_t i = 0; i < w.n_nodes(); ++i) {
    double t = w.t[i] + T;  // t - T = w.t[i]
    if (t < -1e-12) continue;
    out.t.push_back(std::max(t, 0.0));
    for (int c = 0; c < w.d; ++c) out.v.push_back(w_at_mT[c] - w.at(i, c));
  }
  if (out.t.empty() || out.t.front() > 1e-12) {
    out.t.insert(out.t.begin(), 0.0);
    out.v.insert(out.v.begin(), w.d, 0.0);
  }
  out.check();
  return out;
}

SampledFunction shift_theta(const SampledFunction& w_plus, double t) {
  w_plus.check();
  std::size_t j = w_plus.grid.index_of(t);
  TimeGrid g(w_plus.grid.t_start, w_plus.grid.dt, w_plus.grid.n_steps - j);
  SampledFunction out(g, w_plus.d, true);
  for (std::size_t k = 0; k <= g.n_steps; ++k)
    for (int c = 0; c < w_plus.d; ++c)
      out.at(k, c) = w_plus.at(k + j, c) - w_plus.at(j, c);
  return out;
}

PastPath shift_concat(const PastPath& w_minus, const SampledFunction& w_plus, double t) {
  w_minus.check();
  w_plus.check();
  if (std::abs(w_plus.grid.t_start) > 1e-12)
    throw std::invalid_argument("shift_concat: future path must start at 0");
  if (t == 0.0) return w_minus;
  std::size_t j = w_plus.grid.index_of(t);

  PastPath out;
  out.d = w_minus.d;
  for (std::size_t i = 0; i < w_minus.n_nodes(); ++i) {
    out.t.push_back(w_minus.t[i] - t);
    for (int c = 0; c < out.d; ++c) out.v.push_back(w_minus.at(i, c) - w_plus.at(j, c));
  }
  for (std::size_t k = 1; k <= j; ++k) {
    out.t.push_back(w_plus.grid.node(k) - t);
    for (int c = 0; c < out.d; ++c) out.v.push_back(w_plus.at(k, c) - w_plus.at(j, c));
  }
  out.check();
  return out;
}

}  // namespace fbm::cond
