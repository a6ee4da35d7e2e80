#include "fbm/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fbm/numerics.hpp"

namespace fbm::core {

namespace {

constexpr std::size_t kMaxExactNodes = 8192;
constexpr double kPastMeshGrowth = 1.15;

}  // namespace

double mvn_normalization(double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("mvn_normalization: H must be in (0,1)");
  if (H == 0.5) return 1.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  double near = ts.integrate(
      [H](double r) {
        double u = std::pow(1.0 + r, H - 0.5) - std::pow(r, H - 0.5);
        return u * u;
      },
      0.0, 1.0, 1e-12);
  // r = e^y turns the algebraic tail into exponential decay at rate 2(1-H);
  // log-space evaluation avoids 0 * inf at large y
  boost::math::quadrature::exp_sinh<double> es;
  double far = es.integrate(
      [H](double y) {
        double w = std::log1p(std::exp(-y));
        double val = std::expm1((H - 0.5) * w);
        if (val == 0.0) return 0.0;
        return std::exp(2.0 * H * y + 2.0 * std::log(std::abs(val)));
      },
      1e-10);
  double v = 1.0 / (2.0 * H) + near + far;
  return 1.0 / std::sqrt(v);
}

HurstParams make_hurst(double H, int d) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("make_hurst: H must be in (0,1)");
  if (d < 1) throw std::invalid_argument("make_hurst: d must be >= 1");
  static std::map<double, double> cache;
  static std::mutex mu;
  double c;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(H);
    if (it != cache.end()) {
      c = it->second;
    } else {
      c = mvn_normalization(H);
      cache.emplace(H, c);
    }
  }
  HurstParams p;
  p.H = H;
  p.d = d;
  p.c_H = c;
  p.c_tilde_H = c * c / (2.0 * H);
  return p;
}

double fbm_covariance(double s, double t, const HurstParams& p) {
  double twoH = 2.0 * p.H;
  return 0.5 * (std::pow(std::abs(t), twoH) + std::pow(std::abs(s), twoH) -
                std::pow(std::abs(t - s), twoH));
}

FbmPath sample_fbm_exact(const HurstParams& p, const TimeGrid& g, rng::Stream& rs) {
  if (g.n_nodes() > kMaxExactNodes)
    throw std::invalid_argument("sample_fbm_exact: grid exceeds 8192 nodes");
  std::size_t n = g.n_nodes();
  std::vector<std::size_t> live;  // nodes with nonzero variance (t != 0)
  live.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(g.node(k)) > 1e-14) live.push_back(k);

  std::size_t m = live.size();
  Eigen::MatrixXd cov(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double cij = fbm_covariance(g.node(live[i]), g.node(live[j]), p);
      cov(i, j) = cij;
      cov(j, i) = cij;
    }

  double scale = cov.diagonal().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd c2 = cov;
    if (jitter > 0.0) c2.diagonal().array() += jitter * scale;
    llt.compute(c2);
    if (llt.info() == Eigen::Success) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw std::runtime_error(
        "sample_fbm_exact: covariance factorization failed even with diagonal jitter up to "
        "1e-8 * diag scale; reduce the grid or raise the jitter ceiling");

  Eigen::MatrixXd z(m, p.d);
  for (std::size_t i = 0; i < m; ++i)
    for (int c = 0; c < p.d; ++c) z(i, c) = rs.gauss();
  Eigen::MatrixXd x = llt.matrixL() * z;

  FbmPath path;
  path.par = p;
  path.grid = g;
  path.values.assign(n * static_cast<std::size_t>(p.d), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (int c = 0; c < p.d; ++c) path.at(live[i], c) = x(i, c);
  return path;
}

std::vector<double> mvn_kernel_weights(double H, double dt, std::size_t n_steps) {
  std::vector<double> kappa(n_steps + 1, 0.0);
  if (n_steps == 0) return kappa;
  kappa[1] = std::pow(dt, H - 0.5) / std::sqrt(2.0 * H);
  for (std::size_t j = 2; j <= n_steps; ++j)
    kappa[j] = std::pow((static_cast<double>(j) - 0.5) * dt, H - 0.5);
  return kappa;
}

double mvn_past_weight(double H, double t, double a, double b) {
  if (!(a < b && b <= 1e-15 && t > 0.0)) throw std::invalid_argument("mvn_past_weight: bad interval");
  double q = H + 0.5;
  double fresh = std::pow(t - a, q) - std::pow(t - b, q);
  double base = std::pow(-a, q) - std::pow(-b, q);
  return (fresh - base) / ((b - a) * q);
}

namespace {

// past mesh: uniform steps of dt back to -min(length, horizon), then
// geometrically growing intervals out to -horizon
std::vector<double> past_mesh(const TimeGrid& g, double horizon) {
  std::vector<double> nodes;
  double lin = std::min(g.length(), horizon);
  std::size_t n_lin = static_cast<std::size_t>(std::ceil(lin / g.dt - 1e-12));
  nodes.push_back(0.0);
  for (std::size_t k = 1; k <= n_lin; ++k) nodes.push_back(-static_cast<double>(k) * g.dt);
  if (nodes.back() < -horizon) nodes.back() = -horizon;
  double q = -nodes.back();
  while (q < horizon * (1.0 - 1e-12)) {
    q = std::min(q * kPastMeshGrowth, horizon);
    nodes.push_back(-q);
  }
  std::reverse(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace

FbmPath sample_fbm_mvn(const HurstParams& p, const TimeGrid& g, double past_horizon,
                       rng::Stream& rs) {
  if (std::abs(g.t_start) > 1e-12)
    throw std::invalid_argument("sample_fbm_mvn: grid must start at 0");
  if (past_horizon < 0.0) throw std::invalid_argument("sample_fbm_mvn: past_horizon must be >= 0");

  std::size_t n = g.n_steps;
  FbmPath path;
  path.par = p;
  path.grid = g;
  path.values.assign(g.n_nodes() * static_cast<std::size_t>(p.d), 0.0);
  path.driver.assign(n * static_cast<std::size_t>(p.d), 0.0);

  double sdt = std::sqrt(g.dt);
  for (std::size_t k = 0; k < n; ++k)
    for (int c = 0; c < p.d; ++c) path.driver[k * p.d + c] = sdt * rs.gauss();

  std::size_t n_past = 0;
  if (past_horizon > 0.0) {
    path.past_driver.d = p.d;
    path.past_driver.nodes = past_mesh(g, past_horizon);
    n_past = path.past_driver.n_intervals();
    path.past_driver.db.assign(n_past * static_cast<std::size_t>(p.d), 0.0);
    for (std::size_t i = 0; i < n_past; ++i) {
      double w = std::sqrt(path.past_driver.nodes[i + 1] - path.past_driver.nodes[i]);
      for (int c = 0; c < p.d; ++c) path.past_driver.db[i * p.d + c] = w * rs.gauss();
    }
  }

  std::vector<double> kappa = mvn_kernel_weights(p.H, g.dt, n);
  for (std::size_t m = 1; m <= n; ++m) {
    double t = g.node(m);
    for (int c = 0; c < p.d; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += kappa[m - k] * path.driver[k * p.d + c];
      path.at(m, c) = p.c_H * acc;
    }
    if (n_past > 0) {
      for (std::size_t i = 0; i < n_past; ++i) {
        double w = mvn_past_weight(p.H, t, path.past_driver.nodes[i], path.past_driver.nodes[i + 1]);
        if (w == 0.0) continue;
        for (int c = 0; c < p.d; ++c) path.at(m, c) += p.c_H * w * path.past_driver.db[i * p.d + c];
      }
    }
  }
  return path;
}

double mvn_scheme_variance(const HurstParams& p, const TimeGrid& g, double past_horizon,
                           double t) {
  if (std::abs(g.t_start) > 1e-12)
    throw std::invalid_argument("mvn_scheme_variance: grid must start at 0");
  std::size_t m = g.index_of(t);
  if (m == 0) return 0.0;
  std::vector<double> kappa = mvn_kernel_weights(p.H, g.dt, g.n_steps);
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) acc += kappa[m - k] * kappa[m - k] * g.dt;
  if (past_horizon > 0.0) {
    std::vector<double> nodes = past_mesh(g, past_horizon);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      double w = mvn_past_weight(p.H, t, nodes[i], nodes[i + 1]);
      acc += w * w * (nodes[i + 1] - nodes[i]);
    }
  }
  return p.c_H * p.c_H * acc;
}

double mvn_tail_sd(const HurstParams& p, double t, double past_horizon) {
  if (past_horizon <= 0.0) return std::numeric_limits<double>::infinity();
  if (p.H == 0.5) return 0.0;
  // |(t+q)^{H-1/2} - q^{H-1/2}| <= |H-1/2| t q^{H-3/2}
  double a = std::abs(p.H - 0.5) * t;
  double var = p.c_H * p.c_H * a * a * std::pow(past_horizon, 2.0 * p.H - 2.0) / (2.0 - 2.0 * p.H);
  return std::sqrt(var);
}

CondMeanVar conditional_mean_var(const FbmPath& path, double s, double t) {
  if (!path.has_driver())
    throw std::invalid_argument("conditional_mean_var: path carries no driver increments");
  if (!(t > s)) throw std::invalid_argument("conditional_mean_var: need t > s");
  const HurstParams& p = path.par;
  std::size_t j = path.grid.index_of(s);

  CondMeanVar out;
  out.var = p.c_tilde_H * std::pow(t - s, 2.0 * p.H);
  out.mean.assign(p.d, 0.0);
  for (std::size_t k = 0; k < j; ++k) {
    double mid = path.grid.node(k) + 0.5 * path.grid.dt;
    double w = std::pow(t - mid, p.H - 0.5);
    for (int c = 0; c < p.d; ++c) out.mean[c] += w * path.driver[k * p.d + c];
  }
  for (int c = 0; c < p.d; ++c) out.mean[c] *= p.c_H;
  std::size_t n_past = path.past_driver.n_intervals();
  for (std::size_t i = 0; i < n_past; ++i) {
    double w = mvn_past_weight(p.H, t, path.past_driver.nodes[i], path.past_driver.nodes[i + 1]);
    for (int c = 0; c < p.d; ++c) out.mean[c] += p.c_H * w * path.past_driver.db[i * p.d + c];
  }
  return out;
}

std::vector<double> exp_kernel_integral(const SampledFunction& x, double lambda, double t) {
  if (!(lambda > 0.0)) throw std::invalid_argument("exp_kernel_integral: lambda must be > 0");
  std::size_t m = x.grid.index_of(t);
  double dt = x.grid.dt;
  std::vector<double> out(x.d, 0.0);
  double tau = static_cast<double>(m) * dt;
  for (int c = 0; c < x.d; ++c) {
    double xt = x.at(m, c);
    num::KahanSum acc;
    for (std::size_t k = 0; k <= m; ++k) {
      double w = (k == 0 || k == m) ? 0.5 : 1.0;
      double r = static_cast<double>(k) * dt;
      acc.add(w * lambda * std::exp(-lambda * (tau - r)) * (xt - x.at(k, c)));
    }
    out[c] = std::exp(-lambda * tau) * xt + dt * acc.value();
  }
  return out;
}

}  // namespace fbm::core
