#include "fbm/ergodics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include "fbm/fraccalc.hpp"
#include "fbm/numerics.hpp"

namespace fbm::ergodics {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

besov::BesovDrift truncated(const besov::BesovDrift& g, int j) {
  besov::BesovDrift out = g;
  if (j < g.J) {
    out.J = j;
    out.amps.resize(static_cast<std::size_t>(j) + 1);
    out.phases.resize((static_cast<std::size_t>(j) + 1) * static_cast<std::size_t>(g.d));
  }
  return out;
}

bool zero_amplitude(const besov::BesovDrift& g) {
  for (double a : g.amps)
    if (a != 0.0) return false;
  return true;
}

double u_gradient_entry(const besov::DissipativeField& u, double xc) {
  return u.lin_coeff + u.pert_amp * u.pert_freq * std::cos(u.pert_freq * xc);
}

// steps per unit window; the grid step must tile [0,1] to within 1e-9
std::size_t unit_window_steps(const TimeGrid& g, const char* who) {
  double w = 1.0 / g.dt;
  double r = std::round(w);
  if (r < 1.0 || std::abs(w - r) > 1e-9 * w)
    throw std::invalid_argument(std::string(who) + ": dt must divide the unit window");
  return static_cast<std::size_t>(r);
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// sup Euclid norm and gamma-Holder seminorm of x over nodes [k0, k1]
void window_norms(const SampledFunction& x, std::size_t k0, std::size_t k1, double gamma,
                  double* sup, double* semi) {
  double s = 0.0, h = 0.0;
  for (std::size_t k = k0; k <= k1; ++k) s = std::max(s, euclid(x.node_view(k)));
  for (std::size_t k = k0; k < k1; ++k)
    for (std::size_t l = k + 1; l <= k1; ++l) {
      double d2 = 0.0;
      for (int c = 0; c < x.d; ++c) {
        double diff = x.at(l, c) - x.at(k, c);
        d2 += diff * diff;
      }
      double gap = static_cast<double>(l - k) * x.grid.dt;
      h = std::max(h, std::sqrt(d2) / std::pow(gap, gamma));
    }
  *sup = s;
  *semi = h;
}

std::size_t cell_index(std::span<const double> x, double box, int bins) {
  std::size_t idx = 0;
  for (double xc : x) {
    double u = (xc + box) / (2.0 * box) * static_cast<double>(bins);
    long i = static_cast<long>(std::floor(u));
    i = std::clamp(i, 0L, static_cast<long>(bins) - 1L);
    idx = idx * static_cast<std::size_t>(bins) + static_cast<std::size_t>(i);
  }
  return idx;
}

std::vector<std::int64_t> build_histogram(const std::vector<double>& samples, std::size_t lo,
                                          std::size_t hi, int d, double box, int bins,
                                          std::size_t cells) {
  std::vector<std::int64_t> h(cells, 0);
  for (std::size_t s = lo; s < hi; ++s) {
    std::span<const double> row{samples.data() + s * static_cast<std::size_t>(d),
                                static_cast<std::size_t>(d)};
    ++h[cell_index(row, box, bins)];
  }
  return h;
}

double histogram_l1(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::int64_t na = 0, nb = 0;
  for (auto c : a) na += c;
  for (auto c : b) nb += c;
  if (na == 0 || nb == 0) throw std::invalid_argument("measure_distance: empty histogram");
  num::KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i)
    s.add(std::abs(static_cast<double>(a[i]) / static_cast<double>(na) -
                   static_cast<double>(b[i]) / static_cast<double>(nb)));
  return s.value();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// per-step propagator factors at X_k: E = diag exp(dt u'), A = I + dt grad g_J
void step_factors(const besov::BesovDrift& gj, const besov::DissipativeField& u,
                  std::span<const double> x, double dt, std::vector<double>& gbuf, RowMat& A,
                  Eigen::VectorXd& ediag) {
  const int d = gj.d;
  gj.gradient(x.data(), 0.0, gbuf.data());
  A = dt * Eigen::Map<const RowMat>(gbuf.data(), d, d);
  for (int c = 0; c < d; ++c) {
    A(c, c) += 1.0;
    ediag(c) = std::exp(dt * u_gradient_entry(u, x[c]));
  }
}

}  // namespace

std::span<const double> JacobianPath::jac_at(std::size_t k) const {
  std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
  return {jac.data() + k * dd, dd};
}

std::span<const double> JacobianPath::inv_at(std::size_t k) const {
  std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
  return {inv.data() + k * dd, dd};
}

JacobianPath jacobian_evolve(const sde::SolutionPath& sol, const besov::BesovDrift& drift,
                             const besov::DissipativeField& u) {
  const int d = sol.x.d;
  if (drift.d != d || u.d != d)
    throw std::invalid_argument("jacobian_evolve: dimension mismatch");
  if (sol.j_used > drift.J)
    throw std::invalid_argument("jacobian_evolve: drift misses the solution's truncation level");
  besov::BesovDrift gj = truncated(drift, sol.j_used);

  const std::size_t n = sol.x.grid.n_steps;
  const double dt = sol.x.grid.dt;
  const std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);

  JacobianPath out;
  out.grid = sol.x.grid;
  out.d = d;
  out.jac.assign((n + 1) * dd, 0.0);
  out.inv.assign((n + 1) * dd, 0.0);

  RowMat J = RowMat::Identity(d, d), Jinv = RowMat::Identity(d, d);
  RowMat A(d, d), M(d, d);
  Eigen::VectorXd ediag(d);
  std::vector<double> gbuf(dd);
  auto store = [&](std::size_t k) {
    Eigen::Map<RowMat>(out.jac.data() + k * dd, d, d) = J;
    Eigen::Map<RowMat>(out.inv.data() + k * dd, d, d) = Jinv;
  };
  store(0);

  for (std::size_t k = 0; k < n; ++k) {
    step_factors(gj, u, sol.x.node_view(k), dt, gbuf, A, ediag);
    M.noalias() = ediag.asDiagonal() * A;
    J = M * J;
    Eigen::FullPivLU<RowMat> lu(A);
    if (!lu.isInvertible())
      throw std::runtime_error("jacobian_evolve: inverse blow-up at node " +
                               std::to_string(k + 1));
    Jinv = Jinv * lu.inverse() * ediag.cwiseInverse().asDiagonal();
    store(k + 1);
  }

  double drift_max = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    Eigen::Map<const RowMat> jk(out.jac.data() + k * dd, d, d);
    Eigen::Map<const RowMat> ik(out.inv.data() + k * dd, d, d);
    drift_max = std::max(drift_max, (jk * ik - RowMat::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  out.max_identity_drift = drift_max;
  return out;
}

double jacobian_holder_moment(std::span<const JacobianPath> batch, double exponent) {
  if (batch.empty()) throw std::invalid_argument("jacobian_holder_moment: empty batch");
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw std::invalid_argument("jacobian_holder_moment: exponent must lie in (0, 1]");
  num::KahanSum acc;
  for (const JacobianPath& jp : batch) {
    const std::size_t dd = static_cast<std::size_t>(jp.d) * static_cast<std::size_t>(jp.d);
    std::size_t last = std::min<std::size_t>(
        jp.grid.n_steps, static_cast<std::size_t>(std::llround(1.0 / jp.grid.dt)));
    double sup = 0.0, semi = 0.0;
    auto frob = [&](std::size_t a, std::size_t b) {
      double s = 0.0;
      for (std::size_t i = 0; i < dd; ++i) {
        double diff = jp.jac[a * dd + i] - jp.jac[b * dd + i];
        s += diff * diff;
      }
      return std::sqrt(s);
    };
    for (std::size_t k = 0; k <= last; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < dd; ++i) s += jp.jac[k * dd + i] * jp.jac[k * dd + i];
      sup = std::max(sup, std::sqrt(s));
    }
    for (std::size_t k = 0; k < last; ++k)
      for (std::size_t l = k + 1; l <= last; ++l)
        semi = std::max(semi, frob(l, k) / std::pow(static_cast<double>(l - k) * jp.grid.dt,
                                                    exponent));
    double norm = sup + semi;
    acc.add(norm * norm);
  }
  return acc.value() / static_cast<double>(batch.size());
}

NoiseDerivative noise_derivative(const sde::SolutionPath& sol, const besov::BesovDrift& drift,
                                 const besov::DissipativeField& u, const SampledFunction& v) {
  const int d = sol.x.d;
  if (v.d != d) throw std::invalid_argument("noise_derivative: dimension mismatch");
  if (!v.grid.same_as(sol.x.grid))
    throw std::invalid_argument("noise_derivative: v does not live on the solution grid");
  for (int c = 0; c < d; ++c)
    if (v.at(0, c) != 0.0)
      throw std::invalid_argument("noise_derivative: v must vanish at the origin");

  JacobianPath jp = jacobian_evolve(sol, drift, u);
  besov::BesovDrift gj = truncated(drift, sol.j_used);
  const std::size_t n = sol.x.grid.n_steps;
  const double dt = sol.x.grid.dt;
  const std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);

  NoiseDerivative out;
  out.by_ode = SampledFunction(sol.x.grid, d, true);
  out.by_jacobian = SampledFunction(sol.x.grid, d, true);

  RowMat A(d, d);
  Eigen::VectorXd ediag(d), k1 = Eigen::VectorXd::Zero(d), s = Eigen::VectorXd::Zero(d),
                  dv(d);
  std::vector<double> gbuf(dd);
  for (std::size_t k = 0; k < n; ++k) {
    for (int c = 0; c < d; ++c) dv(c) = v.at(k + 1, c) - v.at(k, c);
    step_factors(gj, u, sol.x.node_view(k), dt, gbuf, A, ediag);
    k1 = ediag.asDiagonal() * (A * k1) + dv;
    for (int c = 0; c < d; ++c) out.by_ode.at(k + 1, c) = k1(c);

    Eigen::Map<const RowMat> ik(jp.inv.data() + (k + 1) * dd, d, d);
    s += ik * dv;
    Eigen::Map<const RowMat> jk(jp.jac.data() + (k + 1) * dd, d, d);
    Eigen::VectorXd k2 = jk * s;
    for (int c = 0; c < d; ++c) out.by_jacobian.at(k + 1, c) = k2(c);
  }

  double scale = 0.0, gap = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    for (int c = 0; c < d; ++c) {
      scale = std::max({scale, std::abs(out.by_ode.at(k, c)), std::abs(out.by_jacobian.at(k, c))});
      gap = std::max(gap, std::abs(out.by_ode.at(k, c) - out.by_jacobian.at(k, c)));
    }
  out.max_rel_discrepancy = scale > 0.0 ? gap / scale : 0.0;
  return out;
}

GirsanovPath girsanov_drift(const sde::SolutionPath& sol, const besov::BesovDrift& drift,
                            const besov::DissipativeField& u) {
  const int d = sol.x.d;
  if (drift.d != d || u.d != d)
    throw std::invalid_argument("girsanov_drift: dimension mismatch");
  if (sol.j_used > drift.J)
    throw std::invalid_argument("girsanov_drift: drift misses the solution's truncation level");
  double H = sol.noise.par.H;
  if (!(H > 0.0 && H < 0.5))
    throw std::invalid_argument("girsanov_drift: requires H < 1/2");

  besov::BesovDrift gj = truncated(drift, sol.j_used);
  const std::size_t n = sol.x.grid.n_steps;
  const double dt = sol.x.grid.dt;

  SampledFunction b(sol.x.grid, d);
  std::vector<double> gval(d), uval(d);
  for (std::size_t k = 0; k <= n; ++k) {
    gj.value(sol.x.node_view(k).data(), 0.0, gval.data());
    u.value(sol.x.node_view(k).data(), uval.data());
    for (int c = 0; c < d; ++c) b.at(k, c) = gval[c] + uval[c];
  }

  GirsanovPath out;
  SampledFunction F = fraccalc::cumulative_trapezoid(b);
  out.h = fraccalc::frac_op_negative(F, H - 0.5, fraccalc::NegKind::derivative);
  double scale = 1.0 / (sol.noise.par.c_H * std::tgamma(H + 0.5));
  for (double& x : out.h.values) x *= scale;

  out.hdot.assign(n * static_cast<std::size_t>(d), 0.0);
  num::KahanSum norm2;
  for (std::size_t k = 0; k < n; ++k)
    for (int c = 0; c < d; ++c) {
      double hd = (out.h.at(k + 1, c) - out.h.at(k, c)) / dt;
      out.hdot[k * static_cast<std::size_t>(d) + c] = hd;
      norm2.add(hd * hd * dt);
    }
  out.w12_norm2 = norm2.value();

  // c_H sum_{j<=k} kappa[k+1-j] delta_j = theta_{k+1} - theta_0, solved forward
  std::vector<double> kappa = core::mvn_kernel_weights(H, dt, n);
  out.shift.assign(n * static_cast<std::size_t>(d), 0.0);
  std::vector<double> delta(n, 0.0);
  for (int c = 0; c < d; ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      double rhs = (sol.theta.at(k + 1, c) - sol.theta.at(0, c)) / sol.noise.par.c_H;
      for (std::size_t j = 0; j < k; ++j) rhs -= kappa[k + 1 - j] * delta[j];
      delta[k] = rhs / kappa[1];
      out.shift[k * static_cast<std::size_t>(d) + c] = delta[k] / dt;
    }
  }
  return out;
}

double girsanov_weight(const sde::SolutionPath& sol, const GirsanovPath& gp) {
  if (!sol.noise.has_driver())
    throw std::invalid_argument("girsanov_weight: noise carries no driver increments");
  if (!gp.h.grid.same_as(sol.x.grid))
    throw std::invalid_argument("girsanov_weight: h does not live on the solution grid");
  const std::size_t n = sol.x.grid.n_steps;
  const std::size_t d = static_cast<std::size_t>(sol.x.d);
  const double dt = sol.x.grid.dt;
  num::KahanSum expo;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t c = 0; c < d; ++c) {
      double s = gp.shift[k * d + c];
      expo.add(s * sol.noise.driver[k * d + c] + 0.5 * s * s * dt);
    }
  return std::exp(-expo.value());
}

NovikovReport novikov_statistic(std::span<const sde::SolutionPath> batch,
                                const besov::BesovDrift& drift,
                                const besov::DissipativeField& u, int n_batches) {
  if (batch.empty()) throw std::invalid_argument("novikov_statistic: empty batch");
  if (n_batches < 2) throw std::invalid_argument("novikov_statistic: need at least 2 batches");
  std::size_t nb = std::min<std::size_t>(static_cast<std::size_t>(n_batches), batch.size());

  NovikovReport rep;
  rep.norms.reserve(batch.size());
  for (const sde::SolutionPath& sol : batch)
    rep.norms.push_back(girsanov_drift(sol, drift, u).w12_norm2);

  rep.batch_means.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    std::size_t lo = b * batch.size() / nb, hi = (b + 1) * batch.size() / nb;
    num::KahanSum s;
    for (std::size_t i = lo; i < hi; ++i) s.add(std::exp(0.5 * rep.norms[i]));
    rep.batch_means[b] = s.value() / static_cast<double>(hi - lo);
  }
  rep.statistic = median_of(rep.batch_means);
  double lo = *std::min_element(rep.batch_means.begin(), rep.batch_means.end());
  double hi = *std::max_element(rep.batch_means.begin(), rep.batch_means.end());
  rep.unstable = !std::isfinite(hi) || hi > 2.0 * lo;
  return rep;
}

EmpiricalMeasure long_run(const sde::SdeConfig& cfg, double T_total, double burn_in,
                          std::size_t thinning, rng::Stream& rs, double box, int bins,
                          double gamma, double past_horizon) {
  if (!(T_total > 0.0)) throw std::invalid_argument("long_run: T_total must be > 0");
  if (!(burn_in >= 0.0 && burn_in < T_total))
    throw std::invalid_argument("long_run: burn_in must lie in [0, T_total)");
  if (thinning < 1) throw std::invalid_argument("long_run: thinning must be >= 1");
  if (!(box > 0.0)) throw std::invalid_argument("long_run: box must be > 0");
  if (bins < 1) throw std::invalid_argument("long_run: bins must be >= 1");
  if (std::abs(cfg.grid.t_start) > 1e-12)
    throw std::invalid_argument("long_run: grid must start at 0");
  const int d = cfg.hurst.d;
  double cells_d = std::pow(static_cast<double>(bins), d);
  if (cells_d > static_cast<double>(1 << 22))
    throw std::invalid_argument("long_run: histogram cell count too large");
  double H = cfg.hurst.H;
  if (gamma <= 0.0) gamma = 0.8 * H;
  if (!(gamma < H)) throw std::invalid_argument("long_run: gamma must lie in (0, H)");

  const double dt = cfg.grid.dt;
  std::size_t n = static_cast<std::size_t>(std::ceil(T_total / dt - 1e-9));
  TimeGrid run(0.0, dt, n);
  sde::SdeConfig c2 = cfg;
  c2.grid = run;
  if (!c2.psi.values.empty() && !c2.psi.grid.same_as(run))
    throw std::invalid_argument("long_run: psi grid must match the run grid");

  core::FbmPath noise = core::sample_fbm_mvn(cfg.hurst, run, past_horizon, rs);
  sde::SolutionPath sol;
  try {
    sol = sde::solve(c2, noise);
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    std::string at;
    auto pos = msg.rfind("step ");
    if (pos != std::string::npos)
      at = " at t = " + std::to_string(std::atof(msg.c_str() + pos + 5) * dt);
    throw std::runtime_error("long_run: blow-up" + at + " (" + msg + ")");
  }

  EmpiricalMeasure m;
  m.d = d;
  m.box = box;
  m.bins = bins;
  m.holder_exponent = gamma;
  std::size_t burn_idx = static_cast<std::size_t>(std::ceil(burn_in / dt - 1e-9));
  for (std::size_t k = burn_idx; k <= n; k += thinning) {
    m.sample_times.push_back(run.node(k));
    for (int c = 0; c < d; ++c) m.samples.push_back(sol.x.at(k, c));
  }
  std::size_t cells = static_cast<std::size_t>(cells_d);
  m.histogram = build_histogram(m.samples, 0, m.count(), d, box, bins, cells);

  std::size_t half = m.count() / 2;
  if (half >= 1 && m.count() - half >= 1) {
    auto h1 = build_histogram(m.samples, 0, half, d, box, bins, cells);
    auto h2 = build_histogram(m.samples, half, m.count(), d, box, bins, cells);
    m.stationarity_l1 = histogram_l1(h1, h2);
  }

  std::size_t wsteps = unit_window_steps(run, "long_run");
  for (std::size_t k0 = burn_idx; k0 + wsteps <= n; k0 += wsteps) {
    double sup = 0.0, semi = 0.0;
    window_norms(sol.x, k0, k0 + wsteps, gamma, &sup, &semi);
    m.window_starts.push_back(run.node(k0));
    m.window_sup.push_back(sup);
    m.window_holder.push_back(semi);
  }
  return m;
}

double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                        MeasureDistance kind) {
  if (a.d != b.d) throw std::invalid_argument("measure_distance: dimension mismatch");
  if (kind == MeasureDistance::histogram_l1) {
    if (a.bins != b.bins || std::abs(a.box - b.box) > 1e-12 * std::max(1.0, std::abs(a.box)) ||
        a.cells() != b.cells() || a.cells() == 0)
      throw std::invalid_argument("measure_distance: incompatible histograms");
    return histogram_l1(a.histogram, b.histogram);
  }
  if (a.count() == 0 || b.count() == 0)
    throw std::invalid_argument("measure_distance: no samples");
  constexpr std::size_t kQuantiles = 512;
  double worst = 0.0;
  std::vector<double> qa(a.count()), qb(b.count());
  for (int c = 0; c < a.d; ++c) {
    for (std::size_t i = 0; i < a.count(); ++i) qa[i] = a.samples[i * a.d + c];
    for (std::size_t i = 0; i < b.count(); ++i) qb[i] = b.samples[i * b.d + c];
    std::sort(qa.begin(), qa.end());
    std::sort(qb.begin(), qb.end());
    num::KahanSum s;
    for (std::size_t q = 0; q < kQuantiles; ++q) {
      double u = (static_cast<double>(q) + 0.5) / kQuantiles;
      double va = qa[std::min(a.count() - 1, static_cast<std::size_t>(u * a.count()))];
      double vb = qb[std::min(b.count() - 1, static_cast<std::size_t>(u * b.count()))];
      s.add(std::abs(va - vb));
    }
    worst = std::max(worst, s.value() / kQuantiles);
  }
  return worst;
}

TightnessTable tightness_report(std::span<const sde::SolutionPath> batch, double gamma,
                                std::span<const double> kappas, std::size_t burn_windows) {
  if (batch.empty()) throw std::invalid_argument("tightness_report: empty batch");
  if (kappas.empty()) throw std::invalid_argument("tightness_report: empty kappa grid");
  for (std::size_t i = 1; i < kappas.size(); ++i)
    if (!(kappas[i] > kappas[i - 1]))
      throw std::invalid_argument("tightness_report: kappa grid must increase");
  if (!(kappas.front() >= 0.0))
    throw std::invalid_argument("tightness_report: kappa must be >= 0");
  double H = batch.front().noise.par.H;
  if (!(gamma > 0.0 && gamma < H))
    throw std::invalid_argument("tightness_report: gamma must lie in (0, H)");
  const TimeGrid& g = batch.front().x.grid;
  for (const sde::SolutionPath& s : batch)
    if (!s.x.grid.same_as(g))
      throw std::invalid_argument("tightness_report: batch is not grid-aligned");

  std::size_t wsteps = unit_window_steps(g, "tightness_report");
  std::size_t nw_total = g.n_steps / wsteps;
  if (burn_windows >= nw_total)
    throw std::invalid_argument("tightness_report: burn_windows leaves no window");
  std::size_t nw = nw_total - burn_windows;

  TightnessTable tab;
  tab.gamma = gamma;
  tab.kappas.assign(kappas.begin(), kappas.end());
  tab.values.assign(nw * kappas.size(), 0.0);

  std::vector<double> norm2(batch.size());
  for (std::size_t w = 0; w < nw; ++w) {
    std::size_t k0 = (burn_windows + w) * wsteps;
    tab.window_starts.push_back(g.node(k0));
    for (std::size_t p = 0; p < batch.size(); ++p) {
      double sup = 0.0, semi = 0.0;
      window_norms(batch[p].x, k0, k0 + wsteps, gamma, &sup, &semi);
      double nrm = sup + semi;
      norm2[p] = nrm * nrm;
    }
    for (std::size_t q = 0; q < kappas.size(); ++q) {
      num::KahanSum s;
      for (double n2 : norm2) s.add(std::exp(kappas[q] * n2));
      tab.values[w * kappas.size() + q] = s.value() / static_cast<double>(batch.size());
    }
  }

  tab.stable.assign(kappas.size(), 0);
  for (std::size_t q = 0; q < kappas.size(); ++q) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool finite = true;
    for (std::size_t w = 0; w < nw; ++w) {
      double v = tab.values[w * kappas.size() + q];
      finite = finite && std::isfinite(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    tab.stable[q] = finite && hi <= 2.0 * lo;
  }
  tab.kappa0 = 0.0;
  for (std::size_t q = 0; q < kappas.size() && tab.stable[q]; ++q) tab.kappa0 = kappas[q];
  return tab;
}

CouplingReport coupling_contraction(const sde::SdeConfig& cfg,
                                    std::span<const std::vector<double>> x0_list,
                                    std::span<const core::FbmPath> noise) {
  if (x0_list.size() < 2)
    throw std::invalid_argument("coupling_contraction: need at least two initial conditions");
  if (noise.empty()) throw std::invalid_argument("coupling_contraction: empty noise batch");
  const int d = cfg.hurst.d;
  for (const std::vector<double>& x0 : x0_list)
    if (static_cast<int>(x0.size()) != d)
      throw std::invalid_argument("coupling_contraction: x0 dimension mismatch");
  if (!zero_amplitude(cfg.drift) &&
      besov::classify_regime(cfg.drift.alpha, cfg.hurst.H).strength !=
          besov::StrengthLabel::strong)
    throw std::invalid_argument(
        "coupling_contraction: uniqueness diagnostics disabled outside the strong regime");

  std::size_t wsteps = unit_window_steps(cfg.grid, "coupling_contraction");
  std::size_t nw = cfg.grid.n_steps / wsteps;
  if (nw == 0) throw std::invalid_argument("coupling_contraction: grid shorter than one window");

  CouplingReport rep;
  for (std::size_t i = 0; i < x0_list.size(); ++i)
    for (std::size_t j = i + 1; j < x0_list.size(); ++j) {
      rep.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        double diff = x0_list[i][c] - x0_list[j][c];
        s += diff * diff;
      }
      rep.initial.push_back(std::sqrt(s));
    }
  for (std::size_t w = 0; w < nw; ++w) rep.window_starts.push_back(cfg.grid.node(w * wsteps));
  rep.curves.assign(rep.pairs.size() * nw, 0.0);

  std::vector<double> ratios;
  std::vector<sde::SolutionPath> sols(x0_list.size());
  for (const core::FbmPath& path : noise) {
    for (std::size_t i = 0; i < x0_list.size(); ++i) {
      sde::SdeConfig ci = cfg;
      ci.x0 = x0_list[i];
      sols[i] = sde::solve(ci, path);
    }
    for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
      const SampledFunction& xa = sols[rep.pairs[p].first].x;
      const SampledFunction& xb = sols[rep.pairs[p].second].x;
      double terminal = 0.0;
      for (std::size_t w = 0; w < nw; ++w) {
        double sup = 0.0;
        for (std::size_t k = w * wsteps; k <= (w + 1) * wsteps; ++k) {
          double s = 0.0;
          for (int c = 0; c < d; ++c) {
            double diff = xa.at(k, c) - xb.at(k, c);
            s += diff * diff;
          }
          sup = std::max(sup, std::sqrt(s));
        }
        rep.curves[p * nw + w] += sup / static_cast<double>(noise.size());
        if (w + 1 == nw) terminal = sup;
      }
      if (rep.initial[p] > 0.0) ratios.push_back(terminal / rep.initial[p]);
    }
  }
  rep.median_ratio = median_of(ratios);
  return rep;
}

}  // namespace fbm::ergodics
