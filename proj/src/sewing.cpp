#include "fbm/sewing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fbm/numerics.hpp"
#include "fbm/rng.hpp"

namespace fbm::sewing {

namespace {

void eval_checked(const Germ& germ, double s, double t, double* out) {
  germ.eval(s, t, out);
  for (int c = 0; c < germ.d; ++c) {
    if (!std::isfinite(out[c])) {
      char msg[128];
      std::snprintf(msg, sizeof(msg), "sew: germ not finite at (s, t) = (%.12g, %.12g)", s, t);
      throw std::runtime_error(msg);
    }
  }
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double eucl(const std::vector<double>& a, const std::vector<double>& b) {
  double s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s2);
}

// one dyadic Riemann sum over [s,t] split into 2^k pieces
std::vector<double> level_sum(const Germ& germ, double s, double t, int k,
                              std::vector<double>* piece_norms = nullptr) {
  const std::size_t n = std::size_t{1} << k;
  std::vector<double> acc(germ.d, 0.0), val(germ.d);
  std::vector<num::KahanSum> sums(germ.d);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s + (t - s) * (static_cast<double>(i) / static_cast<double>(n));
    const double b = s + (t - s) * (static_cast<double>(i + 1) / static_cast<double>(n));
    eval_checked(germ, a, b, val.data());
    for (int c = 0; c < germ.d; ++c) sums[c].add(val[c]);
    if (piece_norms) {
      double s2 = 0.0;
      for (int c = 0; c < germ.d; ++c) s2 += val[c] * val[c];
      piece_norms->push_back(std::sqrt(s2));
    }
  }
  for (int c = 0; c < germ.d; ++c) acc[c] = sums[c].value();
  return acc;
}

struct SimpsonCtx {
  const SmoothedField* g;
  std::span<const double> phi;
  const Curve* curve;
  double s;
  double c_tilde;
  double two_h;
  std::vector<double> x;
};

void integrand(SimpsonCtx& ctx, double r, double* out) {
  ctx.curve->value_at(r, ctx.x.data());
  for (int c = 0; c < ctx.g->d; ++c) ctx.x[c] += ctx.phi[c];
  const double t_heat = ctx.c_tilde * std::pow(std::max(0.0, r - ctx.s), ctx.two_h);
  ctx.g->value(ctx.x.data(), t_heat, out);
}

void simpson(SimpsonCtx& ctx, double a, double b, const std::vector<double>& fa,
             const std::vector<double>& fm, const std::vector<double>& fb, double tol, int depth,
             std::vector<double>& acc) {
  const int d = ctx.g->d;
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  std::vector<double> flm(d), frm(d);
  integrand(ctx, lm, flm.data());
  integrand(ctx, rm, frm.data());
  double worst = 0.0;
  std::vector<double> s1(d), s2(d);
  for (int c = 0; c < d; ++c) {
    s1[c] = (b - a) / 6.0 * (fa[c] + 4.0 * fm[c] + fb[c]);
    const double left = (m - a) / 6.0 * (fa[c] + 4.0 * flm[c] + fm[c]);
    const double right = (b - m) / 6.0 * (fm[c] + 4.0 * frm[c] + fb[c]);
    s2[c] = left + right;
    worst = std::max(worst, std::abs(s2[c] - s1[c]));
  }
  if (worst <= 15.0 * tol || depth >= 24) {
    for (int c = 0; c < d; ++c) acc[c] += s2[c] + (s2[c] - s1[c]) / 15.0;
    return;
  }
  simpson(ctx, a, m, fa, flm, fm, 0.5 * tol, depth + 1, acc);
  simpson(ctx, m, b, fm, frm, fb, 0.5 * tol, depth + 1, acc);
}

}  // namespace

SewingResult sew(const Germ& germ, double s, double t, int levels) {
  if (!germ.eval) throw std::invalid_argument("sew: germ has no evaluator");
  if (germ.d < 1) throw std::invalid_argument("sew: germ dimension must be >= 1");
  if (!(t > s)) throw std::invalid_argument("sew: need t > s");
  if (levels < 2 || levels > 22) throw std::invalid_argument("sew: levels must lie in [2, 22]");

  SewingResult res;
  res.d = germ.d;
  std::vector<double> diag(germ.d), whole(germ.d);
  eval_checked(germ, s, s, diag.data());
  eval_checked(germ, s, t, whole.data());
  const double scale = std::max(1.0, sup_abs(whole));
  for (int c = 0; c < germ.d; ++c)
    if (std::abs(diag[c]) > 1e-12 * scale)
      throw std::invalid_argument("sew: germ does not vanish on the diagonal");

  std::vector<double> prev = whole;
  for (int k = 1; k <= levels; ++k) {
    std::vector<double> cur = level_sum(germ, s, t, k);
    res.increments.push_back(eucl(cur, prev));
    prev = std::move(cur);
  }
  res.limit = prev;

  const std::size_t n = std::size_t{1} << levels;
  res.nodes.resize(n + 1);
  res.values.assign((n + 1) * germ.d, 0.0);
  std::vector<double> val(germ.d);
  std::vector<num::KahanSum> run(germ.d);
  res.nodes[0] = s;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s + (t - s) * (static_cast<double>(i) / static_cast<double>(n));
    const double b = s + (t - s) * (static_cast<double>(i + 1) / static_cast<double>(n));
    eval_checked(germ, a, b, val.data());
    res.nodes[i + 1] = b;
    for (int c = 0; c < germ.d; ++c) {
      run[c].add(val[c]);
      res.values[(i + 1) * germ.d + c] = run[c].value();
    }
  }

  const int tail = (levels + 1) / 2;
  const double floor = 1e-15 * std::max(scale, sup_abs(res.limit));
  std::vector<double> ks, li;
  for (int k = levels - tail + 1; k <= levels; ++k) {
    const double inc = res.increments[k - 1];
    if (inc > floor) {
      ks.push_back(static_cast<double>(k));
      li.push_back(std::log2(inc));
    }
  }
  if (ks.size() < 2) {
    res.exact = true;
    res.rate = std::numeric_limits<double>::infinity();
    res.r2 = 1.0;
  } else {
    const auto fit = num::linfit(ks, li);
    res.rate = -fit.slope;
    res.r2 = fit.r2;
  }
  return res;
}

SmoothedField constant_field(std::vector<double> c) {
  SmoothedField f;
  f.d = static_cast<int>(c.size());
  if (f.d < 1) throw std::invalid_argument("constant_field: empty value");
  f.value = [c = std::move(c)](const double*, double, double* out) {
    std::copy(c.begin(), c.end(), out);
  };
  return f;
}

SmoothedField drift_field(besov::BesovDrift g) {
  SmoothedField f;
  f.d = g.d;
  f.value = [g = std::move(g)](const double* x, double t_heat, double* out) {
    g.value(x, t_heat, out);
  };
  return f;
}

std::vector<double> averaged_field(const SmoothedField& g, std::span<const double> phi_s,
                                   const Curve& mean_curve, const core::HurstParams& par,
                                   double s, double t) {
  if (!g.value) throw std::invalid_argument("averaged_field: field has no evaluator");
  if (static_cast<int>(phi_s.size()) != g.d)
    throw std::invalid_argument("averaged_field: phi_s dimension mismatch");
  if (mean_curve.d != g.d) throw std::invalid_argument("averaged_field: curve dimension mismatch");
  if (!(t >= s)) throw std::invalid_argument("averaged_field: need t >= s");
  if (t == s) return std::vector<double>(g.d, 0.0);

  SimpsonCtx ctx{&g, phi_s, &mean_curve, s, par.c_tilde_H, 2.0 * par.H,
                 std::vector<double>(g.d)};
  std::vector<double> fa(g.d), fm(g.d), fb(g.d);
  integrand(ctx, s, fa.data());
  integrand(ctx, 0.5 * (s + t), fm.data());
  integrand(ctx, t, fb.data());
  double rough = 0.0;
  for (int c = 0; c < g.d; ++c)
    rough = std::max(rough, std::abs((t - s) / 6.0 * (fa[c] + 4.0 * fm[c] + fb[c])));
  std::vector<double> acc(g.d, 0.0);
  simpson(ctx, s, t, fa, fm, fb, 1e-9 * (1.0 + rough), 0, acc);
  return acc;
}

DecayReport decay_sew(const std::function<Germ(double)>& family, std::span<const double> horizons,
                      double lambda, std::span<const double> v_grid, int extra_levels) {
  if (!family) throw std::invalid_argument("decay_sew: missing germ family");
  if (horizons.empty() || v_grid.empty())
    throw std::invalid_argument("decay_sew: empty horizon or V grid");
  if (!(lambda > 0.0)) throw std::invalid_argument("decay_sew: lambda must be > 0");
  if (extra_levels < 2) throw std::invalid_argument("decay_sew: extra_levels must be >= 2");

  DecayReport rep;
  rep.lambda = lambda;
  for (double v : v_grid) {
    if (!(v >= 1.0)) throw std::invalid_argument("decay_sew: V must be >= 1");
    rep.rows.push_back({v, 0.0, 0.0, 0.0});
  }

  for (double hor : horizons) {
    if (!(hor >= 1.0)) throw std::invalid_argument("decay_sew: horizons must be >= 1");
    const Germ germ = family(hor);
    const double s = hor - 1.0, t = hor;
    std::vector<double> whole(germ.d);
    eval_checked(germ, s, t, whole.data());
    double wn = 0.0;
    for (int c = 0; c < germ.d; ++c) wn += whole[c] * whole[c];
    wn = std::sqrt(wn);

    for (auto& row : rep.rows) {
      const int cut = static_cast<int>(std::floor(std::log2(t - s)) + row.v);
      if (cut + extra_levels > 22) throw std::invalid_argument("decay_sew: cut level too deep");
      std::vector<double> piece_norms;
      std::vector<double> prev = level_sum(germ, s, t, cut, &piece_norms);
      double coarse = wn;
      for (double p : piece_norms) coarse += p;

      double local = 0.0;
      for (int k = cut + 1; k <= cut + extra_levels; ++k) {
        std::vector<double> cur = level_sum(germ, s, t, k);
        local += eucl(cur, prev);
        prev = std::move(cur);
      }
      row.local_sum = std::max(row.local_sum, local);
      row.global_bound = std::max(row.global_bound, coarse);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (auto& row : rep.rows) {
    row.total = row.local_sum + row.global_bound;
    if (row.total < best) {
      best = row.total;
      rep.best_v = row.v;
    }
  }
  return rep;
}

double gronwall_bound(double c1, double c2, double c3, double alpha1, double alpha2, double alpha3,
                      double eta, double s, double t, double rho_s_norm, double mu) {
  if (!(alpha1 > 1.0)) throw std::invalid_argument("gronwall_bound: need alpha1 > 1");
  if (!(alpha2 > 0.0 && alpha2 < 1.0))
    throw std::invalid_argument("gronwall_bound: need alpha2 in (0, 1)");
  if (!(eta > 0.5)) throw std::invalid_argument("gronwall_bound: need eta > 1/2");
  if (!(alpha3 >= eta)) throw std::invalid_argument("gronwall_bound: need alpha3 >= eta");
  if (!(alpha1 > eta)) throw std::invalid_argument("gronwall_bound: need alpha1 > eta");
  if (c1 < 0.0 || c2 < 0.0 || c3 < 0.0 || rho_s_norm < 0.0)
    throw std::invalid_argument("gronwall_bound: constants must be >= 0");
  if (!(t > s)) throw std::invalid_argument("gronwall_bound: need t > s");
  if (!(mu > 0.0)) throw std::invalid_argument("gronwall_bound: need mu > 0");

  const double span = t - s;
  const double k = (1.0 > span ? 1.0 : span) *
                   (std::pow(2.0 * c1, 1.0 / (alpha1 - eta)) + std::pow(2.0 * c2, 1.0 / alpha2));
  return std::exp(mu * k) * (rho_s_norm + 2.0 * c3 * std::min(1.0, std::pow(span, alpha3)));
}

GronwallCheck check_gronwall(const SampledFunction& rho, const GronwallHypothesis& hyp, double mu) {
  rho.check();
  const std::size_t n = rho.grid.n_nodes();
  if (n < 3) throw std::invalid_argument("check_gronwall: need >= 3 nodes");

  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = rho.grid.node(i);

  GronwallCheck out;
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s2 = 0.0;
    for (int c = 0; c < rho.d; ++c) s2 += rho.at(i, c) * rho.at(i, c);
    sup = std::max(sup, std::sqrt(s2));
  }
  const double hol = num::holder_seminorm(times, rho.values, rho.d, hyp.eta, 1.0);
  out.lhs = sup + hol;

  double rho_s = 0.0;
  for (int c = 0; c < rho.d; ++c) rho_s += rho.at(0, c) * rho.at(0, c);
  rho_s = std::sqrt(rho_s);
  out.bound = gronwall_bound(hyp.c1, hyp.c2, hyp.c3, hyp.alpha1, hyp.alpha2, hyp.alpha3, hyp.eta,
                             rho.grid.t_start, rho.grid.t_end(), rho_s, mu);

  out.hypothesis_ok = true;
  const std::size_t stride = n > 512 ? n / 512 + 1 : 1;
  for (std::size_t i = 0; i < n && out.hypothesis_ok; i += stride) {
    for (std::size_t j = i + 1; j < n; j += stride) {
      const double gap = times[j] - times[i];
      double d2 = 0.0;
      for (int c = 0; c < rho.d; ++c) {
        const double diff = rho.at(j, c) - rho.at(i, c);
        d2 += diff * diff;
      }
      const double lhs_ij = std::sqrt(d2);
      const double rhs_ij = hol * hyp.c1 * std::pow(gap, hyp.alpha1) +
                            hyp.c2 * sup * std::pow(gap, hyp.alpha2) +
                            hyp.c3 * std::pow(gap, hyp.alpha3);
      if (lhs_ij > rhs_ij * (1.0 + 1e-9) + 1e-15) {
        out.hypothesis_ok = false;
        out.viol_s = times[i];
        out.viol_t = times[j];
        out.viol_ratio = rhs_ij > 0.0 ? lhs_ij / rhs_ij : std::numeric_limits<double>::infinity();
        break;
      }
    }
  }
  out.pass = out.hypothesis_ok && out.lhs <= out.bound;
  return out;
}

GronwallSample make_gronwall_sample(std::uint64_t seed) {
  auto rs = rng::derive_stream(seed, rng::kModuleSewing, 0);
  GronwallSample smp;
  auto& hyp = smp.hyp;
  hyp.eta = 0.55 + 0.35 * rs.uniform();
  hyp.alpha1 = 1.05 + 0.55 * rs.uniform();
  hyp.alpha2 = 0.30 + 0.60 * rs.uniform();
  hyp.alpha3 = hyp.eta + 0.35 * rs.uniform();
  // draw the exponentiated scales directly so exp(mu K) stays moderate
  const double k1 = 0.3 + 2.7 * rs.uniform();
  const double k2 = 0.3 + 2.7 * rs.uniform();
  hyp.c1 = 0.5 * std::pow(k1, hyp.alpha1 - hyp.eta);
  hyp.c2 = 0.5 * std::pow(k2, hyp.alpha2);
  hyp.c3 = 0.2 + 1.8 * rs.uniform();

  const int d = rs.uniform() < 0.5 ? 1 : 2;
  const double t_end = 1.0 + 2.0 * rs.uniform();
  const std::size_t n = 257;
  TimeGrid grid(0.0, t_end / static_cast<double>(n - 1), n - 1);
  SampledFunction rho(grid, d);

  const int modes = 11;
  std::vector<double> amp(modes * d), phase(modes * d);
  for (double& a : amp) a = 0.5 + 0.5 * rs.uniform();
  for (double& p : phase) p = 2.0 * M_PI * rs.uniform();
  std::vector<double> base(d), cusp_amp(d);
  const double t0 = t_end * rs.uniform();
  for (int c = 0; c < d; ++c) {
    const double sign = rs.uniform() < 0.5 ? -1.0 : 1.0;
    base[c] = sign * (0.5 + 0.5 * rs.uniform());
    cusp_amp[c] = hyp.c3 * 0.8 * rs.uniform();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.node(i);
    for (int c = 0; c < d; ++c) {
      double v = base[c] + cusp_amp[c] * std::pow(std::abs(t - t0), hyp.alpha3);
      for (int j = 0; j < modes; ++j)
        v += std::pow(2.0, -hyp.eta * j) * amp[j * d + c] *
             std::cos(std::pow(2.0, j) * t + phase[j * d + c]);
      rho.values[i * d + c] = v;
    }
  }

  // rescale so the increment hypothesis holds with near equality: the first
  // two right-side terms scale with the path, the C3 term does not
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = grid.node(i);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s2 = 0.0;
    for (int c = 0; c < d; ++c) s2 += rho.at(i, c) * rho.at(i, c);
    sup = std::max(sup, std::sqrt(s2));
  }
  const double hol = num::holder_seminorm(times, rho.values, d, hyp.eta, 1.0);

  std::vector<double> num_p, den_p, fix_p;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = times[j] - times[i];
      double d2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = rho.at(j, c) - rho.at(i, c);
        d2 += diff * diff;
      }
      num_p.push_back(std::sqrt(d2));
      den_p.push_back(hol * hyp.c1 * std::pow(gap, hyp.alpha1) +
                      hyp.c2 * sup * std::pow(gap, hyp.alpha2));
      fix_p.push_back(hyp.c3 * std::pow(gap, hyp.alpha3));
    }
  }
  auto worst_ratio = [&](double c) {
    double w = 0.0;
    for (std::size_t p = 0; p < num_p.size(); ++p)
      w = std::max(w, c * num_p[p] / (c * den_p[p] + fix_p[p]));
    return w;
  };
  double lo = 1e-8, hi = 16.0;
  if (worst_ratio(hi) <= 0.98) {
    lo = hi;
  } else {
    for (int it = 0; it < 64; ++it) {
      const double mid = std::sqrt(lo * hi);
      (worst_ratio(mid) <= 0.98 ? lo : hi) = mid;
    }
  }
  for (double& v : rho.values) v *= lo;
  smp.rho = std::move(rho);
  return smp;
}

double calibrate_gronwall_mu(std::uint64_t seed, int n_paths) {
  if (n_paths < 1) throw std::invalid_argument("calibrate_gronwall_mu: need >= 1 path");
  double mu_star = 0.0;
  for (int i = 0; i < n_paths; ++i) {
    const GronwallSample smp = make_gronwall_sample(seed + static_cast<std::uint64_t>(i));
    const auto& hyp = smp.hyp;
    const auto& rho = smp.rho;
    const std::size_t n = rho.grid.n_nodes();
    std::vector<double> times(n);
    for (std::size_t j = 0; j < n; ++j) times[j] = rho.grid.node(j);
    double sup = 0.0, rho_s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s2 = 0.0;
      for (int c = 0; c < rho.d; ++c) s2 += rho.at(j, c) * rho.at(j, c);
      sup = std::max(sup, std::sqrt(s2));
      if (j == 0) rho_s = std::sqrt(s2);
    }
    const double lhs = sup + num::holder_seminorm(times, rho.values, rho.d, hyp.eta, 1.0);
    const double span = rho.grid.t_end() - rho.grid.t_start;
    const double base = rho_s + 2.0 * hyp.c3 * std::min(1.0, std::pow(span, hyp.alpha3));
    const double k = std::max(1.0, span) * (std::pow(2.0 * hyp.c1, 1.0 / (hyp.alpha1 - hyp.eta)) +
                                            std::pow(2.0 * hyp.c2, 1.0 / hyp.alpha2));
    if (lhs > base && k > 0.0) mu_star = std::max(mu_star, std::log(lhs / base) / k);
  }
  return mu_star;
}

}  // namespace fbm::sewing
