#include "fbm/besov.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "fbm/numerics.hpp"

namespace fbm::besov {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// dense 1-d sup search for one output coordinate and one direction subgroup;
// returns {min, max} of sum_j a_j damp_j cos(2^j x + phi_{j,c}) over a period
struct SupMin {
  double lo, hi;
};

SupMin subgroup_extrema(const BesovDrift& g, int c, int k, double t, bool gradient) {
  std::vector<double> amp, frq, phi;
  double peak = 0.0;
  for (int j = 0; j <= g.J; ++j) {
    if (g.direction(j) != k) continue;
    const double f = g.freq(j);
    double a = g.amps[j] * heat_damp(f, t);
    if (gradient) a *= f;
    amp.push_back(a);
    frq.push_back(f);
    phi.push_back(g.phases[static_cast<std::size_t>(j) * g.d + c]);
    peak = std::max(peak, std::abs(a));
  }
  if (amp.empty() || peak == 0.0) return {0.0, 0.0};

  double f_eff = 1.0;
  for (std::size_t m = 0; m < amp.size(); ++m)
    if (std::abs(amp[m]) > 1e-12 * peak) f_eff = std::max(f_eff, frq[m]);
  const std::size_t n =
      std::min<std::size_t>(131072, 64 * static_cast<std::size_t>(std::ceil(f_eff)));

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t m = 0; m < amp.size(); ++m) {
      const double trig = gradient ? -std::sin(frq[m] * x + phi[m]) : std::cos(frq[m] * x + phi[m]);
      s += amp[m] * trig;
    }
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

// sup_x |G_t g| (or of the Jacobian max row norm), exact across directions
// because distinct subgroups read disjoint coordinates
double field_sup(const BesovDrift& g, double t, bool gradient) {
  double best = 0.0;
  for (int c = 0; c < g.d; ++c) {
    double pos = 0.0, neg = 0.0, row = 0.0;
    for (int k = 0; k < g.d; ++k) {
      const SupMin e = subgroup_extrema(g, c, k, t, gradient);
      pos += e.hi;
      neg += -e.lo;
      row += std::max(std::abs(e.lo), std::abs(e.hi));
    }
    best = std::max(best, gradient ? row : std::max(pos, neg));
  }
  return best;
}

}  // namespace

double heat_damp(double k, double t) {
  if (t < 0.0) throw std::invalid_argument("heat_damp: negative smoothing time");
  return std::exp(-0.5 * t * k * k);
}

BesovDrift make_lacunary_drift(double alpha, int J, double A, int d, std::uint64_t seed) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("make_lacunary_drift: alpha must be finite");
  if (J < 0) throw std::invalid_argument("make_lacunary_drift: J must be >= 0");
  if (!(A >= 0.0)) throw std::invalid_argument("make_lacunary_drift: A must be >= 0");
  if (d < 1) throw std::invalid_argument("make_lacunary_drift: d must be >= 1");

  BesovDrift g;
  g.alpha = alpha;
  g.J = J;
  g.A = A;
  g.d = d;
  g.seed = seed;
  g.amps.resize(static_cast<std::size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) g.amps[j] = A * std::pow(2.0, -alpha * j);
  g.phases.resize((static_cast<std::size_t>(J) + 1) * d);
  auto rs = rng::derive_stream(seed, rng::kModuleBesov, 0);
  for (double& p : g.phases) p = kTwoPi * rs.uniform();
  return g;
}

void BesovDrift::value(const double* x, double t, double* out) const {
  for (int c = 0; c < d; ++c) {
    num::KahanSum acc;
    for (int j = 0; j <= J; ++j) {
      const double f = freq(j);
      const double a = amps[j] * heat_damp(f, t);
      acc.add(a * std::cos(f * x[direction(j)] + phases[static_cast<std::size_t>(j) * d + c]));
    }
    out[c] = acc.value();
  }
}

void BesovDrift::gradient(const double* x, double t, double* out) const {
  std::fill(out, out + static_cast<std::size_t>(d) * d, 0.0);
  for (int j = 0; j <= J; ++j) {
    const double f = freq(j);
    const double a = amps[j] * heat_damp(f, t);
    const int k = direction(j);
    for (int c = 0; c < d; ++c) {
      const double arg = f * x[k] + phases[static_cast<std::size_t>(j) * d + c];
      out[static_cast<std::size_t>(c) * d + k] -= a * f * std::sin(arg);
    }
  }
}

double BesovDrift::mode_sup(double t) const {
  num::KahanSum acc;
  for (int j = 0; j <= J; ++j) acc.add(std::abs(amps[j]) * heat_damp(freq(j), t));
  return acc.value();
}

BesovDrift heat_mollify(const BesovDrift& g, double t) {
  BesovDrift out = g;
  for (int j = 0; j <= g.J; ++j) out.amps[j] = g.amps[j] * heat_damp(g.freq(j), t);
  return out;
}

double block_norm(const BesovDrift& g, double alpha_prime) {
  double best = 0.0;
  for (int j = 0; j <= g.J; ++j)
    best = std::max(best, std::pow(2.0, alpha_prime * j) * std::abs(g.amps[j]));
  return best;
}

double block_norm_difference(const BesovDrift& a, const BesovDrift& b, double alpha_prime) {
  if (a.alpha != b.alpha || a.A != b.A || a.d != b.d || a.seed != b.seed)
    throw std::invalid_argument("block_norm_difference: drifts are not from the same family");
  double best = 0.0;
  const int top = std::max(a.J, b.J);
  for (int j = 0; j <= top; ++j) {
    const double aa = j <= a.J ? a.amps[j] : 0.0;
    const double bb = j <= b.J ? b.amps[j] : 0.0;
    best = std::max(best, std::pow(2.0, alpha_prime * j) * std::abs(aa - bb));
  }
  return best;
}

double besov_norm_estimate(const BesovDrift& g, double alpha, double t_lo, double t_hi) {
  if (!(alpha < 0.0)) throw std::invalid_argument("besov_norm_estimate: alpha must be < 0");
  if (!(t_lo > 0.0 && t_hi > t_lo))
    throw std::invalid_argument("besov_norm_estimate: need 0 < t_lo < t_hi");
  constexpr int kTimes = 64;
  double best = 0.0;
  for (int i = 0; i < kTimes; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (kTimes - 1));
    best = std::max(best, std::pow(t, -alpha / 2.0) * field_sup(g, t, false));
  }
  return best;
}

double gradient_sup_estimate(const BesovDrift& g, double t) { return field_sup(g, t, true); }

RegimeLabel classify_regime(double alpha, double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("classify_regime: H must lie in (0, 1)");
  if (!std::isfinite(alpha)) throw std::invalid_argument("classify_regime: alpha must be finite");
  RegimeLabel lab;
  const double crit = 1.0 - 1.0 / H;
  if (std::abs(alpha - crit) <= 1e-12)
    lab.scaling = ScalingLabel::critical;
  else
    lab.scaling = alpha > crit ? ScalingLabel::subcritical : ScalingLabel::supercritical;
  if (alpha > 1.0 - 1.0 / (2.0 * H))
    lab.strength = StrengthLabel::strong;
  else if (alpha > 0.5 - 1.0 / (2.0 * H))
    lab.strength = StrengthLabel::weak;
  else
    lab.strength = StrengthLabel::none;
  return lab;
}

std::string to_string(ScalingLabel s) {
  switch (s) {
    case ScalingLabel::supercritical: return "scaling-supercritical";
    case ScalingLabel::critical: return "scaling-critical";
    case ScalingLabel::subcritical: return "scaling-subcritical";
  }
  throw std::logic_error("to_string: bad scaling label");
}

std::string to_string(StrengthLabel s) {
  switch (s) {
    case StrengthLabel::none: return "none";
    case StrengthLabel::weak: return "weak";
    case StrengthLabel::strong: return "strong";
  }
  throw std::logic_error("to_string: bad strength label");
}

void DissipativeField::value(const double* x, double* out) const {
  for (int c = 0; c < d; ++c) out[c] = lin_coeff * x[c] + pert_amp * std::sin(pert_freq * x[c]);
}

double DissipativeField::lipschitz_pert() const { return std::abs(pert_amp * pert_freq); }

DissipativeField make_dissipative(double lambda, int d, double pert_amp, double pert_freq) {
  if (!(lambda > 0.0)) throw std::invalid_argument("make_dissipative: lambda must be > 0");
  if (d < 1) throw std::invalid_argument("make_dissipative: d must be >= 1");
  DissipativeField u;
  u.lambda = lambda;
  u.lin_coeff = -lambda;
  u.pert_amp = pert_amp;
  u.pert_freq = pert_freq;
  u.d = d;
  return u;
}

ConfiningReport check_confining(const DissipativeField& u, std::size_t sample_count, double box,
                                rng::Stream& rs) {
  if (sample_count == 0) throw std::invalid_argument("check_confining: sample_count must be > 0");
  if (!(box > 0.0)) throw std::invalid_argument("check_confining: box must be > 0");

  const int d = u.d;
  const double lp = u.lipschitz_pert();
  ConfiningReport rep;
  rep.monotone_threshold = -(u.lambda - lp);
  rep.gradient_threshold = u.lambda + lp;
  rep.worst_monotone = -std::numeric_limits<double>::infinity();
  rep.worst_gradient = 0.0;

  std::vector<double> x(d), y(d), ux(d), uy(d);
  std::vector<double> wx_m, wy_m, wx_g, wy_g;
  for (std::size_t i = 0; i < sample_count; ++i) {
    double gap2 = 0.0;
    for (int c = 0; c < d; ++c) {
      x[c] = box * (2.0 * rs.uniform() - 1.0);
      y[c] = box * (2.0 * rs.uniform() - 1.0);
      gap2 += (x[c] - y[c]) * (x[c] - y[c]);
    }
    if (gap2 < 1e-24) continue;
    u.value(x.data(), ux.data());
    u.value(y.data(), uy.data());
    double inner = 0.0, du2 = 0.0;
    for (int c = 0; c < d; ++c) {
      inner += (ux[c] - uy[c]) * (x[c] - y[c]);
      du2 += (ux[c] - uy[c]) * (ux[c] - uy[c]);
    }
    const double mono = inner / gap2;
    const double grad = std::sqrt(du2 / gap2);
    if (mono > rep.worst_monotone) {
      rep.worst_monotone = mono;
      wx_m = x;
      wy_m = y;
    }
    if (grad > rep.worst_gradient) {
      rep.worst_gradient = grad;
      wx_g = x;
      wy_g = y;
    }
  }

  const double tol = 1e-9 * std::max(1.0, u.lambda + lp);
  const bool mono_ok = rep.worst_monotone <= rep.monotone_threshold + tol;
  const bool grad_ok = rep.worst_gradient <= rep.gradient_threshold + tol;
  rep.pass = mono_ok && grad_ok;
  if (!rep.pass) {
    rep.witness_x = mono_ok ? wx_g : wx_m;
    rep.witness_y = mono_ok ? wy_g : wy_m;
  }
  return rep;
}

}  // namespace fbm::besov
