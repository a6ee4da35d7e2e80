#include "fbm/verify.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "fbm/besov.hpp"
#include "fbm/conditioning.hpp"
#include "fbm/core.hpp"
#include "fbm/ergodics.hpp"
#include "fbm/fraccalc.hpp"
#include "fbm/grid.hpp"
#include "fbm/io.hpp"
#include "fbm/numerics.hpp"
#include "fbm/rng.hpp"
#include "fbm/sde.hpp"
#include "fbm/sewing.hpp"

namespace fbm::verify {

namespace {

struct Ctx {
  std::uint64_t seed = 1;
};

std::string num_str(double x) { return io::format_double(x); }

std::string bound(const char* what, double value, double limit) {
  if (std::isfinite(value) && value <= limit) return "";
  std::ostringstream os;
  os << what << " = " << num_str(value) << " exceeds " << num_str(limit);
  return os.str();
}

// --- rng ---

std::string rng_reproducible(const Ctx& ctx) {
  auto a = rng::derive_stream(ctx.seed, 3, 7);
  auto b = rng::derive_stream(ctx.seed, 3, 7);
  for (int k = 0; k < 8; ++k)
    if (a.next_u64() != b.next_u64()) return "rederived stream diverged at draw " + std::to_string(k);
  auto c = rng::derive_stream(ctx.seed, 3, 8);
  auto d = rng::derive_stream(ctx.seed, 3, 7);
  if (c.next_u64() == d.next_u64()) return "distinct indices produced the same first draw";
  return "";
}

std::string rng_uniform_range(const Ctx& ctx) {
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleCli, 1);
  num::KahanSum s;
  for (int k = 0; k < 4096; ++k) {
    double u = rs.uniform();
    if (!(u > 0.0 && u < 1.0)) return "uniform draw outside (0,1): " + num_str(u);
    s.add(u);
  }
  return bound("|mean - 1/2|", std::abs(s.value() / 4096.0 - 0.5), 0.05);
}

std::string rng_gauss_moments(const Ctx& ctx) {
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleCli, 2);
  num::KahanSum s, q;
  const int n = 8192;
  for (int k = 0; k < n; ++k) {
    double g = rs.gauss();
    s.add(g);
    q.add(g * g);
  }
  double mean = s.value() / n;
  double var = q.value() / n - mean * mean;
  if (auto e = bound("|mean|", std::abs(mean), 0.06); !e.empty()) return e;
  return bound("|var - 1|", std::abs(var - 1.0), 0.08);
}

// --- core ---

std::string core_covariance(const Ctx&) {
  auto p = core::make_hurst(0.3, 1);
  for (double t : {0.5, 1.0, 2.0}) {
    double want = std::pow(t, 2.0 * p.H);
    double got = core::fbm_covariance(t, t, p);
    if (std::abs(got - want) > 1e-12 * want)
      return "diagonal at t = " + num_str(t) + ": " + num_str(got) + " vs " + num_str(want);
  }
  if (core::fbm_covariance(0.3, 1.7, p) != core::fbm_covariance(1.7, 0.3, p))
    return "covariance is not symmetric";
  return "";
}

std::string core_exact_variance(const Ctx& ctx) {
  auto p = core::make_hurst(0.25, 1);
  TimeGrid g(0.0, 1.0 / 32.0, 32);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleCore, 1);
  const int n = 512;
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) {
    auto path = core::sample_fbm_exact(p, g, rs);
    double x = path.at(g.n_steps, 0);
    sq[i] = x * x;
  }
  auto ms = num::mean_se(sq);
  double want = core::fbm_covariance(1.0, 1.0, p);
  return bound("|terminal var - analytic|", std::abs(ms.mean - want), 5.0 * ms.se);
}

std::string core_scheme_variance(const Ctx&) {
  // past_horizon 0 samples the zero-past process, whose variance is c~ t^{2H}
  auto p = core::make_hurst(0.25, 1);
  TimeGrid g(0.0, 1.0 / 512.0, 512);
  double ratio = core::mvn_scheme_variance(p, g, 0.0, 1.0) / p.c_tilde_H;
  if (!(ratio > 0.95 && ratio <= 1.0 + 1e-9))
    return "scheme/zero-past variance ratio " + num_str(ratio) + " outside (0.95, 1]";
  return "";
}

std::string core_kernel_decay(const Ctx&) {
  auto w = core::mvn_kernel_weights(0.25, 1.0 / 128.0, 64);
  for (std::size_t j = 1; j + 1 < w.size(); ++j) {
    if (!(w[j] > 0.0)) return "weight " + std::to_string(j) + " not positive";
    if (!(w[j] > w[j + 1])) return "weights not decreasing at lag " + std::to_string(j);
  }
  return "";
}

// --- fraccalc ---

std::string fraccalc_monomial(const Ctx&) {
  TimeGrid g(0.0, 1.0 / 2048.0, 2048);
  SampledFunction f(g, 1, true);
  for (std::size_t k = 0; k <= g.n_steps; ++k) f.at(k, 0) = g.node(k) * g.node(k);
  auto out = fraccalc::frac_integral(f, 0.3);
  double scale = std::tgamma(3.0) / std::tgamma(3.3);
  double worst = 0.0;
  for (std::size_t k = 0; k <= g.n_steps; ++k) {
    double t = g.node(k);
    if (t < 0.25) continue;
    double want = scale * std::pow(t, 2.3);
    worst = std::max(worst, std::abs(out.at(k, 0) - want) / want);
  }
  return bound("monomial relative error", worst, 1e-5);
}

std::string fraccalc_semigroup(const Ctx&) {
  TimeGrid g(0.0, 1.0 / 16384.0, 16384);
  SampledFunction f(g, 1, true);
  for (std::size_t k = 0; k <= g.n_steps; ++k) f.at(k, 0) = g.node(k) * g.node(k);
  auto rep = fraccalc::semigroup_check(f, 0.3, 0.4);
  if (auto e = bound("semigroup deviation", rep.semigroup_dev, 1e-6 * rep.semigroup_scale);
      !e.empty())
    return e;
  return bound("inversion deviation", rep.inversion_dev, 1e-6 * rep.inversion_scale);
}

std::string fraccalc_identity(const Ctx&) {
  TimeGrid g(0.0, 1.0 / 256.0, 256);
  SampledFunction f(g, 1);
  for (std::size_t k = 0; k <= g.n_steps; ++k) f.at(k, 0) = std::cos(2.0 * g.node(k));
  auto out = fraccalc::frac_integral(f, 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k <= g.n_steps; ++k)
    worst = std::max(worst, std::abs(out.at(k, 0) - f.at(k, 0)));
  return bound("order-zero deviation", worst, 1e-12);
}

// --- conditioning ---

std::string cond_kernel(const Ctx&) {
  for (double H : {0.25, 0.4})
    for (double x : {0.1, 1.0, 10.0}) {
      double a = cond::kernel_f(x, H);
      double b = cond::kernel_f_quadrature(x, H);
      if (std::abs(a - b) > 1e-7 * std::abs(b))
        return "kernel mismatch at x = " + num_str(x) + ", H = " + num_str(H);
    }
  return "";
}

std::string cond_prefactor(const Ctx&) {
  if (auto e = bound("|prefactor at H = 1/2|", std::abs(cond::conditioning_prefactor(0.5)), 1e-12);
      !e.empty())
    return e;
  double want = std::cos(0.3 * M_PI) / M_PI;
  return bound("|prefactor at H = 0.3 - closed form|",
               std::abs(cond::conditioning_prefactor(0.3) - want), 1e-14);
}

std::string cond_linearity(const Ctx& ctx) {
  const int nodes = 9;
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleConditioning, 1);
  PastPath w1, w2, w3;
  for (PastPath* w : {&w1, &w2, &w3}) {
    w->d = 1;
    w->t.resize(nodes);
    w->v.assign(nodes, 0.0);
    for (int k = 0; k < nodes; ++k) w->t[k] = -2.0 + 0.25 * k;
  }
  for (int k = 0; k + 1 < nodes; ++k) {
    w1.v[k] = rs.gauss();
    w2.v[k] = rs.gauss();
    w3.v[k] = w1.v[k] + 2.0 * w2.v[k];
  }
  TimeGrid g(0.0, 1.0 / 16.0, 16);
  auto a1 = cond::apply_A(w1, 0.25, g);
  auto a2 = cond::apply_A(w2, 0.25, g);
  auto a3 = cond::apply_A(w3, 0.25, g);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k <= g.n_steps; ++k) {
    double combo = a1.path.at(k, 0) + 2.0 * a2.path.at(k, 0);
    worst = std::max(worst, std::abs(a3.path.at(k, 0) - combo));
    scale = std::max(scale, std::abs(combo));
  }
  return bound("linearity deviation", worst, 1e-10 * (scale + 1.0));
}

// --- besov ---

std::string besov_classify(const Ctx&) {
  using besov::ScalingLabel;
  using besov::StrengthLabel;
  struct Want {
    double alpha;
    ScalingLabel scaling;
    StrengthLabel strength;
  };
  const Want table[] = {
      {-0.5, ScalingLabel::subcritical, StrengthLabel::strong},
      {-1.2, ScalingLabel::subcritical, StrengthLabel::weak},
      {-1.8, ScalingLabel::subcritical, StrengthLabel::none},
      {-3.5, ScalingLabel::supercritical, StrengthLabel::none},
  };
  for (const auto& w : table) {
    auto lab = besov::classify_regime(w.alpha, 0.25);
    if (lab.scaling != w.scaling || lab.strength != w.strength)
      return "regime label at alpha = " + num_str(w.alpha) + " is " + besov::to_string(lab.scaling) +
             "/" + besov::to_string(lab.strength);
  }
  return "";
}

std::string besov_block_norm(const Ctx& ctx) {
  auto g = besov::make_lacunary_drift(-0.7, 5, 1.3, 2, ctx.seed);
  double want = 0.0;
  for (int j = 0; j <= g.J; ++j)
    want = std::max(want, std::pow(2.0, -0.2 * j) * g.amps[j]);
  double got = besov::block_norm(g, -0.2);
  return bound("|block norm - direct maximum|", std::abs(got - want), 1e-12 * want);
}

std::string besov_heat_identity(const Ctx& ctx) {
  auto g = besov::make_lacunary_drift(-0.5, 4, 1.0, 1, ctx.seed + 1);
  auto hm = besov::heat_mollify(g, 0.02);
  for (double x : {0.3, -1.1}) {
    double a = 0.0, b = 0.0;
    hm.value(&x, 0.0, &a);
    g.value(&x, 0.02, &b);
    if (a != b) return "mollified field at x = " + num_str(x) + " is not bitwise reproduced";
  }
  return "";
}

std::string besov_gradient_fd(const Ctx& ctx) {
  auto g = besov::make_lacunary_drift(-0.5, 4, 1.0, 2, ctx.seed + 2);
  const double x[2] = {0.4, -0.2};
  const double t = 0.01;
  std::vector<double> grad(4);
  g.gradient(x, t, grad.data());
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
    xp[k] += h;
    xm[k] -= h;
    double vp[2], vm[2];
    g.value(xp, t, vp);
    g.value(xm, t, vm);
    for (int c = 0; c < 2; ++c) {
      double fd = (vp[c] - vm[c]) / (2.0 * h);
      if (std::abs(grad[2 * c + k] - fd) > 1e-5 * (1.0 + std::abs(fd)))
        return "gradient entry (" + std::to_string(c) + "," + std::to_string(k) +
               ") off finite differences";
    }
  }
  return "";
}

// --- sewing ---

std::string sewing_additive(const Ctx&) {
  sewing::Germ germ;
  germ.d = 1;
  germ.eval = [](double s, double t, double* out) { out[0] = std::sin(2.0 * t) - std::sin(2.0 * s); };
  auto res = sewing::sew(germ, 0.2, 1.7, 8);
  if (!res.exact) return "additive germ not flagged exact";
  double want = std::sin(3.4) - std::sin(0.4);
  return bound("|limit - increment|", std::abs(res.limit[0] - want), 1e-12);
}

std::string sewing_rate(const Ctx&) {
  sewing::Germ germ;
  germ.d = 1;
  germ.eval = [](double s, double t, double* out) { out[0] = std::pow(t - s, 1.5); };
  germ.exponents = {1.5};
  auto res = sewing::sew(germ, 0.0, 1.0, 10);
  if (!(res.rate > 0.35 && res.rate < 0.7))
    return "ladder rate " + num_str(res.rate) + " outside (0.35, 0.7)";
  return "";
}

std::string sewing_gronwall(const Ctx& ctx) {
  for (int k = 0; k < 10; ++k) {
    auto sample = sewing::make_gronwall_sample(ctx.seed + k);
    auto chk = sewing::check_gronwall(sample.rho, sample.hyp);
    if (!chk.hypothesis_ok) return "sample " + std::to_string(k) + " violates its own hypothesis";
    if (!chk.pass)
      return "sample " + std::to_string(k) + ": lhs " + num_str(chk.lhs) + " above bound " +
             num_str(chk.bound);
  }
  return "";
}

// --- sde ---

sde::SdeConfig linear_config(double lambda, std::size_t steps) {
  sde::SdeConfig cfg;
  cfg.hurst = core::make_hurst(0.25, 1);
  cfg.drift = besov::make_lacunary_drift(0.0, 0, 0.0, 1, 0);
  cfg.u = besov::make_dissipative(lambda, 1);
  cfg.x0 = {1.5};
  cfg.grid = TimeGrid(0.0, 1.0 / static_cast<double>(steps), steps);
  return cfg;
}

std::string sde_mollification(const Ctx&) {
  if (sde::mollification_level(0.25, 1.0 / 256.0, 20) != 2)
    return "level at H = 1/4, dt = 1/256 is not 2";
  if (sde::mollification_level(0.4, 1e-9, 3) != 3) return "level does not clamp at j_max";
  return "";
}

std::string sde_linear_recursion(const Ctx& ctx) {
  auto cfg = linear_config(1.0, 64);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleSde, 1);
  auto noise = core::sample_fbm_mvn(cfg.hurst, cfg.grid, 0.0, rs);
  auto sol = sde::solve(cfg, noise);
  double y = cfg.x0[0], worst = 0.0;
  const double dt = cfg.grid.dt;
  for (std::size_t k = 0; k < cfg.grid.n_steps; ++k) {
    y = y - dt * y + (noise.at(k + 1, 0) - noise.at(k, 0));
    worst = std::max(worst, std::abs(sol.x.at(k + 1, 0) - y));
  }
  return bound("recursion deviation", worst, 1e-9);
}

std::string sde_ou_reference(const Ctx& ctx) {
  auto cfg = linear_config(1.0, 64);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleSde, 2);
  auto noise = core::sample_fbm_mvn(cfg.hurst, cfg.grid, 0.0, rs);
  auto sol = sde::solve(cfg, noise);
  auto ou = sde::ou_reference(1.0, noise, SampledFunction{});
  double worst = 0.0;
  for (std::size_t k = 0; k <= cfg.grid.n_steps; ++k) {
    double drop = std::exp(-cfg.grid.node(k));
    worst = std::max(worst, std::abs(sol.x.at(k, 0) - cfg.x0[0] * drop - ou.at(k, 0)));
  }
  return bound("gap to the variation-of-constants path", worst, 0.05);
}

std::string sde_truncation_override(const Ctx& ctx) {
  auto cfg = linear_config(1.0, 64);
  cfg.drift = besov::make_lacunary_drift(-0.5, 4, 0.2, 1, ctx.seed);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleSde, 3);
  auto noise = core::sample_fbm_mvn(cfg.hurst, cfg.grid, 0.0, rs);
  cfg.j_override = 1;
  if (sde::solve(cfg, noise).j_used != 1) return "override level was not honored";
  cfg.j_override = -1;
  int want = sde::mollification_level(cfg.hurst.H, cfg.grid.dt, cfg.drift.J);
  if (sde::solve(cfg, noise).j_used != want) return "default level is not the mollification level";
  return "";
}

// --- ergodics ---

std::string ergodics_jacobian(const Ctx& ctx) {
  sde::SdeConfig cfg;
  cfg.hurst = core::make_hurst(0.25, 2);
  cfg.drift = besov::make_lacunary_drift(0.0, 0, 0.0, 2, 0);
  cfg.u = besov::make_dissipative(0.8, 2);
  cfg.x0 = {0.3, -0.4};
  cfg.grid = TimeGrid(0.0, 1.0 / 128.0, 128);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleErgodics, 1);
  auto noise = core::sample_fbm_mvn(cfg.hurst, cfg.grid, 0.0, rs);
  auto sol = sde::solve(cfg, noise);
  auto jp = ergodics::jacobian_evolve(sol, cfg.drift, cfg.u);
  double worst = 0.0;
  for (std::size_t k = 0; k <= cfg.grid.n_steps; ++k) {
    double want = std::exp(-0.8 * cfg.grid.node(k));
    auto blk = jp.jac_at(k);
    worst = std::max({worst, std::abs(blk[0] - want), std::abs(blk[3] - want), std::abs(blk[1]),
                      std::abs(blk[2])});
  }
  if (auto e = bound("gap to the matrix exponential", worst, 1e-10); !e.empty()) return e;
  return bound("forward-inverse identity drift", jp.max_identity_drift, 1e-10);
}

std::string ergodics_routes(const Ctx& ctx) {
  sde::SdeConfig cfg;
  cfg.hurst = core::make_hurst(0.25, 1);
  cfg.drift = besov::make_lacunary_drift(-0.5, 3, 0.3, 1, ctx.seed);
  cfg.u = besov::make_dissipative(0.7, 1);
  cfg.x0 = {0.4};
  cfg.grid = TimeGrid(0.0, 1.0 / 128.0, 128);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleErgodics, 2);
  auto noise = core::sample_fbm_mvn(cfg.hurst, cfg.grid, 0.0, rs);
  auto sol = sde::solve(cfg, noise);
  SampledFunction v(cfg.grid, 1, true);
  for (std::size_t k = 1; k <= cfg.grid.n_steps; ++k) v.at(k, 0) = std::sin(cfg.grid.node(k));
  auto nd = ergodics::noise_derivative(sol, cfg.drift, cfg.u, v);
  return bound("route discrepancy", nd.max_rel_discrepancy, 1e-9);
}

std::string ergodics_unit_weight(const Ctx& ctx) {
  sde::SdeConfig cfg;
  cfg.hurst = core::make_hurst(0.25, 1);
  cfg.drift = besov::make_lacunary_drift(0.0, 0, 0.0, 1, 0);
  cfg.u.d = 1;
  cfg.x0 = {0.0};
  cfg.grid = TimeGrid(0.0, 1.0 / 64.0, 64);
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleErgodics, 3);
  auto noise = core::sample_fbm_mvn(cfg.hurst, cfg.grid, 0.0, rs);
  auto sol = sde::solve(cfg, noise);
  auto gp = ergodics::girsanov_drift(sol, cfg.drift, cfg.u);
  return bound("|weight - 1| for zero drift",
               std::abs(ergodics::girsanov_weight(sol, gp) - 1.0), 1e-9);
}

std::string ergodics_distances(const Ctx&) {
  ergodics::EmpiricalMeasure m0, m1;
  for (ergodics::EmpiricalMeasure* m : {&m0, &m1}) {
    m->d = 1;
    m->box = 2.0;
    m->bins = 4;
    m->histogram.assign(4, 0);
    m->sample_times = {0, 1, 2, 3, 4};
  }
  m0.histogram[0] = 5;
  m0.samples.assign(5, -1.5);
  m1.histogram[3] = 5;
  m1.samples.assign(5, 1.5);
  double l1 = ergodics::measure_distance(m0, m1, ergodics::MeasureDistance::histogram_l1);
  if (auto e = bound("|L1 - 2| for disjoint masses", std::abs(l1 - 2.0), 1e-12); !e.empty())
    return e;
  double w1 = ergodics::measure_distance(m0, m1, ergodics::MeasureDistance::wasserstein1);
  return bound("|W1 - 3| for point masses", std::abs(w1 - 3.0), 1e-12);
}

// --- cli ---

std::string cli_drift_round_trip(const Ctx& ctx) {
  auto g = besov::make_lacunary_drift(-0.5, 5, 1.3, 2, ctx.seed);
  auto j = io::json::parse(io::drift_to_json(g).dump());
  auto g2 = io::drift_from_json(j);
  if (g2.alpha != g.alpha || g2.J != g.J || g2.A != g.A || g2.d != g.d || g2.seed != g.seed)
    return "scalar fields changed in the round trip";
  if (g2.amps != g.amps) return "amplitudes changed in the round trip";
  if (g2.phases != g.phases) return "phases changed in the round trip";
  return "";
}

std::string cli_double_precision(const Ctx&) {
  for (double x : {1.0 / 3.0, 0.1, 1e-300, 6.02214076e23, 3.14159265358979323846}) {
    std::string s = io::format_double(x);
    if (std::strtod(s.c_str(), nullptr) != x) return "representation \"" + s + "\" does not round-trip";
  }
  return "";
}

std::string cli_unknown_key(const Ctx&) {
  io::json j{{"steps", 1}, {"stepz", 2}};
  try {
    io::require_keys(j, {"steps"}, "config section \"fbm\"");
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).find("stepz") == std::string::npos)
      return "diagnostic does not name the offending key";
    return "";
  }
  return "unknown key was accepted";
}

std::string cli_manifest_round_trip(const Ctx& ctx) {
  io::Manifest m;
  m.subcommand = "solve";
  m.config = io::json{{"schema_version", io::kSchemaVersion}, {"seed", ctx.seed}};
  m.files = {"solution.csv", "drift.json"};
  m.digests = {"00000000deadbeef", "0123456789abcdef"};
  auto m2 = io::manifest_from_json(io::json::parse(io::manifest_to_json(m).dump()));
  if (m2.subcommand != m.subcommand || m2.code_version != m.code_version)
    return "identity fields changed in the round trip";
  if (m2.config != m.config) return "config changed in the round trip";
  if (m2.files != m.files || m2.digests != m.digests) return "output list changed in the round trip";
  return "";
}

std::string cli_table_bytes(const Ctx& ctx) {
  namespace fs = std::filesystem;
  io::Table t;
  t.header = {"t", "x_1"};
  auto rs = rng::derive_stream(ctx.seed, rng::kModuleCli, 9);
  for (int k = 0; k < 32; ++k)
    t.rows.push_back({0.125 * k, rs.gauss()});
  fs::path dir = fs::temp_directory_path() / ("fbm_verify_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  io::write_table(a, t, "csv");
  io::write_table(b, t, "csv");
  std::string da = io::digest_hex(a), db = io::digest_hex(b);
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (da != db) return "identical tables produced different digests";
  return "";
}

std::string cli_past_csv(const Ctx& ctx) {
  namespace fs = std::filesystem;
  PastPath w;
  w.d = 1;
  w.t = {-2.0, -1.0, -0.25, 0.0};
  w.v = {0.7, -0.3, 0.4, 0.0};
  auto table = io::past_table(w);
  if (table.rows.size() != 4 || table.rows[0][0] != -2.0)
    return "past table does not keep the negative times";
  fs::path dir = fs::temp_directory_path() / ("fbm_verify_past_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::string p = (dir / "past.csv").string();
  io::write_table(p, table, "csv");
  std::string digest = io::digest_hex(p);
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (digest.size() != 16) return "digest is not a 64-bit hex string";
  (void)ctx;
  return "";
}

using CheckFn = std::string (*)(const Ctx&);

struct Check {
  const char* name;
  CheckFn fn;
};

struct Suite {
  const char* name;
  std::vector<Check> checks;
};

const std::vector<Suite>& suites() {
  static const std::vector<Suite> table = {
      {"rng",
       {{"derived streams are reproducible and index-separated", rng_reproducible},
        {"uniform draws stay inside the open unit interval", rng_uniform_range},
        {"gaussian moments match the standard normal", rng_gauss_moments}}},
      {"core",
       {{"covariance diagonal carries the variance constant", core_covariance},
        {"exact sampler variance tracks the analytic law", core_exact_variance},
        {"scheme variance approaches the analytic variance", core_scheme_variance},
        {"kernel weights decay monotonically", core_kernel_decay}}},
      {"fraccalc",
       {{"monomial integral matches the closed form", fraccalc_monomial},
        {"semigroup and inversion hold at the noise floor", fraccalc_semigroup},
        {"order zero acts as the identity", fraccalc_identity}}},
      {"conditioning",
       {{"prediction kernel agrees with quadrature", cond_kernel},
        {"operator prefactor closed form and degeneracy", cond_prefactor},
        {"conditional mean operator is linear", cond_linearity}}},
      {"besov",
       {{"regime labels match the scaling boundaries", besov_classify},
        {"dyadic block norm is exact for the lacunary series", besov_block_norm},
        {"heat mollification at time zero is the identity", besov_heat_identity},
        {"gradient matches finite differences", besov_gradient_fd}}},
      {"sewing",
       {{"additive germs sew exactly", sewing_additive},
        {"a three-halves germ sews at rate one half", sewing_rate},
        {"the saturation bound holds on calibrated samples", sewing_gronwall}}},
      {"sde",
       {{"mollification level follows the displacement scale", sde_mollification},
        {"zero drift reduces to the dissipative recursion", sde_linear_recursion},
        {"the solution tracks the variation-of-constants path", sde_ou_reference},
        {"truncation level override is honored", sde_truncation_override}}},
      {"ergodics",
       {{"linear flow jacobian is the matrix exponential", ergodics_jacobian},
        {"derivative routes coincide", ergodics_routes},
        {"zero drift carries unit reweighting", ergodics_unit_weight},
        {"point masses separate under both distances", ergodics_distances}}},
      {"cli",
       {{"drift specs survive the json round trip", cli_drift_round_trip},
        {"doubles print at full precision", cli_double_precision},
        {"unknown keys are rejected by name", cli_unknown_key},
        {"manifests survive the json round trip", cli_manifest_round_trip},
        {"csv tables are byte-stable", cli_table_bytes},
        {"past paths serialize with negative times", cli_past_csv}}},
  };
  return table;
}

CheckResult run_check(const Check& c, const Ctx& ctx, const std::string& prefix) {
  CheckResult res;
  res.name = prefix + c.name;
  try {
    res.detail = c.fn(ctx);
  } catch (const std::exception& e) {
    res.detail = std::string("exception: ") + e.what();
  }
  res.pass = res.detail.empty();
  return res;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& s : suites()) names.push_back(s.name);
  names.push_back("all");
  return names;
}

SuiteReport run_suite(const std::string& suite, std::uint64_t master_seed) {
  Ctx ctx{master_seed};
  SuiteReport report;
  report.suite = suite;
  if (suite == "all") {
    for (const auto& s : suites())
      for (const auto& c : s.checks)
        report.checks.push_back(run_check(c, ctx, std::string(s.name) + "/"));
  } else {
    const Suite* found = nullptr;
    for (const auto& s : suites())
      if (suite == s.name) found = &s;
    if (!found) throw std::invalid_argument("verify: unknown suite \"" + suite + "\"");
    for (const auto& c : found->checks) report.checks.push_back(run_check(c, ctx, ""));
  }
  report.passed = true;
  for (const auto& c : report.checks)
    if (!c.pass) report.passed = false;
  return report;
}

}  // namespace fbm::verify
