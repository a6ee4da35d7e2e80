#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbm/conditioning.hpp"
#include "fbm/core.hpp"
#include "fbm/ergodics.hpp"
#include "fbm/io.hpp"
#include "fbm/numerics.hpp"
#include "fbm/rng.hpp"
#include "fbm/sde.hpp"
#include "fbm/sewing.hpp"
#include "fbm/verify.hpp"

namespace fs = std::filesystem;
using fbm::io::json;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  std::string format = "csv";
  std::string suite = "all";
};

void diag(const char* category, const std::string& message, int code, const std::string& sub) {
  json j{{"error", json{{"category", category}, {"message", message}, {"exit_code", code}}}};
  if (!sub.empty()) j["error"]["subcommand"] = sub;
  std::cerr << j.dump() << std::endl;
}

json load_config(const Options& opt, const std::string& subcommand) {
  if (opt.config_path.empty())
    throw std::invalid_argument("config: --config is required for " + subcommand);
  json cfg = fbm::io::load_json_file(opt.config_path);
  if (cfg.is_object() && cfg.contains("subcommand") && cfg.contains("config")) {
    auto man = fbm::io::manifest_from_json(cfg);  // replay an emitted manifest
    if (man.subcommand != subcommand)
      throw std::invalid_argument("config: manifest was recorded for subcommand \"" +
                                  man.subcommand + "\"");
    cfg = man.config;
  }
  fbm::io::require_keys(cfg,
                        {"schema_version", "seed", "constants", "fbm", "drift", "u", "solve",
                         "classify", "ergodic", "couple", "tightness", "girsanov"},
                        "config");
  if (fbm::io::req_int(cfg, "schema_version", "config") != fbm::io::kSchemaVersion)
    throw std::invalid_argument("config: schema_version must be " +
                                std::to_string(fbm::io::kSchemaVersion));
  if (cfg.contains("constants"))
    fbm::io::require_keys(cfg["constants"], {"c_h", "c_tilde_h", "c_one_minus_h", "gronwall_mu"},
                          "config section \"constants\"");
  return cfg;
}

const json& section(const json& cfg, const std::string& name) {
  auto it = cfg.find(name);
  if (it == cfg.end()) throw std::invalid_argument("config: missing section \"" + name + "\"");
  if (!it->is_object())
    throw std::invalid_argument("config: section \"" + name + "\" must be an object");
  return *it;
}

json constants_json(const fbm::core::HurstParams& p) {
  return json{{"c_h", p.c_H},
              {"c_tilde_h", p.c_tilde_H},
              {"c_one_minus_h", fbm::cond::c_one_minus_h(p.H)},
              {"gronwall_mu", fbm::sewing::kGronwallMu}};
}

// effective config plus manifest assembly shared by every subcommand
struct RunContext {
  const Options& opt;
  std::uint64_t seed;
  json effective;
  fbm::io::Manifest man;

  RunContext(const json& cfg, const Options& o, const std::string& sub) : opt(o) {
    seed = o.seed_given ? o.seed : fbm::io::opt_u64(cfg, "seed", 1, "config");
    effective = cfg;
    effective["seed"] = seed;
    man.subcommand = sub;
  }

  void constants(const fbm::core::HurstParams& p) { effective["constants"] = constants_json(p); }

  void emit_table(const std::string& stem, const fbm::io::Table& t) {
    std::string name = stem + "." + opt.format;
    fbm::io::write_table(opt.out_dir + "/" + name, t, opt.format);
    fbm::io::add_output(man, opt.out_dir, name);
  }

  void emit_json(const std::string& name, const json& j) {
    fbm::io::save_json_file(opt.out_dir + "/" + name, j);
    fbm::io::add_output(man, opt.out_dir, name);
  }

  void close() {
    man.config = effective;
    fbm::io::write_manifest(opt.out_dir, man);
  }
};

struct NoisePlan {
  fbm::core::HurstParams hurst;
  fbm::TimeGrid grid;
  double past_horizon = 0.0;
  std::string sampler = "hybrid";
  std::int64_t paths = 1;
};

NoisePlan noise_plan(const json& cfg) {
  const std::string where = "config section \"fbm\"";
  const json& sec = section(cfg, "fbm");
  fbm::io::require_keys(sec, {"h", "dimension", "horizon", "steps", "paths", "sampler",
                              "past_horizon"},
                        where);
  NoisePlan plan;
  double h = fbm::io::req_double(sec, "h", where);
  auto d = fbm::io::opt_int(sec, "dimension", 1, where);
  if (d < 1 || d > 16)
    throw std::invalid_argument(where + ": key \"dimension\" must lie in [1, 16]");
  plan.hurst = fbm::core::make_hurst(h, static_cast<int>(d));
  double horizon = fbm::io::opt_double(sec, "horizon", 1.0, where);
  if (!(horizon > 0.0)) throw std::invalid_argument(where + ": key \"horizon\" must be > 0");
  auto steps = fbm::io::req_int(sec, "steps", where);
  if (steps < 1 || steps > (1 << 22))
    throw std::invalid_argument(where + ": key \"steps\" must lie in [1, 2^22]");
  plan.grid = fbm::TimeGrid(0.0, horizon / static_cast<double>(steps),
                            static_cast<std::size_t>(steps));
  plan.past_horizon = fbm::io::opt_double(sec, "past_horizon", 0.0, where);
  if (plan.past_horizon < 0.0)
    throw std::invalid_argument(where + ": key \"past_horizon\" must be >= 0");
  plan.sampler = fbm::io::opt_string(sec, "sampler", "hybrid", where);
  if (plan.sampler != "exact" && plan.sampler != "hybrid")
    throw std::invalid_argument(where + ": key \"sampler\" must be \"exact\" or \"hybrid\"");
  plan.paths = fbm::io::opt_int(sec, "paths", 1, where);
  if (plan.paths < 1 || plan.paths > 4096)
    throw std::invalid_argument(where + ": key \"paths\" must lie in [1, 4096]");
  return plan;
}

fbm::besov::BesovDrift drift_from_config(const json& cfg, int d) {
  if (!cfg.contains("drift")) return fbm::besov::make_lacunary_drift(0.0, 0, 0.0, d, 0);
  const std::string where = "config section \"drift\"";
  const json& sec = section(cfg, "drift");
  fbm::io::require_keys(sec, {"alpha", "j", "amplitude", "seed", "file"}, where);
  if (sec.contains("file")) {
    if (sec.size() != 1)
      throw std::invalid_argument(where + ": key \"file\" excludes inline drift keys");
    auto g = fbm::io::drift_from_json(
        fbm::io::load_json_file(fbm::io::opt_string(sec, "file", "", where)));
    if (g.d != d)
      throw std::invalid_argument(where + ": drift dimension does not match fbm.dimension");
    return g;
  }
  double alpha = fbm::io::req_double(sec, "alpha", where);
  auto J = fbm::io::req_int(sec, "j", where);
  if (J < 0 || J > 30) throw std::invalid_argument(where + ": key \"j\" must lie in [0, 30]");
  double A = fbm::io::opt_double(sec, "amplitude", 1.0, where);
  std::uint64_t seed = fbm::io::opt_u64(sec, "seed", 1, where);
  return fbm::besov::make_lacunary_drift(alpha, static_cast<int>(J), A, d, seed);
}

fbm::besov::DissipativeField u_from_config(const json& cfg, int d) {
  if (!cfg.contains("u")) {
    fbm::besov::DissipativeField z;
    z.d = d;
    return z;
  }
  const std::string where = "config section \"u\"";
  const json& sec = section(cfg, "u");
  fbm::io::require_keys(sec, {"lambda", "pert_amp", "pert_freq"}, where);
  return fbm::besov::make_dissipative(fbm::io::req_double(sec, "lambda", where), d,
                                      fbm::io::opt_double(sec, "pert_amp", 0.0, where),
                                      fbm::io::opt_double(sec, "pert_freq", 0.0, where));
}

fbm::sde::SdeConfig sde_from_config(const json& cfg, const NoisePlan& plan) {
  fbm::sde::SdeConfig sc;
  sc.hurst = plan.hurst;
  sc.grid = plan.grid;
  sc.drift = drift_from_config(cfg, plan.hurst.d);
  sc.u = u_from_config(cfg, plan.hurst.d);
  sc.x0.assign(static_cast<std::size_t>(plan.hurst.d), 0.0);
  if (cfg.contains("solve")) {
    const std::string where = "config section \"solve\"";
    const json& sec = section(cfg, "solve");
    fbm::io::require_keys(sec, {"x0", "scheme", "j_override"}, where);
    sc.x0 = fbm::io::req_double_array(sec, "x0", where);
    if (sc.x0.size() != static_cast<std::size_t>(plan.hurst.d))
      throw std::invalid_argument(where + ": key \"x0\" must hold fbm.dimension entries");
    std::string scheme = fbm::io::opt_string(sec, "scheme", "euler", where);
    if (scheme == "euler")
      sc.scheme = fbm::sde::Scheme::euler;
    else if (scheme == "averaged")
      sc.scheme = fbm::sde::Scheme::averaged;
    else
      throw std::invalid_argument(where + ": key \"scheme\" must be \"euler\" or \"averaged\"");
    auto jo = fbm::io::opt_int(sec, "j_override", -1, where);
    if (jo < -1 || jo > 64)
      throw std::invalid_argument(where + ": key \"j_override\" must lie in [-1, 64]");
    sc.j_override = static_cast<int>(jo);
  }
  return sc;
}

fbm::core::FbmPath make_noise(const NoisePlan& plan, const fbm::TimeGrid& grid,
                              std::uint64_t seed, std::uint64_t index) {
  auto rs = fbm::rng::derive_stream(seed, fbm::rng::kModuleCli, index);
  if (plan.sampler == "exact") return fbm::core::sample_fbm_exact(plan.hurst, grid, rs);
  return fbm::core::sample_fbm_mvn(plan.hurst, grid, plan.past_horizon, rs);
}

std::string scaling_word(fbm::besov::ScalingLabel s) {
  switch (s) {
    case fbm::besov::ScalingLabel::supercritical: return "supercritical";
    case fbm::besov::ScalingLabel::critical: return "critical";
    case fbm::besov::ScalingLabel::subcritical: return "subcritical";
  }
  throw std::logic_error("scaling_word: bad label");
}

std::string pad_name(const char* stem, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04zu", stem, index);
  return buf;
}

int run_classify(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "classify");
  const std::string where = "config section \"classify\"";
  const json& sec = section(cfg, "classify");
  fbm::io::require_keys(sec, {"h", "alpha"}, where);
  double h = fbm::io::req_double(sec, "h", where);
  double alpha = fbm::io::req_double(sec, "alpha", where);
  auto hp = fbm::core::make_hurst(h, 1);
  auto lab = fbm::besov::classify_regime(alpha, h);
  rc.constants(hp);
  rc.emit_json("classification.json", json{{"h", h},
                                           {"alpha", alpha},
                                           {"scaling", scaling_word(lab.scaling)},
                                           {"wellposedness", fbm::besov::to_string(lab.strength)}});
  rc.close();
  return 0;
}

int run_sample_fbm(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "sample-fbm");
  auto plan = noise_plan(cfg);
  rc.constants(plan.hurst);
  const auto n = static_cast<std::size_t>(plan.paths);
  std::vector<fbm::core::FbmPath> batch(n);
  fbm::num::parallel_for(n, opt.threads,
                         [&](std::size_t i) { batch[i] = make_noise(plan, plan.grid, rc.seed, i); });
  std::vector<double> second(static_cast<std::size_t>(plan.hurst.d), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    rc.emit_table(pad_name("fbm", i), fbm::io::path_table(batch[i]));
    for (int c = 0; c < plan.hurst.d; ++c) {
      double x = batch[i].at(plan.grid.n_steps, c);
      second[static_cast<std::size_t>(c)] += x * x / static_cast<double>(n);
    }
  }
  double target = plan.sampler == "exact"
                      ? fbm::core::fbm_covariance(plan.grid.t_end(), plan.grid.t_end(), plan.hurst)
                      : fbm::core::mvn_scheme_variance(plan.hurst, plan.grid, plan.past_horizon,
                                                       plan.grid.t_end());
  rc.emit_json("summary.json", json{{"paths", n},
                                    {"h", plan.hurst.H},
                                    {"dimension", plan.hurst.d},
                                    {"sampler", plan.sampler},
                                    {"t_end", plan.grid.t_end()},
                                    {"terminal_second_moment", second},
                                    {"target_variance", target}});
  rc.close();
  return 0;
}

int run_solve(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "solve");
  auto plan = noise_plan(cfg);
  auto sc = sde_from_config(cfg, plan);
  rc.constants(plan.hurst);
  auto noise = make_noise(plan, plan.grid, rc.seed, 0);
  auto sol = fbm::sde::solve(sc, noise);
  rc.emit_table("solution", fbm::io::solution_table(sol));
  rc.emit_json("drift.json", fbm::io::drift_to_json(sc.drift));
  rc.emit_json("report.json",
               json{{"j_used", sol.j_used},
                    {"t_end", plan.grid.t_end()},
                    {"terminal", std::vector<double>(sol.x.node_view(plan.grid.n_steps).begin(),
                                                     sol.x.node_view(plan.grid.n_steps).end())}});
  rc.close();
  return 0;
}

int run_ergodic(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "ergodic-run");
  auto plan = noise_plan(cfg);
  auto sc = sde_from_config(cfg, plan);
  rc.constants(plan.hurst);
  const std::string where = "config section \"ergodic\"";
  const json& sec = section(cfg, "ergodic");
  fbm::io::require_keys(
      sec, {"t_total", "burn_in", "thinning", "box", "bins", "gamma", "export_samples"}, where);
  double t_total = fbm::io::req_double(sec, "t_total", where);
  double burn_in = fbm::io::opt_double(sec, "burn_in", 0.0, where);
  auto thinning = fbm::io::opt_int(sec, "thinning", 1, where);
  if (thinning < 1) throw std::invalid_argument(where + ": key \"thinning\" must be >= 1");
  double box = fbm::io::opt_double(sec, "box", 4.0, where);
  auto bins = fbm::io::opt_int(sec, "bins", 64, where);
  if (bins < 1 || bins > 4096)
    throw std::invalid_argument(where + ": key \"bins\" must lie in [1, 4096]");
  double gamma = fbm::io::opt_double(sec, "gamma", -1.0, where);
  bool export_samples = fbm::io::opt_bool(sec, "export_samples", false, where);
  auto rs = fbm::rng::derive_stream(rc.seed, fbm::rng::kModuleCli, 0);
  auto m = fbm::ergodics::long_run(sc, t_total, burn_in, static_cast<std::size_t>(thinning), rs,
                                   box, static_cast<int>(bins), gamma, plan.past_horizon);
  rc.emit_table("histogram", fbm::io::histogram_table(m));
  std::vector<double> mean(static_cast<std::size_t>(m.d), 0.0), second(mean);
  for (std::size_t s = 0; s < m.count(); ++s)
    for (int c = 0; c < m.d; ++c) {
      double x = m.samples[s * static_cast<std::size_t>(m.d) + c];
      mean[static_cast<std::size_t>(c)] += x / static_cast<double>(m.count());
      second[static_cast<std::size_t>(c)] += x * x / static_cast<double>(m.count());
    }
  fbm::num::KahanSum sup_acc, holder_acc;
  for (double v : m.window_sup) sup_acc.add(v);
  for (double v : m.window_holder) holder_acc.add(v);
  const double nw = m.window_starts.empty() ? 1.0 : static_cast<double>(m.window_starts.size());
  rc.emit_json("report.json", json{{"count", m.count()},
                                   {"stationarity_l1", m.stationarity_l1},
                                   {"holder_exponent", m.holder_exponent},
                                   {"windows", m.window_starts.size()},
                                   {"window_sup_mean", sup_acc.value() / nw},
                                   {"window_holder_mean", holder_acc.value() / nw},
                                   {"sample_mean", mean},
                                   {"sample_second_moment", second}});
  if (export_samples) {
    fbm::io::Table t;
    t.header.push_back("t");
    for (int c = 0; c < m.d; ++c) t.header.push_back("x_" + std::to_string(c + 1));
    for (std::size_t s = 0; s < m.count(); ++s) {
      std::vector<double> row{m.sample_times[s]};
      for (int c = 0; c < m.d; ++c) row.push_back(m.samples[s * static_cast<std::size_t>(m.d) + c]);
      t.rows.push_back(std::move(row));
    }
    rc.emit_table("samples", t);
  }
  rc.close();
  return 0;
}

int run_couple(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "couple");
  auto plan = noise_plan(cfg);
  auto sc = sde_from_config(cfg, plan);
  rc.constants(plan.hurst);
  const std::string where = "config section \"couple\"";
  const json& sec = section(cfg, "couple");
  fbm::io::require_keys(sec, {"x0_list"}, where);
  auto it = sec.find("x0_list");
  if (it == sec.end() || !it->is_array() || it->size() < 2)
    throw std::invalid_argument(where + ": key \"x0_list\" must hold >= 2 start points");
  std::vector<std::vector<double>> x0s;
  for (const auto& e : *it) {
    if (!e.is_array() || e.size() != static_cast<std::size_t>(plan.hurst.d))
      throw std::invalid_argument(where + ": each start point must hold fbm.dimension numbers");
    x0s.push_back(e.get<std::vector<double>>());
  }
  const auto n = static_cast<std::size_t>(plan.paths);
  std::vector<fbm::core::FbmPath> noise(n);
  fbm::num::parallel_for(n, opt.threads,
                         [&](std::size_t i) { noise[i] = make_noise(plan, plan.grid, rc.seed, i); });
  auto rep = fbm::ergodics::coupling_contraction(sc, x0s, noise);
  fbm::io::Table t;
  t.header = {"pair_first", "pair_second", "window_start", "mean_sup_distance"};
  for (std::size_t p = 0; p < rep.pairs.size(); ++p)
    for (std::size_t w = 0; w < rep.window_starts.size(); ++w)
      t.rows.push_back({static_cast<double>(rep.pairs[p].first),
                        static_cast<double>(rep.pairs[p].second), rep.window_starts[w],
                        rep.curves[p * rep.window_starts.size() + w]});
  rc.emit_table("curves", t);
  rc.emit_json("report.json", json{{"median_ratio", rep.median_ratio},
                                   {"pairs", rep.pairs.size()},
                                   {"windows", rep.window_starts.size()},
                                   {"initial", rep.initial}});
  rc.close();
  return 0;
}

int run_tightness(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "tightness");
  auto plan = noise_plan(cfg);
  rc.constants(plan.hurst);
  const std::string where = "config section \"tightness\"";
  const json& sec = section(cfg, "tightness");
  fbm::io::require_keys(sec, {"t_total", "paths", "burn_windows", "gamma", "kappas"}, where);
  double t_total = fbm::io::req_double(sec, "t_total", where);
  if (!(t_total > 0.0)) throw std::invalid_argument(where + ": key \"t_total\" must be > 0");
  auto paths = fbm::io::opt_int(sec, "paths", 16, where);
  if (paths < 1 || paths > 4096)
    throw std::invalid_argument(where + ": key \"paths\" must lie in [1, 4096]");
  auto burn = fbm::io::opt_int(sec, "burn_windows", 0, where);
  if (burn < 0) throw std::invalid_argument(where + ": key \"burn_windows\" must be >= 0");
  double gamma = fbm::io::opt_double(sec, "gamma", -1.0, where);
  if (gamma < 0.0) gamma = 0.8 * plan.hurst.H;
  auto kappas = fbm::io::req_double_array(sec, "kappas", where);
  auto steps = static_cast<std::size_t>(std::ceil(t_total / plan.grid.dt - 1e-9));
  if (steps < 1 || steps > (1u << 22))
    throw std::invalid_argument(where + ": t_total / dt must lie in [1, 2^22]");
  fbm::TimeGrid grid(0.0, plan.grid.dt, steps);
  auto sc = sde_from_config(cfg, plan);
  sc.grid = grid;
  const auto n = static_cast<std::size_t>(paths);
  std::vector<fbm::sde::SolutionPath> batch(n);
  fbm::num::parallel_for(n, opt.threads, [&](std::size_t i) {
    auto noise = make_noise(plan, grid, rc.seed, i);
    batch[i] = fbm::sde::solve(sc, noise);
  });
  auto rep = fbm::ergodics::tightness_report(batch, gamma, kappas,
                                             static_cast<std::size_t>(burn));
  fbm::io::Table t;
  t.header = {"window_start", "kappa", "value"};
  for (std::size_t w = 0; w < rep.window_starts.size(); ++w)
    for (std::size_t k = 0; k < rep.kappas.size(); ++k)
      t.rows.push_back(
          {rep.window_starts[w], rep.kappas[k], rep.values[w * rep.kappas.size() + k]});
  rc.emit_table("table", t);
  std::vector<bool> stable(rep.stable.begin(), rep.stable.end());
  rc.emit_json("report.json", json{{"kappa0", rep.kappa0},
                                   {"gamma", rep.gamma},
                                   {"kappas", rep.kappas},
                                   {"stable", stable},
                                   {"windows", rep.window_starts.size()}});
  rc.close();
  return 0;
}

int run_girsanov(const json& cfg, const Options& opt) {
  RunContext rc(cfg, opt, "girsanov");
  auto plan = noise_plan(cfg);
  auto sc = sde_from_config(cfg, plan);
  rc.constants(plan.hurst);
  if (plan.sampler != "hybrid")
    throw std::invalid_argument(
        "config: girsanov requires the hybrid sampler (driver increments)");
  std::int64_t paths = 256;
  if (cfg.contains("girsanov")) {
    const std::string where = "config section \"girsanov\"";
    const json& sec = section(cfg, "girsanov");
    fbm::io::require_keys(sec, {"paths"}, where);
    paths = fbm::io::opt_int(sec, "paths", 256, where);
    if (paths < 2 || paths > 65536)
      throw std::invalid_argument(where + ": key \"paths\" must lie in [2, 65536]");
  }
  const auto n = static_cast<std::size_t>(paths);
  std::vector<fbm::sde::SolutionPath> batch(n);
  std::vector<double> w12(n), weight(n);
  fbm::num::parallel_for(n, opt.threads, [&](std::size_t i) {
    auto noise = make_noise(plan, plan.grid, rc.seed, i);
    batch[i] = fbm::sde::solve(sc, noise);
    auto gp = fbm::ergodics::girsanov_drift(batch[i], sc.drift, sc.u);
    w12[i] = gp.w12_norm2;
    weight[i] = fbm::ergodics::girsanov_weight(batch[i], gp);
  });
  fbm::io::Table t;
  t.header = {"path", "w12_norm2", "weight"};
  for (std::size_t i = 0; i < n; ++i)
    t.rows.push_back({static_cast<double>(i), w12[i], weight[i]});
  rc.emit_table("weights", t);
  auto nov = fbm::ergodics::novikov_statistic(batch, sc.drift, sc.u);
  auto wm = fbm::num::mean_se(weight);
  const int d = plan.hurst.d;
  std::vector<double> rw_mean(static_cast<std::size_t>(d), 0.0), rw_second(rw_mean);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) {
      double x = batch[i].x.at(plan.grid.n_steps, c);
      rw_mean[static_cast<std::size_t>(c)] += weight[i] * x / static_cast<double>(n);
      rw_second[static_cast<std::size_t>(c)] += weight[i] * x * x / static_cast<double>(n);
    }
  double var = fbm::core::mvn_scheme_variance(plan.hurst, plan.grid, plan.past_horizon,
                                              plan.grid.t_end());
  std::vector<double> dl_mean(sc.x0), dl_second(static_cast<std::size_t>(d), 0.0);
  for (int c = 0; c < d; ++c)
    dl_second[static_cast<std::size_t>(c)] = sc.x0[static_cast<std::size_t>(c)] *
                                                 sc.x0[static_cast<std::size_t>(c)] +
                                             var;
  rc.emit_json("report.json", json{{"paths", n},
                                   {"mean_weight", wm.mean},
                                   {"mean_weight_se", wm.se},
                                   {"novikov_statistic", nov.statistic},
                                   {"novikov_unstable", nov.unstable},
                                   {"reweighted_mean", rw_mean},
                                   {"reweighted_second_moment", rw_second},
                                   {"driftless_mean", dl_mean},
                                   {"driftless_second_moment", dl_second}});
  rc.close();
  return 0;
}

int run_verify(const Options& opt) {
  json cfg = opt.config_path.empty() ? json{{"schema_version", fbm::io::kSchemaVersion}}
                                     : load_config(opt, "verify");
  RunContext rc(cfg, opt, "verify");
  rc.effective["constants"] = json{{"gronwall_mu", fbm::sewing::kGronwallMu}};
  auto rep = fbm::verify::run_suite(opt.suite, rc.seed);
  json checks = json::array();
  int passed = 0;
  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name
              << (c.pass ? "" : ": " + c.detail) << "\n";
    checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    passed += c.pass ? 1 : 0;
  }
  std::cout << "verify " << rep.suite << ": " << passed << "/" << rep.checks.size()
            << " checks passed\n";
  rc.emit_json("verify_" + rep.suite + ".json",
               json{{"suite", rep.suite}, {"passed", rep.passed}, {"checks", checks}});
  rc.close();
  if (!rep.passed) {
    diag("acceptance", "verify " + rep.suite + ": " + std::to_string(rep.checks.size() - passed) +
                           " checks failed",
         3, "verify");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"fractional-noise experiment driver"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"sample-fbm", "sample fractional Brownian paths"},
      {"classify", "label a (H, alpha) parameter pair"},
      {"solve", "integrate one drift-driven path"},
      {"ergodic-run", "long-run occupation statistics"},
      {"couple", "shared-noise contraction curves"},
      {"tightness", "exponential window moments"},
      {"girsanov", "drift-removal weights and moments"},
      {"verify", "run a module property suite"},
  };
  for (const auto& [name, desc] : subs) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opt.config_path, "JSON config path");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "master seed override");
    sub->add_option("--threads", opt.threads, "batch worker cap; 1 is the bitwise reference")
        ->check(CLI::Range(1, 64));
    sub->add_option("--format", opt.format, "table artifact format")
        ->check(CLI::IsMember({"csv", "json"}));
    if (name == "verify") sub->add_option("suite", opt.suite, "property suite name");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diag("validation", std::string("arguments: ") + e.what(), 1, "");
    return 1;
  }
  auto* sub = app.get_subcommands().front();
  opt.seed_given = sub->count("--seed") > 0;
  const std::string name = sub->get_name();
  try {
    fs::create_directories(opt.out_dir);
    if (name == "verify") return run_verify(opt);
    json cfg = load_config(opt, name);
    if (name == "classify") return run_classify(cfg, opt);
    if (name == "sample-fbm") return run_sample_fbm(cfg, opt);
    if (name == "solve") return run_solve(cfg, opt);
    if (name == "ergodic-run") return run_ergodic(cfg, opt);
    if (name == "couple") return run_couple(cfg, opt);
    if (name == "tightness") return run_tightness(cfg, opt);
    if (name == "girsanov") return run_girsanov(cfg, opt);
    throw std::logic_error("unhandled subcommand " + name);
  } catch (const fs::filesystem_error& e) {
    diag("validation", e.what(), 1, name);
    return 1;
  } catch (const nlohmann::json::exception& e) {
    diag("validation", e.what(), 1, name);
    return 1;
  } catch (const std::invalid_argument& e) {
    diag("validation", e.what(), 1, name);
    return 1;
  } catch (const std::runtime_error& e) {
    diag("numerical", e.what(), 2, name);
    return 2;
  }
}
