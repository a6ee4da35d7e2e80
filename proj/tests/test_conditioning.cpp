#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "fbm/conditioning.hpp"
#include "fbm/core.hpp"
#include "fbm/numerics.hpp"
#include "fbm/rng.hpp"

using namespace fbm;
using core::HurstParams;

namespace {

PastPath past_from_fn(const std::vector<double>& times, const std::function<double(double)>& fn) {
  PastPath w;
  w.d = 1;
  w.t = times;
  for (double t : times) w.v.push_back(fn(t));
  w.check();
  return w;
}

// geometric past mesh: extent down to r_min, ascending, ending at 0
std::vector<double> geometric_past(double extent, double r_min, int per_decade) {
  std::vector<double> t;
  double ds = std::log(10.0) / per_decade;
  for (double r = extent; r > r_min; r *= std::exp(-ds)) t.push_back(-r);
  t.push_back(0.0);
  return t;
}

double cov_h(double a, double b, double H) {
  return 0.5 * (std::pow(std::abs(a), 2.0 * H) + std::pow(std::abs(b), 2.0 * H) -
                std::pow(std::abs(a - b), 2.0 * H));
}

}  // namespace

TEST_CASE("kernel closed form agrees with the quadrature route") {
  for (double H : {0.05, 0.25, 0.45}) {
    for (double x = 1e-4; x < 2e4; x *= 10.0) {
      double a = cond::kernel_f(x, H);
      double b = cond::kernel_f_quadrature(x, H);
      CHECK(std::abs(a - b) <= 1e-8 * std::abs(a));
    }
  }
  CHECK(cond::kernel_f(1.0, 0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cond::kernel_f_quadrature(1.0, 0.25) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK_THROWS_AS(cond::kernel_f(0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(cond::kernel_f(-1.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(cond::kernel_f(1.0, 0.6), std::invalid_argument);
}

TEST_CASE("kernel power-law slopes") {
  double H = 0.25;
  auto fit = [H](double lo, double hi) {
    std::vector<double> lx, ly;
    int n = 64;
    for (int i = 0; i <= n; ++i) {
      double x = lo * std::pow(hi / lo, static_cast<double>(i) / n);
      lx.push_back(std::log(x));
      ly.push_back(std::log(cond::kernel_f(x, H)));
    }
    return num::linfit(lx, ly).slope;
  };
  CHECK(std::abs(fit(10.0, 1e4) - (H - 0.5)) < 0.02);
  // the sharp small-x exponent is H + 1/2
  CHECK(std::abs(fit(1e-4, 1e-2) - (H + 0.5)) < 0.01);
}

TEST_CASE("prefactor constants") {
  CHECK(cond::conditioning_prefactor(0.5) == 0.0);
  CHECK(cond::conditioning_prefactor(0.25) ==
        doctest::Approx(std::cos(3.14159265358979324 * 0.25) / 3.14159265358979324)
            .epsilon(1e-14));
  // factorization (H-1/2) c_H c_{1-H} reproduces cos(pi H)/pi
  for (double H : {0.1, 0.25, 0.4}) {
    double lhs = (H - 0.5) * core::mvn_normalization(H) * cond::c_one_minus_h(H);
    CHECK(lhs == doctest::Approx(cond::conditioning_prefactor(H)).epsilon(1e-12));
  }
  CHECK(cond::c_one_minus_h(0.5) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("operator matches exact Gaussian regression") {
  // conditional mean of W_t given a fine discrete past, by covariance
  // regression; frozen oracle for the prefactor (sign and magnitude)
  double H = 0.25;
  std::vector<double> mesh = geometric_past(500.0, 1e-4, 120);
  std::size_t n = mesh.size() - 1;  // exclude the 0 node
  Eigen::MatrixXd css(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) css(i, j) = cov_h(mesh[i], mesh[j], H);
  Eigen::LDLT<Eigen::MatrixXd> solver(css);

  auto regression_pred = [&](double t, const std::function<double(double)>& fn) {
    Eigen::VectorXd cst(n), wv(n);
    for (std::size_t i = 0; i < n; ++i) {
      cst(i) = cov_h(mesh[i], t, H);
      wv(i) = fn(mesh[i]);
    }
    return solver.solve(cst).dot(wv);
  };

  std::function<double(double)> w1 = [](double s) { return -s * std::exp(s); };
  std::function<double(double)> w2 = [](double s) { return std::sin(-s) * std::exp(s / 3.0); };
  for (auto& fn : {w1, w2}) {
    PastPath w = past_from_fn(mesh, fn);
    auto res = cond::apply_A(w, H, TimeGrid(0.0, 0.5, 2));
    for (std::size_t k : {1u, 2u}) {
      double t = 0.5 * static_cast<double>(k);
      double want = regression_pred(t, fn);
      CHECK(res.path.at(k, 0) == doctest::Approx(want).epsilon(0.01));
    }
  }
}

TEST_CASE("past norm examples") {
  cond::NoiseNormParams p{0.2, 0.3};
  std::vector<double> mesh;
  for (int i = 0; i <= 64; ++i) mesh.push_back(-1.0 + i / 64.0);
  mesh.back() = 0.0;

  PastPath zero = past_from_fn(mesh, [](double) { return 0.0; });
  CHECK(cond::wminus_norm(zero, p) == 0.0);

  PastPath lin = past_from_fn(mesh, [](double s) { return s; });
  double want = 1.0 / std::pow(2.0, 0.3);
  CHECK(cond::wminus_norm(lin, p) == doctest::Approx(want).epsilon(1e-12));

  PastPath scaled = lin;
  for (double& v : scaled.v) v *= -3.0;
  CHECK(cond::wminus_norm(scaled, p) == doctest::Approx(3.0 * want).epsilon(1e-12));

  for (double H : {0.1, 0.25, 0.49}) {
    auto def = cond::default_noise_params(H);
    cond::validate_noise_params(H, def);
  }
  CHECK_THROWS_AS(cond::validate_noise_params(0.25, cond::NoiseNormParams{0.3, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cond::validate_noise_params(0.25, cond::NoiseNormParams{0.1, 0.05}),
                  std::invalid_argument);
}

TEST_CASE("apply_A linearity and degeneracy") {
  std::vector<double> mesh = geometric_past(50.0, 1e-3, 48);
  PastPath w1 = past_from_fn(mesh, [](double s) { return -s * std::exp(s / 2.0); });
  PastPath w2 = past_from_fn(mesh, [](double s) { return std::sin(2.0 * s); });
  PastPath combo = w1;
  for (std::size_t i = 0; i < combo.v.size(); ++i) combo.v[i] = 2.0 * w1.v[i] - 3.0 * w2.v[i];

  TimeGrid out(0.0, 0.125, 8);
  auto a1 = cond::apply_A(w1, 0.25, out);
  auto a2 = cond::apply_A(w2, 0.25, out);
  auto ac = cond::apply_A(combo, 0.25, out);
  double scale = 0.0;
  for (double v : ac.path.values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < ac.path.values.size(); ++i)
    CHECK(std::abs(ac.path.values[i] - (2.0 * a1.path.values[i] - 3.0 * a2.path.values[i])) <=
          1e-12 * scale);

  PastPath zero = past_from_fn(mesh, [](double) { return 0.0; });
  for (double v : cond::apply_A(zero, 0.25, out).path.values) CHECK(v == 0.0);

  auto half = cond::apply_A(w1, 0.5, out);
  for (double v : half.path.values) CHECK(v == 0.0);
  CHECK(half.tail_bound == 0.0);

  CHECK(a1.tail_bound > 0.0);
  CHECK(a1.norm_gamma_delta > 0.0);
  CHECK_THROWS_AS(cond::apply_A(w1, 0.25, TimeGrid(1.0, 0.1, 4)), std::invalid_argument);
  CHECK_THROWS_AS(cond::apply_A(w1, 0.7, out), std::invalid_argument);
}

TEST_CASE("conditioned path determinism and decomposition") {
  auto p = core::make_hurst(0.25, 2);
  std::vector<double> mesh = geometric_past(20.0, 1e-2, 32);
  PastPath w;
  w.d = 2;
  w.t = mesh;
  for (double t : mesh) {
    w.v.push_back(t == 0.0 ? 0.0 : std::sin(t));
    w.v.push_back(t == 0.0 ? 0.0 : -t * std::exp(t));
  }
  TimeGrid g(0.0, 0.0625, 16);

  auto s1 = rng::derive_stream(99, rng::kModuleConditioning, 0);
  auto s2 = rng::derive_stream(99, rng::kModuleConditioning, 0);
  auto x1 = cond::conditioned_fbm(w, p, g, s1);
  auto x2 = cond::conditioned_fbm(w, p, g, s2);
  CHECK(x1.values == x2.values);
  CHECK(x1.past.has_value());

  auto s3 = rng::derive_stream(99, rng::kModuleConditioning, 0);
  auto fresh = core::sample_fbm_mvn(p, g, 0.0, s3);
  auto mean = cond::apply_A(w, p.H, g);
  for (std::size_t i = 0; i < x1.values.size(); ++i)
    CHECK(x1.values[i] == fresh.values[i] + mean.path.values[i]);

  PastPath w1d;
  w1d.d = 1;
  w1d.t = {-1.0, 0.0};
  w1d.v = {0.5, 0.0};
  CHECK_THROWS_AS(cond::conditioned_fbm(w1d, p, g, s1), std::invalid_argument);
}

TEST_CASE("conditioned path with zero past is Riemann-Liouville") {
  auto p = core::make_hurst(0.25, 1);
  std::vector<double> mesh = geometric_past(10.0, 1e-2, 16);
  PastPath zero = past_from_fn(mesh, [](double) { return 0.0; });
  TimeGrid g(0.0, 0.25, 4);

  std::size_t n_paths = 2048;
  std::vector<double> acc(g.n_nodes(), 0.0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    auto rs = rng::derive_stream(7, rng::kModuleConditioning, 100 + i);
    auto x = cond::conditioned_fbm(zero, p, g, rs);
    for (std::size_t k = 0; k < g.n_nodes(); ++k) acc[k] += x.at(k, 0) * x.at(k, 0);
  }
  for (std::size_t k = 1; k <= g.n_steps; ++k) {
    double want = p.c_tilde_H * std::pow(g.node(k), 2.0 * p.H);
    double got = acc[k] / static_cast<double>(n_paths);
    double se = want * std::sqrt(2.0 / static_cast<double>(n_paths));
    CHECK(std::abs(got - want) < 5.0 * se);
  }
}

TEST_CASE("disintegration reproduces the two-sided covariance") {
  double H = 0.25;
  auto p = core::make_hurst(H, 1);
  std::vector<double> mesh = geometric_past(200.0, 1e-3, 64);
  std::size_t n = mesh.size() - 1;

  Eigen::MatrixXd css(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) css(i, j) = cov_h(mesh[i], mesh[j], H);
  Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(css).matrixL();

  TimeGrid g(0.0, 0.0625, 16);
  std::size_t n_paths = 4096;
  std::vector<std::vector<double>> paths(n_paths);
  num::parallel_for(n_paths, 8, [&](std::size_t i) {
    auto rs = rng::derive_stream(31, rng::kModuleConditioning, 1000 + i);
    Eigen::VectorXd z(n);
    for (std::size_t k = 0; k < n; ++k) z(k) = rs.gauss();
    Eigen::VectorXd wv = chol * z;
    PastPath w;
    w.d = 1;
    w.t = mesh;
    w.v.assign(wv.data(), wv.data() + n);
    w.v.push_back(0.0);
    auto x = cond::conditioned_fbm(w, p, g, rs);
    paths[i] = x.values;
  });

  std::vector<std::size_t> idx = {2, 4, 8, 12, 16};
  double worst = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a; b < idx.size(); ++b) {
      double want = core::fbm_covariance(g.node(idx[a]), g.node(idx[b]), p);
      double m = 0.0, m2 = 0.0;
      for (auto& v : paths) {
        double prod = v[idx[a]] * v[idx[b]];
        m += prod;
        m2 += prod * prod;
      }
      m /= static_cast<double>(n_paths);
      m2 /= static_cast<double>(n_paths);
      double se = std::sqrt((m2 - m * m) / static_cast<double>(n_paths));
      worst = std::max(worst, std::abs(m - want) / se);
    }
  }
  CHECK(worst < 5.0);
}

TEST_CASE("flip map") {
  std::vector<double> mesh;
  for (int i = 0; i <= 32; ++i) mesh.push_back(-2.0 + i / 16.0);
  mesh.back() = 0.0;
  PastPath lin = past_from_fn(mesh, [](double s) { return s; });

  Curve out = cond::flip_R(lin, 1.0);
  CHECK(out.t.front() == 0.0);
  for (std::size_t k = 0; k < out.n_nodes(); ++k)
    CHECK(out.at(k, 0) == doctest::Approx(-out.t[k]).epsilon(1e-12));

  PastPath zero = past_from_fn(mesh, [](double) { return 0.0; });
  for (double v : cond::flip_R(zero, 1.5).v) CHECK(v == 0.0);

  CHECK(cond::flip_R(lin, 2.0).at(0, 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cond::flip_R(lin, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(cond::flip_R(lin, 0.0), std::invalid_argument);
}

TEST_CASE("shift and concatenation") {
  TimeGrid g(0.0, 0.25, 8);
  SampledFunction wp(g, 1, true);
  for (std::size_t k = 0; k <= 8; ++k) wp.at(k, 0) = g.node(k);

  std::vector<double> mesh;
  for (int i = 0; i <= 8; ++i) mesh.push_back(-2.0 + 0.25 * i);
  mesh.back() = 0.0;
  PastPath zero = past_from_fn(mesh, [](double) { return 0.0; });

  auto m0 = cond::shift_concat(zero, wp, 0.0);
  CHECK(m0.t == zero.t);
  CHECK(m0.v == zero.v);

  auto m1 = cond::shift_concat(zero, wp, 1.0);
  double val[1];
  m1.value_at(-0.5, val);
  CHECK(val[0] == doctest::Approx(-0.5).epsilon(1e-12));
  m1.value_at(-1.5, val);
  CHECK(val[0] == doctest::Approx(-1.0).epsilon(1e-12));

  auto t1 = cond::shift_theta(wp, 0.5);
  auto t2 = cond::shift_theta(t1, 0.25);
  auto t3 = cond::shift_theta(wp, 0.75);
  CHECK(t2.grid.same_as(t3.grid));
  for (std::size_t i = 0; i < t2.values.size(); ++i)
    CHECK(std::abs(t2.values[i] - t3.values[i]) < 1e-12);

  // two-step concatenation equals the one-shot version
  PastPath sine = past_from_fn(mesh, [](double s) { return std::sin(3.0 * s); });
  SampledFunction wig(g, 1, true);
  for (std::size_t k = 0; k <= 8; ++k) wig.at(k, 0) = std::cos(g.node(k)) - 1.0;
  auto two = cond::shift_concat(cond::shift_concat(sine, wig, 0.5), cond::shift_theta(wig, 0.5),
                                0.75);
  auto one = cond::shift_concat(sine, wig, 1.25);
  REQUIRE(two.t.size() == one.t.size());
  for (std::size_t i = 0; i < one.t.size(); ++i) {
    CHECK(two.t[i] == doctest::Approx(one.t[i]).epsilon(1e-12));
    CHECK(std::abs(two.v[i] - one.v[i]) < 1e-12);
  }
}

TEST_CASE("operator output norm is controlled by the past norm") {
  double H = 0.25;
  auto p = cond::default_noise_params(H);
  TimeGrid out(0.0, 0.125, 8);
  std::vector<double> mesh = geometric_past(50.0, 1e-3, 48);
  auto sgen = rng::derive_stream(5, rng::kModuleConditioning, 3);
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    double a = sgen.gauss(), b = sgen.gauss(), c = sgen.gauss();
    PastPath w = past_from_fn(mesh, [&](double s) {
      return a * std::sin(1.7 * s) + b * (std::exp(s) - 1.0) + c * std::sin(0.3 * s);
    });
    auto res = cond::apply_A(w, H, out);
    double norm_in = cond::wminus_norm(w, p);
    double holder_out = 0.0;
    for (std::size_t i = 0; i < out.n_nodes(); ++i)
      for (std::size_t j = i + 1; j < out.n_nodes(); ++j) {
        double gap = out.node(j) - out.node(i);
        double weight = std::pow(gap, p.gamma) * std::pow(1.0 + out.node(i) + out.node(j), p.delta);
        holder_out = std::max(
            holder_out, std::abs(res.path.at(j, 0) - res.path.at(i, 0)) / weight);
      }
    if (norm_in > 0.0) worst_ratio = std::max(worst_ratio, holder_out / norm_in);
  }
  CHECK(worst_ratio > 0.0);
  CHECK(worst_ratio < 10.0);
}
