#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fbm/fraccalc.hpp"
#include "fbm/numerics.hpp"
#include "fbm/rng.hpp"

using namespace fbm;
using fraccalc::NegKind;

namespace {

SampledFunction sample(std::size_t n, double t_end, int d, const std::function<double(double, int)>& fn) {
  TimeGrid g(0.0, t_end / static_cast<double>(n), n);
  SampledFunction f(g, d);
  for (std::size_t k = 0; k <= n; ++k)
    for (int c = 0; c < d; ++c) f.at(k, c) = fn(g.node(k), c);
  return f;
}

// I^alpha t^beta = Gamma(beta+1)/Gamma(beta+1+alpha) t^{beta+alpha}
double monomial_image(double beta, double alpha, double t) {
  return std::tgamma(beta + 1.0) / std::tgamma(beta + 1.0 + alpha) * std::pow(t, beta + alpha);
}

double sup_rel_err(const SampledFunction& got, const std::function<double(double)>& want,
                   std::size_t k_min, double scale) {
  double worst = 0.0;
  for (std::size_t k = k_min; k <= got.grid.n_steps; ++k)
    worst = std::max(worst, std::abs(got.at(k, 0) - want(got.grid.node(k))) / scale);
  return worst;
}

}  // namespace

TEST_CASE("order zero is the identity") {
  auto f = sample(64, 1.0, 1, [](double t, int) { return std::sin(3.0 * t) + 0.25; });
  for (auto* op : {&fraccalc::frac_integral, &fraccalc::frac_derivative}) {
    auto out = (*op)(f, 0.0);
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(out.values[i] == f.values[i]);
  }
  for (auto kind : {NegKind::integral, NegKind::derivative}) {
    auto out = fraccalc::frac_op_negative(f, 0.0, kind);
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(out.values[i] == f.values[i]);
  }
}

TEST_CASE("parameter and precondition errors") {
  auto f = sample(32, 1.0, 1, [](double t, int) { return t; });
  CHECK_THROWS_AS(fraccalc::frac_integral(f, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(fraccalc::frac_integral(f, -0.3), std::invalid_argument);
  CHECK_THROWS_AS(fraccalc::frac_derivative(f, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fraccalc::frac_op_negative(f, -1.5, NegKind::integral), std::invalid_argument);
  CHECK_THROWS_AS(fraccalc::frac_op_negative(f, 0.5, NegKind::integral), std::invalid_argument);
  CHECK_THROWS_AS(fraccalc::frac_increment(f, -1.25), std::invalid_argument);

  auto g = sample(32, 1.0, 1, [](double, int) { return 1.0; });
  CHECK_THROWS_AS(fraccalc::frac_increment(g, -0.25), std::invalid_argument);  // g(0) != 0

  TimeGrid shifted(0.5, 0.01, 32);
  SampledFunction h(shifted, 1);
  CHECK_THROWS_AS(fraccalc::frac_integral(h, 0.5), std::invalid_argument);

  auto z = sample(32, 1.0, 1, [](double, int) { return 0.0; });
  for (double v : fraccalc::frac_integral(z, 0.5).values) CHECK(v == 0.0);
  for (double v : fraccalc::frac_derivative(z, 0.5).values) CHECK(v == 0.0);
  for (double v : fraccalc::frac_op_negative(z, -0.25, NegKind::integral).values) CHECK(v == 0.0);
}

TEST_CASE("integral exact on piecewise-linear data") {
  // constant and linear inputs coincide with their interpolants, so the
  // product rule reproduces the closed forms up to roundoff
  auto one = sample(1024, 1.0, 1, [](double, int) { return 1.0; });
  auto id = sample(1024, 1.0, 1, [](double t, int) { return t; });

  auto i_one = fraccalc::frac_integral(one, 0.5);
  auto i_id = fraccalc::frac_integral(id, 0.5);
  CHECK(sup_rel_err(i_one, [](double t) { return monomial_image(0.0, 0.5, t); }, 1, 1.13) < 1e-10);
  CHECK(sup_rel_err(i_id, [](double t) { return monomial_image(1.0, 0.5, t); }, 1, 0.76) < 1e-10);
  CHECK(i_one.at(1024, 0) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  CHECK(i_id.at(1024, 0) == doctest::Approx(1.0 / std::tgamma(2.5)).epsilon(1e-12));
}

TEST_CASE("monomial image converges with order >= 1") {
  std::vector<double> lx, ly;
  for (std::size_t n : {256u, 512u, 1024u, 2048u}) {
    auto f = sample(n, 1.0, 1, [](double t, int) { return t * t; });
    auto out = fraccalc::frac_integral(f, 0.3);
    double err = sup_rel_err(out, [](double t) { return monomial_image(2.0, 0.3, t); }, 1, 1.0);
    lx.push_back(std::log(1.0 / static_cast<double>(n)));
    ly.push_back(std::log(err));
  }
  double order = num::linfit(lx, ly).slope;
  CHECK(order >= 1.0);
}

TEST_CASE("derivative applied to the matched power is one") {
  // the data has a cusp at t = 0, so the error profile is a fixed function of
  // node index; at fixed time it converges with order > 1
  double alpha = 0.4;
  std::vector<double> lx, ly;
  for (std::size_t n : {1024u, 4096u, 16384u}) {
    auto f = sample(n, 1.0, 1, [alpha](double t, int) {
      return std::pow(t, alpha) / std::tgamma(1.0 + alpha);
    });
    auto out = fraccalc::frac_derivative(f, alpha);
    double worst_interior = 0.0, worst_tail = 0.0;
    for (std::size_t k = 64; k <= n; ++k) {
      double e = std::abs(out.at(k, 0) - 1.0);
      worst_interior = std::max(worst_interior, e);
      if (k >= n / 4) worst_tail = std::max(worst_tail, e);
    }
    CHECK(worst_interior < 5e-4);
    lx.push_back(std::log(1.0 / static_cast<double>(n)));
    ly.push_back(std::log(worst_tail));
  }
  CHECK(num::linfit(lx, ly).slope >= 1.0);
}

TEST_CASE("derivative of a constant has the inverse power profile") {
  auto f = sample(4096, 1.0, 1, [](double, int) { return 2.0; });
  auto out = fraccalc::frac_derivative(f, 0.5);
  for (std::size_t k = 1024; k <= 4096; k += 256) {
    double t = out.grid.node(k);
    double want = 2.0 / (std::tgamma(0.5) * std::sqrt(t));
    CHECK(out.at(k, 0) == doctest::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("negative order closed forms") {
  auto f = sample(4096, 1.0, 1, [](double t, int) { return t; });

  auto d_pos = fraccalc::frac_op_negative(f, -0.25, NegKind::integral);
  double e1 = sup_rel_err(
      d_pos, [](double t) { return std::pow(t, 0.75) / std::tgamma(1.75); }, 410, 1.0);
  CHECK(e1 < 1e-4);

  auto smooth = fraccalc::frac_op_negative(f, -0.25, NegKind::derivative);
  double e2 = sup_rel_err(
      smooth, [](double t) { return std::pow(t, 1.25) / std::tgamma(2.25); }, 410, 1.0);
  CHECK(e2 < 1e-4);
}

TEST_CASE("increment and composite routes agree on a smooth path") {
  auto f = sample(4096, 1.0, 1,
                  [](double t, int) { return std::sin(7.0 * t) + 0.5 * std::sin(13.0 * t); });
  auto a = fraccalc::frac_increment(f, -0.25);
  auto b = fraccalc::frac_op_negative(f, -0.25, NegKind::integral);
  double scale = 0.0, dev = 0.0;
  for (std::size_t k = 64; k <= 4096; ++k) {
    scale = std::max(scale, std::abs(a.at(k, 0)));
    dev = std::max(dev, std::abs(a.at(k, 0) - b.at(k, 0)));
  }
  CHECK(dev < 1e-4 * scale);
}

TEST_CASE("linearity to machine precision") {
  auto f = sample(256, 1.0, 2, [](double t, int c) { return std::sin((3.0 + c) * t); });
  auto g = sample(256, 1.0, 2, [](double t, int c) { return t * t + 0.3 * c * t; });
  SampledFunction combo(f.grid, 2);
  for (std::size_t i = 0; i < combo.values.size(); ++i)
    combo.values[i] = 2.0 * f.values[i] - 3.0 * g.values[i];

  auto check_lin = [&](const std::function<SampledFunction(const SampledFunction&)>& op) {
    auto lhs = op(combo);
    auto rf = op(f);
    auto rg = op(g);
    double scale = 1e-30;
    for (double v : lhs.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < lhs.values.size(); ++i)
      CHECK(std::abs(lhs.values[i] - (2.0 * rf.values[i] - 3.0 * rg.values[i])) < 1e-12 * scale);
  };
  check_lin([](const SampledFunction& x) { return fraccalc::frac_integral(x, 0.5); });
  check_lin([](const SampledFunction& x) { return fraccalc::frac_derivative(x, 0.3); });
  check_lin([](const SampledFunction& x) { return fraccalc::frac_increment(x, -0.4); });
}

TEST_CASE("derivative inverts integral with rate at least 1 - alpha") {
  double alpha = 0.5;
  std::vector<double> lx, ly;
  for (std::size_t n : {512u, 1024u, 2048u}) {
    auto f = sample(n, 1.0, 1, [](double t, int) { return std::sin(3.0 * t); });
    auto back = fraccalc::frac_derivative(fraccalc::frac_integral(f, alpha), alpha);
    double err = 0.0;
    for (std::size_t k = 0; k <= n; ++k)
      err = std::max(err, std::abs(back.at(k, 0) - f.at(k, 0)));
    lx.push_back(std::log(1.0 / static_cast<double>(n)));
    ly.push_back(std::log(err));
  }
  double rate = num::linfit(lx, ly).slope;
  CHECK(rate >= 1.0 - alpha);
}

TEST_CASE("semigroup and inversion report on t^2") {
  auto f = sample(1u << 14, 1.0, 1, [](double t, int) { return t * t; });
  auto rep = fraccalc::semigroup_check(f, 0.3, 0.4);
  CHECK(rep.semigroup_dev <= 1e-6 * rep.semigroup_scale);
  CHECK(rep.inversion_dev <= 1e-6 * rep.inversion_scale);

  auto small = sample(128, 1.0, 1, [](double t, int) { return t * t; });
  auto rep0 = fraccalc::semigroup_check(small, 0.0, 0.4);
  CHECK(rep0.semigroup_dev == 0.0);
  CHECK_THROWS_AS(fraccalc::semigroup_check(small, 0.6, 0.5), std::invalid_argument);
}

TEST_CASE("increment gate rejects paths rougher than the order") {
  auto s = rng::derive_stream(42, rng::kModuleFraccalc, 7);
  auto f = sample(1024, 1.0, 1, [](double, int) { return 0.0; });
  for (std::size_t k = 1; k <= 1024; ++k) f.at(k, 0) = s.gauss();  // white noise, slope ~ 0
  CHECK(fraccalc::holder_slope_estimate(f) < 0.3);
  CHECK_THROWS_AS(fraccalc::frac_increment(f, -0.6), std::invalid_argument);

  auto smooth = sample(1024, 1.0, 1, [](double t, int) { return std::sin(2.0 * t); });
  CHECK(fraccalc::holder_slope_estimate(smooth) > 0.8);
}

TEST_CASE("cumulative trapezoid") {
  auto f = sample(2048, 1.0, 1, [](double t, int) { return std::sin(t); });
  auto F = fraccalc::cumulative_trapezoid(f);
  for (std::size_t k = 0; k <= 2048; k += 128) {
    double t = F.grid.node(k);
    CHECK(F.at(k, 0) == doctest::Approx(1.0 - std::cos(t)).epsilon(1e-6));
  }
}
