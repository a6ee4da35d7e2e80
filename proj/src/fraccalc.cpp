#include "fbm/fraccalc.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fbm/numerics.hpp"

namespace fbm::fraccalc {

namespace {

void require_zero_start(const SampledFunction& f, const char* who) {
  if (std::abs(f.grid.t_start) > 1e-12)
    throw std::invalid_argument(std::string(who) + ": grid must start at 0");
  f.check();
}

// l^p - (l-1)^p without cancellation at large l
double pow_diff(std::size_t l, double p) {
  if (l == 1) return 1.0;
  double lm = static_cast<double>(l - 1);
  return std::pow(lm, p) * std::expm1(p * std::log1p(1.0 / lm));
}

// exact moments of (t_k - s)^{alpha-1} over one step at lag l, against the
// linear interpolant: w0 multiplies f_j, w1 multiplies f_{j+1}
struct ProductWeights {
  std::vector<double> w0, w1;
};

ProductWeights product_weights(double alpha, double dt, std::size_t n) {
  ProductWeights w;
  w.w0.assign(n + 1, 0.0);
  w.w1.assign(n + 1, 0.0);
  double da = std::pow(dt, alpha);
  for (std::size_t l = 1; l <= n; ++l) {
    double lf = static_cast<double>(l);
    double pa = pow_diff(l, alpha);
    double pb = pow_diff(l, alpha + 1.0);
    double m0 = da * pa / alpha;
    double c = da * (lf * pa / alpha - pb / (alpha + 1.0));
    w.w0[l] = m0 - c;
    w.w1[l] = c;
  }
  return w;
}

SampledFunction diff_in_t(const SampledFunction& g) {
  if (g.grid.n_nodes() < 3)
    throw std::invalid_argument("frac_derivative: need >= 3 nodes");
  SampledFunction out(g.grid, g.d);
  double h2 = 2.0 * g.grid.dt;
  std::size_t n = g.grid.n_steps;
  for (int c = 0; c < g.d; ++c) {
    out.at(0, c) = (-3.0 * g.at(0, c) + 4.0 * g.at(1, c) - g.at(2, c)) / h2;
    for (std::size_t k = 1; k < n; ++k)
      out.at(k, c) = (g.at(k + 1, c) - g.at(k - 1, c)) / h2;
    out.at(n, c) = (3.0 * g.at(n, c) - 4.0 * g.at(n - 1, c) + g.at(n - 2, c)) / h2;
  }
  return out;
}

}  // namespace

SampledFunction frac_integral(const SampledFunction& f, double alpha) {
  require_zero_start(f, "frac_integral");
  if (alpha == 0.0) return f;
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("frac_integral: alpha must be in [0,1)");
  std::size_t n = f.grid.n_steps;
  ProductWeights w = product_weights(alpha, f.grid.dt, n);
  double inv_gamma = 1.0 / std::tgamma(alpha);
  SampledFunction out(f.grid, f.d, true);
  for (int c = 0; c < f.d; ++c) {
    for (std::size_t k = 1; k <= n; ++k) {
      num::KahanSum acc;
      for (std::size_t j = 0; j < k; ++j) {
        std::size_t l = k - j;
        acc.add(w.w0[l] * f.at(j, c) + w.w1[l] * f.at(j + 1, c));
      }
      out.at(k, c) = inv_gamma * acc.value();
    }
  }
  return out;
}

SampledFunction frac_derivative(const SampledFunction& f, double alpha) {
  require_zero_start(f, "frac_derivative");
  if (alpha == 0.0) return f;
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("frac_derivative: alpha must be in [0,1)");
  return diff_in_t(frac_integral(f, 1.0 - alpha));
}

SampledFunction frac_op_negative(const SampledFunction& f, double alpha, NegKind kind) {
  require_zero_start(f, "frac_op_negative");
  if (alpha == 0.0) return f;
  if (!(alpha > -1.0 && alpha < 0.0))
    throw std::invalid_argument("frac_op_negative: alpha must be in (-1,0]");
  if (kind == NegKind::integral) return diff_in_t(frac_integral(f, 1.0 + alpha));
  return frac_derivative(cumulative_trapezoid(f), 1.0 + alpha);
}

double holder_slope_estimate(const SampledFunction& f) {
  std::size_t n = f.grid.n_steps;
  std::size_t max_lag = std::max<std::size_t>(n / 4, 2);
  std::vector<double> lx, ly;
  for (std::size_t lag = 1; lag <= max_lag; lag *= 2) {
    double sup = 0.0;
    for (std::size_t k = 0; k + lag <= n; ++k) {
      double s2 = 0.0;
      for (int c = 0; c < f.d; ++c) {
        double diff = f.at(k + lag, c) - f.at(k, c);
        s2 += diff * diff;
      }
      sup = std::max(sup, s2);
    }
    if (sup > 0.0) {
      lx.push_back(std::log(static_cast<double>(lag) * f.grid.dt));
      ly.push_back(0.5 * std::log(sup));
    }
  }
  if (lx.size() < 2) return 1.0;  // flat path, treat as smooth
  return num::linfit(lx, ly).slope;
}

SampledFunction frac_increment(const SampledFunction& f, double alpha) {
  require_zero_start(f, "frac_increment");
  if (!(alpha > -1.0 && alpha < 0.0))
    throw std::invalid_argument("frac_increment: alpha must be in (-1,0)");
  for (int c = 0; c < f.d; ++c)
    if (f.at(0, c) != 0.0)
      throw std::invalid_argument("frac_increment: requires f(0) = 0");
  double slope = holder_slope_estimate(f);
  if (slope < -alpha - 0.25)
    throw std::invalid_argument("frac_increment: path looks rougher than the order requires");

  std::size_t n = f.grid.n_steps;
  double da = std::pow(f.grid.dt, alpha);
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t l = 1; l <= n; ++l)
    w[l] = da * pow_diff(l, alpha + 1.0) / (alpha + 1.0);
  double inv_gamma = 1.0 / std::tgamma(alpha + 1.0);
  SampledFunction out(f.grid, f.d, true);
  for (int c = 0; c < f.d; ++c) {
    for (std::size_t k = 1; k <= n; ++k) {
      num::KahanSum acc;
      for (std::size_t j = 0; j < k; ++j)
        acc.add(w[k - j] * (f.at(j + 1, c) - f.at(j, c)));
      out.at(k, c) = inv_gamma * acc.value();
    }
  }
  return out;
}

SampledFunction cumulative_trapezoid(const SampledFunction& f) {
  f.check();
  SampledFunction out(f.grid, f.d, std::abs(f.grid.t_start) <= 1e-12);
  for (int c = 0; c < f.d; ++c) {
    num::KahanSum acc;
    out.at(0, c) = 0.0;
    for (std::size_t k = 1; k <= f.grid.n_steps; ++k) {
      acc.add(0.5 * f.grid.dt * (f.at(k - 1, c) + f.at(k, c)));
      out.at(k, c) = acc.value();
    }
  }
  return out;
}

SemigroupReport semigroup_check(const SampledFunction& f, double alpha, double beta) {
  require_zero_start(f, "semigroup_check");
  if (!(alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0))
    throw std::invalid_argument("semigroup_check: need alpha, beta >= 0 and alpha + beta < 1");
  SemigroupReport rep;
  SampledFunction lhs = frac_integral(frac_integral(f, beta), alpha);
  SampledFunction rhs = frac_integral(f, alpha + beta);
  for (std::size_t i = 0; i < lhs.values.size(); ++i) {
    rep.semigroup_dev = std::max(rep.semigroup_dev, std::abs(lhs.values[i] - rhs.values[i]));
    rep.semigroup_scale = std::max(rep.semigroup_scale, std::abs(rhs.values[i]));
  }
  if (alpha > 0.0) {
    SampledFunction inv = frac_integral(frac_derivative(f, alpha), alpha);
    for (std::size_t i = 0; i < inv.values.size(); ++i) {
      rep.inversion_dev = std::max(rep.inversion_dev, std::abs(inv.values[i] - f.values[i]));
      rep.inversion_scale = std::max(rep.inversion_scale, std::abs(f.values[i]));
    }
  }
  return rep;
}

}  // namespace fbm::fraccalc
