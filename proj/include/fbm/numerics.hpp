#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fbm::num {

// Neumaier compensated summation; sequential combine keeps reductions
// deterministic at a fixed batch order
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit linfit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("linfit: need >= 2 matching points");
  double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("linfit: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("mean_se: need >= 2 values");
  KahanSum s;
  for (double x : xs) s.add(x);
  double m = s.value() / static_cast<double>(xs.size());
  KahanSum q;
  for (double x : xs) q.add((x - m) * (x - m));
  double var = q.value() / static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// two-sided Kolmogorov-Smirnov against a given CDF; asymptotic p-value
struct KsResult {
  double stat = 0.0;
  double pvalue = 1.0;
};

inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 8) throw std::invalid_argument("ks_test: too few samples");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    dmax = std::max(dmax, std::abs(f - static_cast<double>(i) / n));
    dmax = std::max(dmax, std::abs(static_cast<double>(i + 1) / n - f));
  }
  double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return {dmax, std::clamp(p, 0.0, 1.0)};
}

// sup over node pairs with |t_i - t_j| <= window of |x_i - x_j| / |t_i - t_j|^beta
inline double holder_seminorm(std::span<const double> times, std::span<const double> values,
                              int d, double beta, double window) {
  std::size_t n = times.size();
  if (values.size() != n * static_cast<std::size_t>(d))
    throw std::invalid_argument("holder_seminorm: size mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double h = times[j] - times[i];
      if (h > window) break;
      double s2 = 0.0;
      for (int c = 0; c < d; ++c) {
        double diff = values[j * d + c] - values[i * d + c];
        s2 += diff * diff;
      }
      best = std::max(best, std::sqrt(s2) / std::pow(h, beta));
    }
  }
  return best;
}

// static slot partition; results identical for any thread count when the
// caller only writes to per-index slots
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  int nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::exception_ptr first_error = nullptr;
  std::mutex err_mu;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(nt))
          fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace fbm::num
