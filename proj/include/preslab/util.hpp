#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace preslab {

// Compensated accumulation; inputs are added in the order given, so
// callers that need run-to-run determinism must pass a sorted or
// otherwise fixed order.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
  KahanSum k;
  for (double x : xs) k.add(x);
  return k.value();
}

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

inline LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InsufficientData("linear_fit: need >= 2 points");
  KahanSum sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / static_cast<double>(n);
  const double my = sy.value() / static_cast<double>(n);
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.value() == 0.0) throw InsufficientData("linear_fit: degenerate abscissae");
  LinFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    KahanSum rss;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - (f.intercept + f.slope * x[i]);
      rss.add(r * r);
    }
    f.slope_stderr = std::sqrt(rss.value() / (static_cast<double>(n - 2) * sxx.value()));
  }
  return f;
}

// Accepts "p/q" with integer p,q, plain integers, and decimal strings.
inline double parse_exact_number(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      long long p = std::stoll(s.substr(0, slash));
      long long q = std::stoll(s.substr(slash + 1));
      if (q == 0) throw ConfigError("parse_exact_number: zero denominator in '" + s + "'");
      return static_cast<double>(p) / static_cast<double>(q);
    }
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("parse_exact_number: trailing junk in '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("parse_exact_number: cannot parse '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("parse_exact_number: out of range '" + s + "'");
  }
}

// log(sum exp(x_i)) without overflow; deterministic given input order.
inline double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) throw InsufficientData("log_sum_exp: empty input");
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  KahanSum s;
  for (double x : xs) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

// Chunked index-parallel loop.  Each index writes its own slot, so results
// are identical for any thread count; the first exception wins and is
// rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    constexpr std::size_t chunk = 64;
    for (;;) {
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      std::size_t end = std::min(n, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// FNV-1a, used to key caches and stamp reports.
inline std::uint64_t fnv1a(const std::string& data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace preslab
