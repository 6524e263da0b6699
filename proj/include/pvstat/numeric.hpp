#ifndef PVSTAT_NUMERIC_HPP
#define PVSTAT_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace pvstat {

/// Neumaier compensated accumulator. Order-dependent but deterministic for a
/// fixed summation order.
class CompensatedSum {
public:
  CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Running log(sum exp(x_k)) that never overflows.
class LogSumExp {
public:
  void add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      acc_ += std::exp(x - max_);
    } else {
      acc_ = acc_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }

  double value() const noexcept {
    if (acc_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(acc_);
  }

private:
  double max_ = -std::numeric_limits<double>::infinity();
  double acc_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) noexcept {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  CompensatedSum s;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s.value());
}

/// log C(n, k) through lgamma.
inline double log_binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

/// Deterministic uniform double in [0, 1) from a 64-bit engine output. The
/// standard distributions are implementation-defined, this is not.
template <class Engine>
double uniform01(Engine& eng) {
  return double(eng() >> 11) * 0x1.0p-53;
}

/// splitmix64 step, used to derive independent stream seeds from one seed.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mean and standard error of a correlated series by non-overlapping batch
/// means.
struct BatchEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t batches = 0;
};

inline BatchEstimate batch_means(std::span<const double> xs, std::size_t batches = 32) {
  BatchEstimate out;
  if (xs.empty()) return out;
  batches = std::max<std::size_t>(1, std::min(batches, xs.size()));
  const std::size_t len = xs.size() / batches;
  std::vector<double> means;
  means.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    CompensatedSum s;
    for (std::size_t k = b * len; k < (b + 1) * len; ++k) s += xs[k];
    means.push_back(s.value() / double(len));
  }
  CompensatedSum tot;
  for (double m : means) tot += m;
  out.mean = tot.value() / double(batches);
  out.batches = batches;
  if (batches > 1) {
    CompensatedSum var;
    for (double m : means) var += (m - out.mean) * (m - out.mean);
    out.std_error = std::sqrt(var.value() / double(batches - 1) / double(batches));
  }
  return out;
}

} // namespace pvstat

#endif // PVSTAT_NUMERIC_HPP
