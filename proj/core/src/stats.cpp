#include "rggm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rggm {

BatchMeans::BatchMeans(std::size_t batch_size) : batch_size_(std::max<std::size_t>(1, batch_size)) {}

std::size_t BatchMeans::default_batch_size(std::size_t expected_samples) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(expected_samples))));
}

void BatchMeans::add(double value) {
  ++count_;
  sum_ += value;
  sum_sq_ += value * value;
  current_ += value;
  if (++in_current_ == batch_size_) {
    const double m = current_ / static_cast<double>(batch_size_);
    batch_sum_ += m;
    batch_sum_sq_ += m * m;
    ++batch_count_;
    current_ = 0.0;
    in_current_ = 0;
  }
}

double BatchMeans::mean() const noexcept {
  return count_ == 0 ? std::numeric_limits<double>::quiet_NaN() : sum_ / static_cast<double>(count_);
}

double BatchMeans::sample_variance() const noexcept {
  if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(count_);
  const double mu = sum_ / n;
  return std::max(0.0, (sum_sq_ - n * mu * mu) / (n - 1.0));
}

namespace {

double batch_variance(double sum, double sum_sq, std::size_t batches) {
  const double b = static_cast<double>(batches);
  const double mu = sum / b;
  return std::max(0.0, (sum_sq - b * mu * mu) / (b - 1.0));
}

}  // namespace

double BatchMeans::standard_error() const noexcept {
  if (batch_count_ < 2) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(batch_variance(batch_sum_, batch_sum_sq_, batch_count_) /
                   static_cast<double>(batch_count_));
}

double BatchMeans::effective_sample_size() const noexcept {
  const double n = static_cast<double>(count_);
  if (batch_count_ < 2) return n;
  const double s2 = sample_variance();
  const double sb2 = batch_variance(batch_sum_, batch_sum_sq_, batch_count_);
  if (!(s2 > 0.0)) return n;
  if (!(sb2 > 0.0)) return n;
  return std::clamp(n * s2 / (static_cast<double>(batch_size_) * sb2), 0.0, n);
}

}  // namespace rggm
