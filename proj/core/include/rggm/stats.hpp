#pragma once

#include <cstddef>
#include <vector>

namespace rggm {

// Streaming batch-means estimator for one scalar series. Samples are
// grouped in consecutive batches of fixed size; the standard error of the
// overall mean is sd(batch means) / sqrt(#batches). A trailing partial
// batch contributes to the mean but not to the error estimate.
class BatchMeans {
 public:
  explicit BatchMeans(std::size_t batch_size = 1);

  // sqrt(expected sample count), at least 1.
  static std::size_t default_batch_size(std::size_t expected_samples);

  void add(double value);

  std::size_t count() const noexcept { return count_; }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::size_t full_batches() const noexcept { return batch_count_; }

  double mean() const noexcept;
  double sample_variance() const noexcept;
  // NaN with fewer than two full batches.
  double standard_error() const noexcept;
  // N * s^2 / (b * s_b^2), clipped to [0, N]. Equals N for a constant series.
  double effective_sample_size() const noexcept;

 private:
  std::size_t batch_size_;
  std::size_t count_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double current_ = 0.0;
  std::size_t in_current_ = 0;
  std::size_t batch_count_ = 0;
  double batch_sum_ = 0.0;
  double batch_sum_sq_ = 0.0;
};

}  // namespace rggm
