#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace rootbarrier {

/// Runs body(i) for i in [0, count) on `workers` threads using contiguous
/// blocks. The first exception thrown by any worker is rethrown.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise (cascade) summation in index order.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct SampleMoments {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
};

inline SampleMoments sample_moments(std::span<const double> values) {
  SampleMoments m;
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  m.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return m;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [&](double v) { return (v - m.mean) * (v - m.mean); });
  m.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0)) / std::sqrt(n);
  return m;
}

}  // namespace rootbarrier
