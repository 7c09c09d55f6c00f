#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "wcr/numerics/error.hpp"
#include "wcr/numerics/special.hpp"

namespace wcr {

struct McConfig {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::size_t chunk = 1024;  // trials per unit of work handed to a worker
  unsigned workers = 0;      // 0: std::thread::hardware_concurrency()
};

/// Random stream owned by one trial. Streams are keyed by (seed, index), so a
/// trial draws the same numbers no matter which worker runs it.
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return gaussian_quantile(uniform()); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct McEstimate {
  double mean = 0.0;
  double stddev = 0.0;     // sample standard deviation of the per-trial values
  double std_error = 0.0;  // stddev / sqrt(count)
  std::size_t count = 0;

  double ci_lo() const noexcept { return mean - 1.96 * std_error; }
  double ci_hi() const noexcept { return mean + 1.96 * std_error; }
};

namespace detail {

// Neumaier-compensated sum.
template <class F>
double compensated_sum(std::span<const double> v, F&& f) {
  double s = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double y = f(x);
    const double t = s + y;
    c += std::abs(s) >= std::abs(y) ? (s - t) + y : (y - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace detail

/// Two-pass mean / standard deviation in index order, compensated sums.
inline McEstimate summarize(std::span<const double> v) {
  McEstimate e;
  e.count = v.size();
  if (v.empty()) return e;
  e.mean = detail::compensated_sum(v, [](double x) { return x; }) / static_cast<double>(v.size());
  if (v.size() > 1) {
    const double m = e.mean;
    const double ss = detail::compensated_sum(v, [m](double x) { return (x - m) * (x - m); });
    e.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    e.std_error = e.stddev / std::sqrt(static_cast<double>(v.size()));
  }
  return e;
}

/// Per-trial outputs of a Monte Carlo run, in trial order.
class McSamples {
 public:
  McSamples(std::size_t trials, std::size_t outputs)
      : trials_(trials), outputs_(outputs), data_(trials * outputs, 0.0), valid_(trials, 1) {}

  std::size_t trials() const noexcept { return trials_; }
  std::size_t outputs() const noexcept { return outputs_; }

  std::span<const double> row(std::size_t t) const { return {data_.data() + t * outputs_, outputs_}; }
  std::span<double> row(std::size_t t) { return {data_.data() + t * outputs_, outputs_}; }
  bool valid(std::size_t t) const { return valid_[t] != 0; }
  void set_valid(std::size_t t, bool v) { valid_[t] = v ? 1 : 0; }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), char{1}));
  }
  double invalid_fraction() const {
    return trials_ == 0 ? 0.0 : 1.0 - static_cast<double>(valid_count()) / static_cast<double>(trials_);
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c;
    c.reserve(trials_);
    for (std::size_t t = 0; t < trials_; ++t)
      if (valid(t)) c.push_back(row(t)[j]);
    return c;
  }

  McEstimate estimate(std::size_t j) const { return summarize(column(j)); }

  /// Estimate of E[g(row)] over the valid trials.
  template <class G>
  McEstimate estimate_of(G&& g) const {
    std::vector<double> c;
    c.reserve(trials_);
    for (std::size_t t = 0; t < trials_; ++t)
      if (valid(t)) c.push_back(g(row(t)));
    return summarize(c);
  }

 private:
  std::size_t trials_;
  std::size_t outputs_;
  std::vector<double> data_;
  std::vector<char> valid_;
};

/// Runs cfg.trials independent trials. `fn(TrialStream&, std::span<double> out)`
/// fills `outputs` values and returns false when the trial is degenerate.
/// Work is split into chunks across workers; the stored results, and so every
/// reduction over them, do not depend on the chunking or the worker count.
template <class Fn>
McSamples run_trials(const McConfig& cfg, std::size_t outputs, Fn&& fn) {
  if (cfg.trials == 0) throw DomainError("run_trials: trials must be positive");
  McSamples samples(cfg.trials, outputs);
  const std::size_t chunk = std::max<std::size_t>(1, cfg.chunk);
  const std::size_t n_chunks = (cfg.trials + chunk - 1) / chunk;

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(cfg.trials, begin + chunk);
    for (std::size_t t = begin; t < end; ++t) {
      TrialStream stream(cfg.seed, t);
      samples.set_valid(t, fn(stream, samples.row(t)));
    }
  };

  unsigned workers = cfg.workers != 0 ? cfg.workers : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, n_chunks));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return samples;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks; c = next++) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_chunks;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return samples;
}

}  // namespace wcr
