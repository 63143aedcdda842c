#pragma once

// Bootstrap distribution of a predicate count over a fixed record subset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "firmsaudit/error.hpp"
#include "firmsaudit/random.hpp"

namespace firmsaudit {

struct BootstrapParams {
  std::size_t n_iter = 1000;
  std::size_t sample_size = 10000;
  std::uint64_t master_seed = 0;
  /// Worker threads; results do not depend on this value.
  unsigned threads = 1;
};

struct BootstrapResult {
  std::size_t n_iter = 0;
  std::size_t sample_size = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> per_iteration_counts;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  std::pair<std::uint64_t, std::uint64_t> ci95{};
  bool degenerate = false;

  /// count value -> number of iterations producing it
  [[nodiscard]] std::map<std::uint64_t, std::size_t> histogram() const {
    std::map<std::uint64_t, std::size_t> h;
    for (auto c : per_iteration_counts) ++h[c];
    return h;
  }
};

/// Nearest-rank percentile (p in (0, 100]) of an ascending sequence.
inline std::uint64_t nearest_rank(std::span<const std::uint64_t> sorted, double p) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

inline BootstrapResult summarize_bootstrap(std::vector<std::uint64_t> counts, std::size_t sample_size,
                                           std::uint64_t seed) {
  BootstrapResult res;
  res.n_iter = counts.size();
  res.sample_size = sample_size;
  res.master_seed = seed;
  std::vector<std::uint64_t> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  res.min = sorted.front();
  res.max = sorted.back();
  res.degenerate = res.min == res.max;

  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c);
  res.mean = sum / static_cast<double>(counts.size());
  if (!res.degenerate && counts.size() > 1) {
    double ss = 0.0;
    for (auto c : counts) {
      const double d = static_cast<double>(c) - res.mean;
      ss += d * d;
    }
    res.sd = std::sqrt(ss / static_cast<double>(counts.size() - 1));
  }
  // Keeps min <= mean <= max under rounding.
  res.mean = std::clamp(res.mean, static_cast<double>(res.min), static_cast<double>(res.max));
  res.ci95 = {nearest_rank(sorted, 2.5), nearest_rank(sorted, 97.5)};
  res.per_iteration_counts = std::move(counts);
  return res;
}

/// Iteration i draws `sample_size` indices uniformly with replacement from a
/// stream seeded by derive_seed(master_seed, i) and counts matches.
template <typename Record, typename Pred>
BootstrapResult bootstrap_count(std::span<const Record> subset, Pred&& predicate, const BootstrapParams& params) {
  if (subset.empty()) throw AuditError(ErrorCode::EmptySubset, "bootstrap subset is empty");
  if (params.n_iter == 0 || params.sample_size == 0) {
    throw AuditError(ErrorCode::InvalidArgument, "bootstrap needs n_iter >= 1 and sample_size >= 1");
  }
  std::vector<std::uint8_t> hit(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) hit[i] = predicate(subset[i]) ? 1 : 0;

  std::vector<std::uint64_t> counts(params.n_iter, 0);
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t it = first; it < params.n_iter; it += stride) {
      Rng rng(params.master_seed, it);
      std::uint64_t c = 0;
      for (std::size_t k = 0; k < params.sample_size; ++k) c += hit[rng.below(hit.size())];
      counts[it] = c;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(params.n_iter)));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }
  return summarize_bootstrap(std::move(counts), params.sample_size, params.master_seed);
}

}  // namespace firmsaudit
