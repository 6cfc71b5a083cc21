#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <vector>

namespace subheat {

/// Number of workers to use; 0 means the hardware concurrency.
unsigned resolve_workers(unsigned requested);

/// Runs body(i) for i in [0, n) on a pool of workers. Work is handed out in
/// contiguous blocks; the caller writes results by index, so the outcome never
/// depends on the worker count. The exception from the lowest failing index
/// is rethrown.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body,
                  std::size_t block = 256);

/// Pairwise (cascade) summation in index order.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

/// Independent generator for a stream id (seed, point, path, replicate, ...).
std::mt19937_64 make_stream(std::initializer_list<std::uint64_t> ids);

struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of the mean, both by pairwise summation.
MeanAndError mean_and_error(const std::vector<double>& v);

}  // namespace subheat
