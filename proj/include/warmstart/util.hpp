#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace warmstart {

// splitmix64 step; used to expand one master seed into independent streams.
std::uint64_t splitmix64(std::uint64_t &state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Worker cap for parallel_for; 0 means hardware concurrency.
void set_thread_count(unsigned k);
unsigned thread_count();

// Calls fn(i) for i in [0, count) on up to thread_count() workers. Each index
// is visited exactly once; fn must only write to slots owned by i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &fn);

// Pairwise (tree) summation; order-independent of worker scheduling.
double pairwise_sum(const double *x, std::size_t n);
inline double pairwise_sum(const std::vector<double> &x) { return pairwise_sum(x.data(), x.size()); }

double median(std::vector<double> x);

} // namespace warmstart
