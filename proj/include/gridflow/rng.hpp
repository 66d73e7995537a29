#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gridflow/common.hpp"

namespace gridflow {

// splitmix64, used to derive independent stream seeds from one run seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// A named RNG stream. Sampling is hand-rolled on top of the raw generator so
// draws are reproducible across standard-library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t run_seed, std::uint64_t stream_tag)
      : gen_(mix64(run_seed ^ mix64(stream_tag))) {}

  double uniform() {  // [0, 1)
    return (gen_() >> 11) * 0x1.0p-53;
  }

  // Knuth's product method; fine for the small per-tick means used here.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Draw an index with the given (normalized) weights via cumulative scan.
  int categorical(const std::vector<double>& cumulative) {
    double u = uniform();
    for (std::size_t i = 0; i < cumulative.size(); ++i)
      if (u < cumulative[i]) return static_cast<int>(i);
    return static_cast<int>(cumulative.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gridflow
