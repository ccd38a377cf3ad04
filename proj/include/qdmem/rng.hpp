#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace qdmem {

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random source. The variate transforms live here instead of
// <random> distributions so streams are bit-identical across platforms and
// standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // independent stream derived from a master seed and a stream name;
  // scheme: seed_child = splitmix64(master ^ fnv1a64(name))
  static Rng child(std::uint64_t master_seed, std::string_view stream_name);

  double uniform();                  // [0, 1), 53-bit resolution
  double exponential(double scale);  // mean = scale
  double normal(double mean, double sigma);
  std::uint64_t poisson(double lambda);

  std::uint64_t raw() { return gen_(); }

 private:
  std::uint64_t poisson_inversion(double lambda);
  std::uint64_t poisson_ptrs(double lambda);

  std::mt19937_64 gen_;
};

}  // namespace qdmem
