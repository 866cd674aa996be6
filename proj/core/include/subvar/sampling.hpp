#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace subvar {

// Radical inverse of index in the given base (index >= 1 skips the origin).
inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline std::vector<double> halton_point(std::uint64_t index, int dim) {
  static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  std::vector<double> u(static_cast<size_t>(dim));
  for (int k = 0; k < dim; ++k) u[static_cast<size_t>(k)] = halton(index, primes[k % 12]);
  return u;
}

// mt19937_64 is fully specified by the standard; the conversion to [0,1) is
// done here so results do not depend on the library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  std::vector<double> uniform(int dim) {
    std::vector<double> u(static_cast<size_t>(dim));
    for (auto& v : u) v = uniform();
    return u;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace subvar
