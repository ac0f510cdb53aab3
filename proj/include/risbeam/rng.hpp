// Seeded random source with stream derivation so parallel Monte-Carlo trials
// stay reproducible: every worker owns an Rng derived from (master seed,
// stream indices) and no global state is touched.
#ifndef RISBEAM_RNG_HPP
#define RISBEAM_RNG_HPP

#include "risbeam/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace risbeam {

namespace detail {
// SplitMix64 finalizer, used to mix stream indices into engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (master, i0, i1, ...); same inputs, same stream.
  static Rng derive(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = detail::splitmix64(master);
    for (std::uint64_t id : ids) s = detail::splitmix64(s ^ id);
    return Rng(s);
  }

  double normal() { return normal_(engine_); }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01_(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Circularly-symmetric complex Gaussian with E|x|^2 = var.
  cplx cgauss(double var) {
    const double s = std::sqrt(0.5 * var);
    return {s * normal(), s * normal()};
  }

  CMat cgauss_matrix(Eigen::Index rows, Eigen::Index cols, double var) {
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cgauss(var);
    return m;
  }

  CVec cgauss_vector(Eigen::Index n, double var) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cgauss(var);
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform01_{0.0, 1.0};
};

}  // namespace risbeam

#endif  // RISBEAM_RNG_HPP
