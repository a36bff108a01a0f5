#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "partrank/instance.hpp"

namespace partrank {

struct GenParams {
  int mu = 1;
  int nu = 1;
  double density = 1.0;
  double rank1_fraction = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline typename RationalField::Element draw_entry(const RationalField& f, std::mt19937_64& rng) {
  return f.from_int(std::uniform_int_distribution<int>(-9, 9)(rng));
}

inline typename PrimeField::Element draw_entry(const PrimeField& f, std::mt19937_64& rng) {
  return f.from_int(std::uniform_int_distribution<long long>(0, f.modulus() - 1)(rng));
}

}  // namespace detail

/// Random instance: each block is present with probability `density`, and
/// rank-1 (outer product) with probability `rank1_fraction`, else rank 2.
/// Entries over Q are single-digit integers.
template <class Field>
PartitionedMatrix<Field> random_instance(const Field& f, const GenParams& g) {
  if (!(g.density >= 0 && g.density <= 1)) throw std::invalid_argument("density must lie in [0, 1]");
  if (!(g.rank1_fraction >= 0 && g.rank1_fraction <= 1))
    throw std::invalid_argument("rank1_fraction must lie in [0, 1]");
  PartitionedMatrix<Field> A(f, g.mu, g.nu);
  std::mt19937_64 rng(g.seed);
  std::uniform_real_distribution<double> u(0, 1);
  auto x = [&] { return detail::draw_entry(f, rng); };
  for (int a = 0; a < g.mu; ++a)
    for (int b = 0; b < g.nu; ++b) {
      if (u(rng) >= g.density) continue;
      bool one = u(rng) < g.rank1_fraction;
      Mat2<typename Field::Element> m;
      do {
        if (one) {
          auto p = x(), q = x(), s = x(), t = x();
          m = {p * s, p * t, q * s, q * t};
        } else {
          m = {x(), x(), x(), x()};
        }
      } while (rank(m) != (one ? 1 : 2));
      A.set_block(a, b, m);
    }
  return A;
}

}  // namespace partrank
