#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace partrank;
using namespace partrank::testing;

namespace {

template <class Field>
PartitionedMatrix<Field> transposed(const PartitionedMatrix<Field>& A) {
  PartitionedMatrix<Field> T(A.field(), A.nu(), A.mu());
  for (const auto& e : A.edges()) {
    const auto& m = A.block(e.key);
    T.set_block(e.key.beta, e.key.alpha, {m.a, m.c, m.b, m.d});
  }
  return T;
}

template <class Field>
PartitionedMatrix<Field> permuted(const PartitionedMatrix<Field>& A, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<size_t>(A.mu())), q(static_cast<size_t>(A.nu()));
  std::iota(p.begin(), p.end(), 0);
  std::iota(q.begin(), q.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  std::shuffle(q.begin(), q.end(), rng);
  PartitionedMatrix<Field> P(A.field(), A.mu(), A.nu());
  for (const auto& e : A.edges())
    P.set_block(p[static_cast<size_t>(e.key.alpha)], q[static_cast<size_t>(e.key.beta)], A.block(e.key));
  return P;
}

// Change of basis inside every row and column block; generic rank is
// invariant under block-diagonal invertible transformations.
PartitionedMatrix<RationalField> rebased(const RationalMatrix& A, std::mt19937_64& rng) {
  auto invertible = [&] {
    while (true) {
      Mat2<mpq_class> m = q(static_cast<long>(rng() % 5) - 2, static_cast<long>(rng() % 5) - 2,
                            static_cast<long>(rng() % 5) - 2, static_cast<long>(rng() % 5) - 2);
      if (rank(m) == 2) return m;
    }
  };
  auto mul = [](const Mat2<mpq_class>& x, const Mat2<mpq_class>& y) {
    return Mat2<mpq_class>{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
                           x.c * y.b + x.d * y.d};
  };
  std::vector<Mat2<mpq_class>> S, T;
  for (int i = 0; i < A.mu(); ++i) S.push_back(invertible());
  for (int j = 0; j < A.nu(); ++j) T.push_back(invertible());
  RationalMatrix B(RationalField{}, A.mu(), A.nu());
  for (const auto& e : A.edges())
    B.set_block(e.key.alpha, e.key.beta,
                mul(mul(S[static_cast<size_t>(e.key.alpha)], A.block(e.key)), T[static_cast<size_t>(e.key.beta)]));
  return B;
}

template <class Field>
void full_certificate(const PartitionedMatrix<Field>& A) {
  SolveOptions<Field> opt;
  opt.check = true;
  auto res = solve(A, opt);
  EXPECT_EQ(res.rank, monte_carlo_rank(A).rank);
  EXPECT_EQ(res.rank, dense_rank(res.completion));
  EXPECT_TRUE(verify_witness(res.witness, A, res.rank).ok);
  EXPECT_TRUE(check_matching(A, res.matching.edges).ok());
  EXPECT_TRUE(check_kernel_formula(A, res.matching.edges).ok);
  EXPECT_LE(res.rank, 2 * std::min(A.mu(), A.nu()));
  for (std::size_t i = 1; i < res.stats.r_trace.size(); ++i) EXPECT_GT(res.stats.r_trace[i], res.stats.r_trace[i - 1]);
}

}  // namespace

TEST(SolveProperty, CertificatesOverSeveralFields) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    GenParams g{1 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed / 5 % 5), 0.5 + (seed % 2) * 0.3,
                (seed % 3) / 2.0, 7000 + seed};
    {
      SCOPED_TRACE("Q");
      full_certificate(random_instance(RationalField{}, g));
    }
    for (std::uint32_t p : {2u, 3u, 7u}) {
      SCOPED_TRACE(p);
      full_certificate(random_instance(PrimeField(p), g));
    }
  }
}

TEST(SolveProperty, TransposeAndPermutationInvariance) {
  std::mt19937_64 rng(41);
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    GenParams g{1 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed / 5 % 5), 0.6, (seed % 3) / 2.0,
                8000 + seed};
    auto A = random_instance(RationalField{}, g);
    int r = solve(A).rank;
    EXPECT_EQ(solve(transposed(A)).rank, r);
    EXPECT_EQ(solve(permuted(A, rng)).rank, r);
    EXPECT_EQ(solve(rebased(A, rng)).rank, r);
  }
}

TEST(SolveProperty, AddingABlockNeverLowersRank) {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    GenParams g{1 + static_cast<int>(seed % 4), 1 + static_cast<int>(seed / 4 % 4), 1.0, (seed % 3) / 2.0,
                9000 + seed};
    auto A = random_instance(PrimeField(5), g);
    PrimeMatrix part(A.field(), A.mu(), A.nu());
    int last = 0;
    for (const auto& e : A.edges()) {
      part.set_block(e.key.alpha, e.key.beta, A.block(e.key));
      int r = solve(part).rank;
      EXPECT_GE(r, last);
      EXPECT_LE(r, last + 2);
      last = r;
    }
    EXPECT_EQ(last, solve(A).rank);
  }
}

TEST(SolveProperty, DenseRankTwoGridIsFullRank) {
  for (int n = 1; n <= 8; ++n) {
    auto A = random_instance(RationalField{}, GenParams{n, n, 1.0, 0.0, static_cast<std::uint64_t>(n)});
    EXPECT_EQ(solve(A).rank, 2 * n);
  }
}
