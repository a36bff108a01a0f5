#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace partrank;
using namespace partrank::testing;

TEST(PrimeField, Arithmetic) {
  PrimeField f(7);
  auto x = f.from_int(5), y = f.from_int(4);
  EXPECT_EQ((x + y).v, 2u);
  EXPECT_EQ((x - y).v, 1u);
  EXPECT_EQ((y - x).v, 6u);
  EXPECT_EQ((x * y).v, 6u);
  EXPECT_EQ((-x).v, 2u);
  EXPECT_EQ((x * x.inverse()).v, 1u);
  EXPECT_EQ(f.from_int(-1).v, 6u);
  EXPECT_THROW(f.zero().inverse(), std::domain_error);
}

TEST(PrimeField, ResiduesStayReduced) {
  PrimeField f(101);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    auto x = f.from_int(static_cast<long long>(rng() % 100000) - 50000);
    auto y = f.from_int(static_cast<long long>(rng() % 100000) - 50000);
    for (auto z : {x + y, x - y, x * y}) EXPECT_LT(z.v, 101u);
    if (!is_zero(y)) EXPECT_EQ((x / y) * y, x);
  }
}

TEST(PrimeField, Parse) {
  PrimeField f(5);
  EXPECT_EQ(f.parse("7").v, 2u);
  EXPECT_EQ(f.parse("-1").v, 4u);
  EXPECT_EQ(f.parse("1/2").v, 3u);
  EXPECT_THROW(f.parse("1/5"), ParseError);
  EXPECT_THROW(f.parse("x"), ParseError);
  EXPECT_THROW(PrimeField(4), ParseError);
}

TEST(RationalField, ParseKeepsLowestTerms) {
  RationalField Q;
  auto x = Q.parse("6/-4");
  EXPECT_EQ(x, mpq_class(-3, 2));
  EXPECT_GT(x.get_den(), 0);
  EXPECT_EQ(Q.parse("12"), mpq_class(12));
  EXPECT_THROW(Q.parse("1/0"), ParseError);
  EXPECT_THROW(Q.parse(""), ParseError);
  EXPECT_THROW(Q.parse("abc"), ParseError);
}

TEST(Mat2, Rank) {
  EXPECT_EQ(rank(q(1, 0, 0, 1)), 2);
  EXPECT_EQ(rank(q(0, 0, 0, 0)), 0);
  EXPECT_EQ(rank(q(1, 2, 2, 4)), 1);
  EXPECT_EQ(rank(zp(2, 1, 1, 1, 1)), 1);
  EXPECT_EQ(rank(zp(3, 1, 2, 2, 1)), 1);
  EXPECT_EQ(rank(zp(5, 1, 2, 2, 1)), 2);
}

TEST(Mat2, Kernels) {
  EXPECT_EQ(left_kernel(q(1, 0, 0, 0)), line(0, 1));
  EXPECT_EQ(right_kernel(q(1, 0, 0, 0)), line(0, 1));
  EXPECT_TRUE(left_kernel(q(1, 0, 0, 1)).is_zero());
  EXPECT_TRUE(right_kernel(q(0, 0, 0, 0)).is_full());
  EXPECT_EQ(left_kernel(q(1, 2, 2, 4)), line(2, -1));
  EXPECT_EQ(right_kernel(q(1, 2, 2, 4)), line(2, -1));
  EXPECT_EQ(left_kernel(q(0, 1, 0, 0)), line(0, 1));
  EXPECT_EQ(right_kernel(q(0, 1, 0, 0)), line(1, 0));
}

TEST(Subspace, Perp) {
  auto I2 = q(1, 0, 0, 1);
  EXPECT_EQ(perp(line(1, 0), I2, Side::left), line(0, 1));
  auto M = q(1, 2, 2, 4);
  EXPECT_EQ(perp(Subspace<mpq_class>::full(), M, Side::left), right_kernel(M));
  EXPECT_EQ(perp(Subspace<mpq_class>::full(), M, Side::right), left_kernel(M));
  EXPECT_TRUE(perp(Subspace<mpq_class>::zero(), M, Side::left).is_full());
  EXPECT_TRUE(perp(left_kernel(M), M, Side::left).is_full());
}

TEST(Subspace, Lattice) {
  EXPECT_TRUE(subspace_sum(line(1, 0), line(0, 1)).is_full());
  EXPECT_EQ(subspace_intersect(line(1, 0), line(1, 0)), line(1, 0));
  EXPECT_TRUE(subspace_intersect(line(1, 0), line(1, 1)).is_zero());
  EXPECT_EQ(subspace_sum(line(1, 1), Subspace<mpq_class>::zero()), line(1, 1));
  EXPECT_TRUE(Subspace<mpq_class>::full().contains(line(3, 4)));
  EXPECT_FALSE(line(3, 4).contains(Subspace<mpq_class>::full()));
  EXPECT_TRUE(line(3, 4).contains(Subspace<mpq_class>::zero()));
}

TEST(Subspace, CanonicalRepresentative) {
  EXPECT_EQ(line(2, 6).rep().x, 1);
  EXPECT_EQ(line(2, 6).rep().y, 3);
  EXPECT_EQ(line(0, -5).rep().y, 1);
  EXPECT_EQ(to_string(line(4, 2)), "<1,1/2>");
  EXPECT_EQ(to_string(Subspace<mpq_class>::zero()), "0");
  EXPECT_EQ(to_string(Subspace<mpq_class>::full()), "all");
}

namespace {

mpq_class random_q(std::mt19937_64& rng) {
  long n = static_cast<long>(rng() % 19) - 9;
  long d = static_cast<long>(rng() % 9) + 1;
  mpq_class x(n, d);
  x.canonicalize();
  return x;
}

Mat2<mpq_class> random_block(std::mt19937_64& rng, int want) {
  while (true) {
    Mat2<mpq_class> m{random_q(rng), random_q(rng), random_q(rng), random_q(rng)};
    for (auto* x : {&m.a, &m.b, &m.c, &m.d}) x->canonicalize();
    if (want == 1) m = {m.a * m.c, m.a * m.d, m.b * m.c, m.b * m.d};
    if (rank(m) == want) return m;
  }
}

Subspace<mpq_class> random_line(std::mt19937_64& rng) {
  while (true) {
    Vec2<mpq_class> v{random_q(rng), random_q(rng)};
    if (!v.is_zero()) return Subspace<mpq_class>::span(v);
  }
}

long bits(const mpq_class& x) {
  return static_cast<long>(std::max(mpz_sizeinbase(x.get_num_mpz_t(), 2), mpz_sizeinbase(x.get_den_mpz_t(), 2)));
}

}  // namespace

TEST(SubspaceProperty, GaloisCorrespondenceOnRank2) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    auto M = random_block(rng, 2);
    auto Z = random_line(rng);
    EXPECT_EQ(perp(perp(Z, M, Side::left), M, Side::right), Z);
    EXPECT_EQ(perp(perp(Z, M, Side::right), M, Side::left), Z);
  }
}

TEST(SubspaceProperty, Rank1Law) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    auto M = random_block(rng, 1);
    auto Z = random_line(rng);
    if (left_kernel(M).contains(Z))
      EXPECT_TRUE(perp(Z, M, Side::left).is_full());
    else
      EXPECT_EQ(perp(Z, M, Side::left), right_kernel(M));
  }
}

TEST(SubspaceProperty, StrictAntiMonotoneOnRank2) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    auto M = random_block(rng, 2);
    auto Z = random_line(rng), W = random_line(rng);
    if (W.contains(Z)) continue;
    EXPECT_FALSE(perp(Z, M, Side::left).contains(perp(W, M, Side::left)));
  }
}

TEST(SubspaceProperty, ScalingInvariance) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 500; ++i) {
    Vec2<mpq_class> v{random_q(rng), random_q(rng)};
    mpq_class c = random_q(rng);
    if (v.is_zero() || is_zero(c)) continue;
    Vec2<mpq_class> w{c * v.x, c * v.y};
    EXPECT_EQ(Subspace<mpq_class>::span(v), Subspace<mpq_class>::span(w));
    EXPECT_EQ(Subspace<mpq_class>::span(v).rep(), Subspace<mpq_class>::span(w).rep());
  }
}

TEST(SubspaceProperty, PerpBitGrowthIsAdditive) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 500; ++i) {
    Mat2<mpq_class> M;
    do {
      M = q(static_cast<long>(rng() % 2001) - 1000, static_cast<long>(rng() % 2001) - 1000,
            static_cast<long>(rng() % 2001) - 1000, static_cast<long>(rng() % 2001) - 1000);
    } while (rank(M) != 2);
    auto Z = random_line(rng);
    for (int step = 0; step < 4; ++step) {
      long bm = std::max({bits(M.a), bits(M.b), bits(M.c), bits(M.d)});
      long bx = std::max(bits(Z.rep().x), bits(Z.rep().y));
      auto Y = perp(Z, M, Side::left);
      long by = std::max(bits(Y.rep().x), bits(Y.rep().y));
      EXPECT_LE(by, bm + bx + 2);
      Z = Y;
    }
  }
}
