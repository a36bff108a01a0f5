#include <gtest/gtest.h>

#include "support.hpp"

using namespace partrank;
using namespace partrank::testing;

TEST(Instance, EdgesOfFixtures) {
  auto E1 = fixture("e1");
  ASSERT_EQ(E1.edges().size(), 1u);
  EXPECT_EQ(E1.edges()[0].key, e(1, 1));
  EXPECT_EQ(E1.edges()[0].rank, 2);

  auto E3 = fixture("e3");
  ASSERT_EQ(E3.edges().size(), 2u);
  EXPECT_EQ(E3.edges()[0].key, e(1, 1));
  EXPECT_EQ(E3.edges()[1].key, e(1, 2));
  EXPECT_EQ(E3.edges()[0].rank, 1);
  EXPECT_EQ(E3.edges()[1].rank, 1);

  RationalMatrix empty(RationalField{}, 2, 3);
  EXPECT_TRUE(empty.edges().empty());
}

TEST(Instance, EdgesAreSortedWhateverTheInsertionOrder) {
  RationalMatrix A(RationalField{}, 3, 3);
  A.set_block(2, 0, q(1, 0, 0, 1));
  A.set_block(0, 2, q(1, 0, 0, 0));
  A.set_block(0, 1, q(1, 1, 1, 1));
  A.set_block(1, 1, q(0, 1, 1, 0));
  std::vector<EdgeKey> keys;
  for (const auto& x : A.edges()) keys.push_back(x.key);
  EXPECT_EQ(keys, (std::vector<EdgeKey>{{0, 1}, {0, 2}, {1, 1}, {2, 0}}));
  EXPECT_EQ(A.rank({0, 1}), 1);
  EXPECT_EQ(A.rank({1, 1}), 2);
  EXPECT_EQ(A.edges_at(Vertex::alpha(0)).size(), 2u);
  EXPECT_EQ(A.edges_at(Vertex::beta(1)).size(), 2u);
}

TEST(Instance, LoadE1) {
  auto A = fixture("e1");
  EXPECT_EQ(A.mu(), 1);
  EXPECT_EQ(A.nu(), 1);
  ASSERT_TRUE(A.has_edge(e(1, 1)));
  EXPECT_EQ(A.block(e(1, 1)), q(1, 0, 0, 1));
}

TEST(Instance, LoadPrimeFieldAndFractions) {
  auto any = load_instance(R"({"mu":1,"nu":1,"field":{"gf":5},"blocks":[{"alpha":1,"beta":1,"m":[["1/2",7],[0,"-1"]]}]})");
  auto& A = std::get<PrimeMatrix>(any);
  EXPECT_EQ(A.field().modulus(), 5u);
  EXPECT_EQ(A.block(e(1, 1)).a.v, 3u);
  EXPECT_EQ(A.block(e(1, 1)).b.v, 2u);
  EXPECT_EQ(A.block(e(1, 1)).d.v, 4u);

  auto any_q = load_instance(R"({"mu":1,"nu":1,"field":"Q","blocks":[{"alpha":1,"beta":1,"m":[["1/2","2/4"],[1,1]]}]})");
  auto& B = std::get<RationalMatrix>(any_q);
  EXPECT_EQ(B.rank(e(1, 1)), 1);
}

TEST(Instance, Errors) {
  auto fails_with = [](const char* doc, const std::string& needle) {
    try {
      load_instance(doc);
    } catch (const ParseError& err) {
      EXPECT_NE(std::string(err.what()).find(needle), std::string::npos) << err.what();
      return;
    }
    ADD_FAILURE() << "accepted " << doc;
  };
  fails_with(R"({"mu":1,"nu":1,"field":"Q","blocks":[{"alpha":1,"beta":1,"m":[[1,0],[0,1]]},{"alpha":1,"beta":1,"m":[[1,0],[0,1]]}]})",
             "duplicate block");
  fails_with(R"({"mu":1,"nu":1,"field":{"gf":4},"blocks":[]})", "modulus not prime");
  fails_with(R"({"mu":1,"nu":1,"field":"Q","blocks":[{"alpha":1,"beta":1,"m":[[0,0],[0,0]]}]})", "zero block");
  fails_with(R"({"mu":1,"nu":1,"field":"Q","blocks":[{"alpha":2,"beta":1,"m":[[1,0],[0,1]]}]})", "(2,1)");
  fails_with(R"({"mu":1,"nu":1,"field":"R","blocks":[]})", "unknown field");
  fails_with(R"({"mu":1,"nu":1,"field":"Q","blocks":[{"alpha":1,"beta":1,"m":[[1,0]]}]})", "(1,1)");
  fails_with(R"({"mu":0,"nu":1,"field":"Q","blocks":[]})", "positive");
  fails_with(R"({"mu":1,"field":"Q","blocks":[]})", "malformed");
  fails_with("{not json", "malformed JSON");
}

TEST(Instance, SaveLoadRoundTripOnFixtures) {
  for (const char* name : {"e1", "e2", "e3", "e4", "e5"}) {
    auto A = fixture(name);
    auto again = std::get<RationalMatrix>(load_instance(save_instance(A)));
    EXPECT_EQ(A, again) << name;
    EXPECT_EQ(save_instance(again), save_instance(A)) << name;
  }
}

TEST(InstanceProperty, RoundTripAndEdgeBound) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GenParams g{1 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed / 5 % 5), 0.6, (seed % 3) / 2.0, seed};
    auto A = random_instance(RationalField{}, g);
    EXPECT_EQ(std::get<RationalMatrix>(load_instance(save_instance(A))), A);
    EXPECT_LE(A.edges().size(), static_cast<std::size_t>(A.mu() * A.nu()));
    auto P = random_instance(PrimeField(101), g);
    EXPECT_EQ(std::get<PrimeMatrix>(load_instance(save_instance(P))), P);
    EXPECT_LE(P.edges().size(), static_cast<std::size_t>(P.mu() * P.nu()));
  }
}

TEST(Generator, DeterministicAndShaped) {
  GenParams g{3, 3, 0.5, 0.5, 1};
  EXPECT_EQ(random_instance(PrimeField(101), g), random_instance(PrimeField(101), g));
  auto full = random_instance(RationalField{}, GenParams{2, 2, 1.0, 0.0, 7});
  ASSERT_EQ(full.edges().size(), 4u);
  for (const auto& x : full.edges()) EXPECT_EQ(x.rank, 2);
  auto ones = random_instance(RationalField{}, GenParams{3, 3, 1.0, 1.0, 7});
  for (const auto& x : ones.edges()) EXPECT_EQ(x.rank, 1);
  EXPECT_TRUE(random_instance(RationalField{}, GenParams{3, 3, 0.0, 0.5, 7}).edges().empty());
  EXPECT_THROW(random_instance(RationalField{}, GenParams{3, 3, 1.5, 0.5, 7}), std::invalid_argument);
}
