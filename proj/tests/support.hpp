#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "partrank/generate.hpp"
#include "partrank/report.hpp"

namespace partrank {

template <class E>
void PrintTo(const Subspace<E>& s, std::ostream* os) { *os << to_string(s); }
inline void PrintTo(const EdgeKey& e, std::ostream* os) { *os << to_string(e); }
inline void PrintTo(const Vertex& v, std::ostream* os) { *os << to_string(v); }
inline void PrintTo(Sign s, std::ostream* os) { *os << to_string(s); }

}  // namespace partrank

namespace partrank::testing {

inline std::string fixture_path(const std::string& name) { return std::string(PARTRANK_FIXTURES) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RationalMatrix fixture(const std::string& name) {
  return std::get<RationalMatrix>(load_instance(read_file(fixture_path(name + ".json"))));
}

inline Mat2<mpq_class> q(long a, long b, long c, long d) {
  return {mpq_class(a), mpq_class(b), mpq_class(c), mpq_class(d)};
}

inline Mat2<Zp> zp(std::uint32_t p, long a, long b, long c, long d) {
  PrimeField f(p);
  return {f.from_int(a), f.from_int(b), f.from_int(c), f.from_int(d)};
}

inline Subspace<mpq_class> line(long x, long y) { return Subspace<mpq_class>::span({mpq_class(x), mpq_class(y)}); }

/// Edge set from 1-based (alpha, beta) pairs.
inline EdgeSet edges(int mu, int nu, std::initializer_list<std::pair<int, int>> list) {
  EdgeSet I(mu, nu);
  for (auto [a, b] : list) I.insert({a - 1, b - 1});
  return I;
}

inline Vertex a(int i) { return Vertex::alpha(i - 1); }
inline Vertex b(int j) { return Vertex::beta(j - 1); }
inline EdgeKey e(int i, int j) { return {i - 1, j - 1}; }

/// Rank of A with the edges of I substituted by random values; the
/// symbolic rank of A_I with overwhelming probability.
template <class Field>
int symbolic_rank(const PartitionedMatrix<Field>& A, const EdgeSet& I, std::uint64_t seed = 3) {
  PartitionedMatrix<Field> sub(A.field(), A.mu(), A.nu());
  for (EdgeKey k : I.keys()) sub.set_block(k.alpha, k.beta, A.block(k));
  return monte_carlo_rank(sub, 5, kDefaultPrime, seed).rank;
}

/// Every edge subset of a small instance.
template <class Field>
std::vector<EdgeSet> all_subsets(const PartitionedMatrix<Field>& A) {
  std::vector<EdgeSet> out;
  const auto& E = A.edges();
  for (std::uint32_t mask = 0; mask < (1u << E.size()); ++mask) {
    EdgeSet I(A.mu(), A.nu());
    for (std::size_t i = 0; i < E.size(); ++i)
      if (mask >> i & 1) I.insert(E[i].key);
    out.push_back(I);
  }
  return out;
}

}  // namespace partrank::testing
