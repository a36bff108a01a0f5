// Builds a small instance in code, solves it and prints the certificates.
#include <iostream>

#include "partrank/report.hpp"

int main() {
  using namespace partrank;
  RationalField Q;
  RationalMatrix A(Q, 2, 2);
  auto m = [&](int a, int b, int c, int d) {
    return Mat2<mpq_class>{Q.from_int(a), Q.from_int(b), Q.from_int(c), Q.from_int(d)};
  };
  A.set_block(0, 0, m(1, 0, 0, 0));
  A.set_block(0, 1, m(1, 0, 0, 1));
  A.set_block(1, 0, m(1, 0, 0, 1));
  A.set_block(1, 1, m(0, 0, 0, 1));

  auto res = solve(A);
  std::cout << "rank " << res.rank << "\n";
  for (EdgeKey e : res.matching.edges.keys())
    std::cout << "  edge " << to_string(e) << " sign " << to_string(res.matching.edges.sign(e)) << "\n";
  std::cout << "completion rank " << dense_rank(res.completion) << "\n";
  std::cout << "witness value " << res.witness.value() << "\n";
  std::cout << to_json(A, res.matching).dump(2) << "\n";
}
