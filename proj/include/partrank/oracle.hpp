#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "partrank/augment.hpp"
#include "partrank/search.hpp"

namespace partrank {

// ---------------------------------------------------------------------------
// Dense rank

/// Fraction-free elimination over the integers after clearing row
/// denominators.
inline int dense_rank(const DenseMatrix<mpq_class>& M) {
  std::vector<std::vector<mpz_class>> a(M.rows, std::vector<mpz_class>(M.cols));
  for (std::size_t i = 0; i < M.rows; ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < M.cols; ++j) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), M(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < M.cols; ++j) a[i][j] = M(i, j).get_num() * (l / M(i, j).get_den());
  }
  mpz_class prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < M.cols && r < M.rows; ++c) {
    std::size_t p = r;
    while (p < M.rows && a[p][c] == 0) ++p;
    if (p == M.rows) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < M.rows; ++i) {
      for (std::size_t j = c + 1; j < M.cols; ++j) {
        a[i][j] = a[r][c] * a[i][j] - a[i][c] * a[r][j];
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      a[i][c] = 0;
    }
    prev = a[r][c];
    ++r;
  }
  return static_cast<int>(r);
}

namespace detail {

template <class E>
int gauss_rank(DenseMatrix<E> a) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols && r < a.rows; ++c) {
    std::size_t p = r;
    while (p < a.rows && is_zero(a(p, c))) ++p;
    if (p == a.rows) continue;
    for (std::size_t j = 0; j < a.cols; ++j) std::swap(a(p, j), a(r, j));
    E inv = a(r, c).inverse();
    for (std::size_t i = r + 1; i < a.rows; ++i) {
      if (is_zero(a(i, c))) continue;
      E f = a(i, c) * inv;
      for (std::size_t j = c; j < a.cols; ++j) a(i, j) = a(i, j) - f * a(r, j);
    }
    ++r;
  }
  return static_cast<int>(r);
}

}  // namespace detail

inline int dense_rank(const DenseMatrix<Zp>& M) { return detail::gauss_rank(M); }

// ---------------------------------------------------------------------------
// Extension fields GF(p^k), used to draw substitutions from a large set when
// the instance lives over a small prime field.

class ExtensionField {
 public:
  struct Element {
    std::vector<std::uint32_t> c;  // coefficients, low degree first
    const ExtensionField* f = nullptr;

    Element operator+(const Element& o) const { return f->add(*this, o, false); }
    Element operator-(const Element& o) const { return f->add(*this, o, true); }
    Element operator*(const Element& o) const { return f->mul(*this, o); }
    Element inverse() const { return f->inv(*this); }
    friend bool is_zero(const Element& e) {
      for (auto x : e.c)
        if (x) return false;
      return true;
    }
  };

  /// Smallest degree k with p^k >= at_least, with the first monic
  /// irreducible modulus in lexicographic order.
  ExtensionField(std::uint32_t p, std::uint64_t at_least) : p_(p) {
    k_ = 1;
    unsigned __int128 q = p;
    while (q < at_least) {
      q *= p;
      ++k_;
    }
    order_ = static_cast<std::uint64_t>(q);
    modulus_.assign(k_ + 1, 0);
    modulus_[k_] = 1;
    if (k_ == 1) return;
    std::vector<std::uint32_t> low(k_, 0);
    while (true) {
      // next candidate, constant term nonzero
      std::size_t i = 0;
      while (i < k_ && ++low[i] == p_) low[i++] = 0;
      if (low[0] == 0) continue;
      std::copy(low.begin(), low.end(), modulus_.begin());
      if (irreducible()) break;
    }
  }

  std::size_t degree() const { return k_; }
  std::uint64_t order() const { return order_; }

  Element zero() const { return {std::vector<std::uint32_t>(k_, 0), this}; }
  Element embed(std::uint32_t v) const {
    auto e = zero();
    e.c[0] = v % p_;
    return e;
  }
  template <class Rng>
  Element random(Rng& rng) const {
    std::uniform_int_distribution<std::uint32_t> d(0, p_ - 1);
    auto e = zero();
    for (auto& x : e.c) x = d(rng);
    return e;
  }

 private:
  using Poly = std::vector<std::uint32_t>;

  std::uint32_t mulp(std::uint64_t a, std::uint64_t b) const { return static_cast<std::uint32_t>(a * b % p_); }

  Element add(const Element& a, const Element& b, bool sub) const {
    Element r = zero();
    for (std::size_t i = 0; i < k_; ++i)
      r.c[i] = static_cast<std::uint32_t>((std::uint64_t{a.c[i]} + (sub ? p_ - b.c[i] : b.c[i])) % p_);
    return r;
  }

  Poly reduce(Poly t, const Poly& m) const {
    std::size_t d = m.size() - 1;
    std::uint32_t lead_inv = inverse_p(m[d]);
    for (std::size_t i = t.size(); i-- > d;) {
      if (!t[i]) continue;
      std::uint32_t f = mulp(t[i], lead_inv);
      for (std::size_t j = 0; j <= d; ++j)
        t[i - d + j] = static_cast<std::uint32_t>((t[i - d + j] + std::uint64_t{p_} - mulp(f, m[j])) % p_);
    }
    t.resize(std::min(t.size(), d));
    return t;
  }

  Poly mulmod(const Poly& a, const Poly& b) const {
    Poly t(a.size() + b.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i]) continue;
      for (std::size_t j = 0; j < b.size(); ++j) t[i + j] = static_cast<std::uint32_t>((t[i + j] + std::uint64_t{a[i]} * b[j]) % p_);
    }
    auto r = reduce(std::move(t), modulus_);
    r.resize(k_, 0);
    return r;
  }

  Element mul(const Element& a, const Element& b) const { return {mulmod(a.c, b.c), this}; }

  Poly powmod(Poly b, std::uint64_t e) const {
    Poly r(k_, 0);
    r[0] = 1;
    while (e) {
      if (e & 1) r = mulmod(r, b);
      b = mulmod(b, b);
      e >>= 1;
    }
    return r;
  }

  Element inv(const Element& a) const {
    if (is_zero(a)) throw std::domain_error("division by zero in extension field");
    return {powmod(a.c, order_ - 2), this};
  }

  std::uint32_t inverse_p(std::uint32_t v) const {
    std::uint64_t r = 1, b = v, e = p_ - 2;
    while (e) {
      if (e & 1) r = r * b % p_;
      b = b * b % p_;
      e >>= 1;
    }
    return static_cast<std::uint32_t>(r);
  }

  static void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
  }

  Poly gcd(Poly a, Poly b) const {
    trim(a);
    trim(b);
    while (!b.empty()) {
      auto r = reduce(a, b);
      trim(r);
      a = std::move(b);
      b = std::move(r);
    }
    return a;
  }

  // gcd(m, x^(p^i) - x) = 1 for all i <= k/2
  bool irreducible() const {
    Poly x(k_, 0);
    x[1 % k_] = 1;
    Poly h = x;
    for (std::size_t i = 1; i <= k_ / 2; ++i) {
      h = powmod(h, p_);
      Poly d = h;
      d[1] = static_cast<std::uint32_t>((d[1] + p_ - 1) % p_);
      auto g = gcd(modulus_, d);
      if (g.size() != 1) return false;
    }
    return true;
  }

  std::uint32_t p_;
  std::size_t k_;
  std::uint64_t order_ = 0;
  Poly modulus_;
};

// ---------------------------------------------------------------------------
// Monte Carlo rank

struct RankReport {
  int rank = 0;
  std::string method;  // "gaussian", "montecarlo" or "brute"
  int trials = 0;
  std::uint64_t prime = 0;
  std::uint64_t seed = 0;
};

constexpr std::uint64_t kDefaultPrime = 2147483647ULL;

namespace detail {

inline mpq_class draw(const RationalField&, std::mt19937_64& rng, std::uint64_t prime) {
  std::uniform_int_distribution<std::uint64_t> d(0, prime - 1);
  return mpq_class(mpz_class(std::to_string(d(rng))));
}

}  // namespace detail

/// Rank of A after substituting random values for the indeterminates,
/// maximized over trials. Over Q the values are integers in [0, prime);
/// over GF(q) they are drawn from an extension of order at least prime.
/// Trial t uses the generator seeded with seed + t.
inline RankReport monte_carlo_rank(const RationalMatrix& A, int trials = 5, std::uint64_t prime = kDefaultPrime,
                                   std::uint64_t seed = 1) {
  if (!is_prime(prime)) throw ParseError("modulus not prime: " + std::to_string(prime));
  RankReport rep{0, "montecarlo", trials, prime, seed};
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
    DenseMatrix<mpq_class> M(2 * static_cast<size_t>(A.mu()), 2 * static_cast<size_t>(A.nu()), mpq_class(0));
    for (const auto& e : A.edges()) {
      mpq_class x = detail::draw(A.field(), rng, prime);
      const auto& b = A.block(e.key);
      size_t r = 2 * static_cast<size_t>(e.key.alpha), c = 2 * static_cast<size_t>(e.key.beta);
      M(r, c) = b.a * x;
      M(r, c + 1) = b.b * x;
      M(r + 1, c) = b.c * x;
      M(r + 1, c + 1) = b.d * x;
    }
    rep.rank = std::max(rep.rank, dense_rank(M));
  }
  return rep;
}

inline RankReport monte_carlo_rank(const PrimeMatrix& A, int trials = 5, std::uint64_t prime = kDefaultPrime,
                                   std::uint64_t seed = 1) {
  if (!is_prime(prime)) throw ParseError("modulus not prime: " + std::to_string(prime));
  ExtensionField F(A.field().modulus(), prime);
  using X = ExtensionField::Element;
  RankReport rep{0, "montecarlo", trials, prime, seed};
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
    DenseMatrix<X> M(2 * static_cast<size_t>(A.mu()), 2 * static_cast<size_t>(A.nu()), F.zero());
    for (const auto& e : A.edges()) {
      X x = F.random(rng);
      const auto& b = A.block(e.key);
      size_t r = 2 * static_cast<size_t>(e.key.alpha), c = 2 * static_cast<size_t>(e.key.beta);
      M(r, c) = F.embed(b.a.v) * x;
      M(r, c + 1) = F.embed(b.b.v) * x;
      M(r + 1, c) = F.embed(b.c.v) * x;
      M(r + 1, c + 1) = F.embed(b.d.v) * x;
    }
    rep.rank = std::max(rep.rank, detail::gauss_rank(M));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Certificates

struct CheckReport {
  bool ok = true;
  std::string detail;
};

/// Checks A_{αβ}(X_α, Y_β) = 0 on every block and the witness value.
template <class Field>
CheckReport verify_witness(const Witness<typename Field::Element>& w, const PartitionedMatrix<Field>& A, int claimed_r) {
  if (w.X.size() != static_cast<size_t>(A.mu()) || w.Y.size() != static_cast<size_t>(A.nu()))
    return {false, "witness has the wrong number of subspaces"};
  for (const auto& e : A.edges()) {
    const auto& x = w.X[static_cast<size_t>(e.key.alpha)];
    const auto& y = w.Y[static_cast<size_t>(e.key.beta)];
    if (!A.perp_from(Vertex::alpha(e.key.alpha), x, e.key).contains(y))
      return {false, "block " + to_string(e.key) + " is not zero on the witness"};
  }
  if (w.value() != claimed_r)
    return {false, "witness value " + std::to_string(w.value()) + " differs from " + std::to_string(claimed_r)};
  return {};
}

/// Exhaustive search over edge subsets passing check_matching.
template <class Field>
std::pair<EdgeSet, int> brute_force_max_matching(const PartitionedMatrix<Field>& A) {
  if (A.mu() * A.nu() > 12) throw std::invalid_argument("instance too large for enumeration");
  const auto& edges = A.edges();
  std::size_t n = edges.size();
  EdgeSet best(A.mu(), A.nu());
  int best_r = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    EdgeSet I(A.mu(), A.nu());
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) I.insert(edges[i].key);
    int r = r_value(A, I);
    if (r <= best_r) continue;
    if (!check_matching(A, I).ok()) continue;
    best = I;
    best_r = r;
  }
  return {best, best_r};
}

/// Sum of dim ker over both sides of the canonical substitution predicted by
/// the per-vertex kernels.
template <class Field>
std::pair<int, int> kernel_dimensions(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  int left = 0, right = 0;
  for (int a = 0; a < A.mu(); ++a) left += ker_of(A, I, Vertex::alpha(a)).dim();
  for (int b = 0; b < A.nu(); ++b) right += ker_of(A, I, Vertex::beta(b)).dim();
  return {left, right};
}

/// Compares the kernels of the canonical substitution with the direct sums of
/// per-vertex kernels: dimensions on both sides, and every spanning vector of
/// a vertex kernel annihilates the dense matrix.
template <class Field>
CheckReport check_kernel_formula(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  using E = typename Field::Element;
  auto M = canonical_substitution(A, I);
  int rank = dense_rank(M);
  auto [left, right] = kernel_dimensions(A, I);
  if (left != 2 * A.mu() - rank)
    return {false, "left kernel dimension " + std::to_string(2 * A.mu() - rank) + " but vertex sum " +
                       std::to_string(left)};
  if (right != 2 * A.nu() - rank)
    return {false, "right kernel dimension " + std::to_string(2 * A.nu() - rank) + " but vertex sum " +
                       std::to_string(right)};
  auto basis = [&](const Subspace<E>& s) {
    std::vector<Vec2<E>> out;
    if (s.is_line()) out.push_back(s.rep());
    if (s.is_full()) out = {{A.field().one(), A.field().zero()}, {A.field().zero(), A.field().one()}};
    return out;
  };
  for (int a = 0; a < A.mu(); ++a)
    for (const auto& v : basis(ker_of(A, I, Vertex::alpha(a)))) {
      std::size_t r = 2 * static_cast<std::size_t>(a);
      for (std::size_t j = 0; j < M.cols; ++j)
        if (!is_zero(E(v.x * M(r, j) + v.y * M(r + 1, j))))
          return {false, "kernel at " + to_string(Vertex::alpha(a)) + " is not in the left kernel"};
    }
  for (int b = 0; b < A.nu(); ++b)
    for (const auto& v : basis(ker_of(A, I, Vertex::beta(b)))) {
      std::size_t c = 2 * static_cast<std::size_t>(b);
      for (std::size_t i = 0; i < M.rows; ++i)
        if (!is_zero(E(M(i, c) * v.x + M(i, c + 1) * v.y)))
          return {false, "kernel at " + to_string(Vertex::beta(b)) + " is not in the right kernel"};
    }
  return {};
}

// ---------------------------------------------------------------------------
// Solver

struct SolveStats {
  int augmentations = 0;
  std::vector<AugmentStats> rounds;
  std::vector<int> r_trace;
  double seconds = 0;
};

template <class Field>
struct SolveResult {
  using E = typename Field::Element;

  int rank = 0;
  Matching<Field> matching;
  DenseMatrix<E> completion;
  Witness<E> witness;
  SolveStats stats;
};

template <class Field>
struct SolveOptions {
  bool check = true;
  std::ostream* trace = nullptr;
  /// Called with every subspace appearing in labels, walks and the witness.
  std::function<void(const Subspace<typename Field::Element>&)> observe;
};

template <class Field>
SolveResult<Field> solve(const PartitionedMatrix<Field>& A, const SolveOptions<Field>& opt = {}) {
  using E = typename Field::Element;
  auto start = std::chrono::steady_clock::now();
  SolveResult<Field> res;
  Matching<Field> M{EdgeSet(A.mu(), A.nu()), Labeling<E>(A.mu(), A.nu())};
  auto observe_matching = [&](const Matching<Field>& m) {
    if (!opt.observe) return;
    for (int a = 0; a < A.mu(); ++a)
      if (m.labels.has(Vertex::alpha(a)))
        for (Sign s : {Sign::plus, Sign::minus}) opt.observe(m.labels.get(Vertex::alpha(a), s));
    for (int b = 0; b < A.nu(); ++b)
      if (m.labels.has(Vertex::beta(b)))
        for (Sign s : {Sign::plus, Sign::minus}) opt.observe(m.labels.get(Vertex::beta(b), s));
  };
  res.stats.r_trace.push_back(0);
  while (true) {
    auto found = find_witness_or_walk(A, M, opt.trace);
    if (auto* w = std::get_if<Witness<E>>(&found)) {
      res.witness = std::move(*w);
      break;
    }
    auto& walk = std::get<Trail<E>>(found);
    if (opt.observe)
      for (const auto& v : walk) {
        opt.observe(v.in);
        opt.observe(v.out);
      }
    AugmentOptions ao;
    ao.check = opt.check;
    ao.trace = opt.trace;
    AugmentStats st;
    typename Augmenter<Field>::Observer obs;
    if (opt.observe)
      obs = [&](const Matching<Field>& m, const Trail<E>& t) {
        observe_matching(m);
        for (const auto& v : t) {
          opt.observe(v.in);
          opt.observe(v.out);
        }
      };
    M = augment(A, M, walk, ao, &st, obs);
    res.stats.rounds.push_back(std::move(st));
    ++res.stats.augmentations;
    res.stats.r_trace.push_back(r_value(A, M.edges));
    observe_matching(M);
  }
  if (opt.observe) {
    for (const auto& x : res.witness.X) opt.observe(x);
    for (const auto& y : res.witness.Y) opt.observe(y);
  }
  res.rank = r_value(A, M.edges);
  res.completion = canonical_substitution(A, M.edges);
  res.matching = std::move(M);
  res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace partrank
