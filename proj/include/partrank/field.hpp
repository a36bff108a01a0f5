#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace partrank {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Residue modulo a prime. The modulus travels with the value so that
/// elements compose without a field object in scope.
struct Zp {
  std::uint32_t v = 0;
  std::uint32_t p = 0;

  friend bool operator==(Zp a, Zp b) { return a.v == b.v; }
  // Default-constructed zeros carry no modulus; take it from the other side.
  static std::uint32_t mod(Zp a, Zp b) { return a.p ? a.p : b.p; }
  friend Zp operator+(Zp a, Zp b) {
    auto p = mod(a, b);
    return {static_cast<std::uint32_t>((std::uint64_t{a.v} + b.v) % p), p};
  }
  friend Zp operator-(Zp a, Zp b) {
    auto p = mod(a, b);
    return {static_cast<std::uint32_t>((std::uint64_t{a.v} + p - b.v) % p), p};
  }
  friend Zp operator-(Zp a) { return {a.v == 0 ? 0u : a.p - a.v, a.p}; }
  friend Zp operator*(Zp a, Zp b) {
    auto p = mod(a, b);
    return {static_cast<std::uint32_t>((std::uint64_t{a.v} * b.v) % p), p};
  }
  Zp inverse() const {
    if (v == 0) throw std::domain_error("division by zero in GF(p)");
    // Fermat: v^(p-2)
    std::uint64_t r = 1, b = v, e = p - 2;
    while (e) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return {static_cast<std::uint32_t>(r), p};
  }
  friend Zp operator/(Zp a, Zp b) { return a * b.inverse(); }
};

inline bool is_zero(const Zp& a) { return a.v == 0; }
inline bool is_zero(const mpq_class& a) { return sgn(a) == 0; }
inline std::string to_string(const Zp& a) { return std::to_string(a.v); }
inline std::string to_string(const mpq_class& a) { return a.get_str(); }

/// The rationals. Elements are GMP rationals, always canonical.
class RationalField {
 public:
  using Element = mpq_class;

  Element zero() const { return Element(0); }
  Element one() const { return Element(1); }
  Element from_int(long long n) const { return Element(static_cast<long>(n)); }

  Element parse(std::string_view text) const {
    std::string s(text);
    if (s.empty()) throw ParseError("empty rational");
    Element e;
    if (e.set_str(s, 10) != 0 || e.get_den() == 0) throw ParseError("malformed rational '" + s + "'");
    e.canonicalize();
    return e;
  }
  std::string format(const Element& e) const { return e.get_str(); }

  bool operator==(const RationalField&) const = default;
  std::string name() const { return "Q"; }
};

class PrimeField {
 public:
  using Element = Zp;

  explicit PrimeField(std::uint32_t p) : p_(p) {
    if (!is_prime(p)) throw ParseError("modulus not prime: " + std::to_string(p));
  }

  std::uint32_t modulus() const { return p_; }
  Element zero() const { return {0, p_}; }
  Element one() const { return {1 % p_, p_}; }
  Element from_int(long long n) const {
    long long r = n % static_cast<long long>(p_);
    if (r < 0) r += p_;
    return {static_cast<std::uint32_t>(r), p_};
  }

  Element parse(std::string_view text) const {
    std::string s(text);
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      Element den = parse_int(s.substr(slash + 1));
      if (is_zero(den)) throw ParseError("zero denominator '" + s + "'");
      return parse_int(s.substr(0, slash)) / den;
    }
    return parse_int(s);
  }
  std::string format(const Element& e) const { return std::to_string(e.v); }

  bool operator==(const PrimeField&) const = default;
  std::string name() const { return "GF(" + std::to_string(p_) + ")"; }

 private:
  Element parse_int(const std::string& s) const {
    mpz_class z;
    if (s.empty() || z.set_str(s, 10) != 0) throw ParseError("malformed integer '" + s + "'");
    mpz_class r = z % p_;
    if (r < 0) r += p_;
    return {static_cast<std::uint32_t>(r.get_ui()), p_};
  }

  std::uint32_t p_;
};

}  // namespace partrank
