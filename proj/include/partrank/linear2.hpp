#pragma once

#include <optional>
#include <string>

#include "partrank/field.hpp"

namespace partrank {

template <class E>
struct Vec2 {
  E x{}, y{};

  bool is_zero() const { return partrank::is_zero(x) && partrank::is_zero(y); }
  friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
};

/// 2x2 block [[a, b], [c, d]] viewed as a bilinear form u^T M v.
template <class E>
struct Mat2 {
  E a{}, b{}, c{}, d{};

  bool is_zero() const {
    return partrank::is_zero(a) && partrank::is_zero(b) && partrank::is_zero(c) && partrank::is_zero(d);
  }
  friend bool operator==(const Mat2& l, const Mat2& r) {
    return l.a == r.a && l.b == r.b && l.c == r.c && l.d == r.d;
  }
  E det() const { return E(a * d - b * c); }
};

template <class E>
int rank(const Mat2<E>& m) {
  if (m.is_zero()) return 0;
  return is_zero(m.det()) ? 1 : 2;
}

/// Subspace of a two-dimensional coordinate space. A line is stored through
/// its representative with first nonzero coordinate equal to one.
template <class E>
class Subspace {
 public:
  Subspace() = default;

  static Subspace zero() { return Subspace(0); }
  static Subspace full() { return Subspace(2); }
  static Subspace span(const Vec2<E>& v) {
    if (v.is_zero()) return zero();
    Subspace s(1);
    if (!partrank::is_zero(v.x)) {
      s.rep_ = {E(v.x / v.x), E(v.y / v.x)};
    } else {
      s.rep_ = {v.x, E(v.y / v.y)};
    }
    return s;
  }

  int dim() const { return dim_; }
  bool is_zero() const { return dim_ == 0; }
  bool is_full() const { return dim_ == 2; }
  bool is_line() const { return dim_ == 1; }
  const Vec2<E>& rep() const { return rep_; }

  bool contains(const Vec2<E>& v) const {
    if (dim_ == 2 || v.is_zero()) return true;
    if (dim_ == 0) return false;
    return partrank::is_zero(E(rep_.x * v.y - rep_.y * v.x));
  }
  /// this ⊇ other
  bool contains(const Subspace& other) const {
    if (other.dim_ == 0 || dim_ == 2) return true;
    if (other.dim_ > dim_) return false;
    return rep_ == other.rep_;
  }

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.dim_ == b.dim_ && (a.dim_ != 1 || a.rep_ == b.rep_);
  }

 private:
  explicit Subspace(int d) : dim_(d) {}

  int dim_ = 0;
  Vec2<E> rep_{};
};

template <class E>
std::string to_string(const Subspace<E>& s) {
  if (s.is_zero()) return "0";
  if (s.is_full()) return "all";
  return "<" + to_string(s.rep().x) + "," + to_string(s.rep().y) + ">";
}

template <class E>
Subspace<E> subspace_sum(const Subspace<E>& a, const Subspace<E>& b) {
  if (a.contains(b)) return a;
  if (b.contains(a)) return b;
  return Subspace<E>::full();
}

template <class E>
Subspace<E> subspace_intersect(const Subspace<E>& a, const Subspace<E>& b) {
  if (a.contains(b)) return b;
  if (b.contains(a)) return a;
  return Subspace<E>::zero();
}

template <class E>
bool contains(const Subspace<E>& a, const Subspace<E>& b) {
  return a.contains(b);
}

namespace detail {
// Annihilator line of a nonzero covector w: all z with w.z = 0.
template <class E>
Subspace<E> annihilator(const E& w1, const E& w2) {
  if (is_zero(w1) && is_zero(w2)) return Subspace<E>::full();
  return Subspace<E>::span({E(-w2), w1});
}
}  // namespace detail

/// {x : x^T M = 0}
template <class E>
Subspace<E> left_kernel(const Mat2<E>& m) {
  switch (rank(m)) {
    case 0: return Subspace<E>::full();
    case 2: return Subspace<E>::zero();
  }
  // x^T M = 0 iff x is orthogonal to both columns; pick a nonzero column.
  if (!is_zero(m.a) || !is_zero(m.c)) return detail::annihilator(m.a, m.c);
  return detail::annihilator(m.b, m.d);
}

/// {y : M y = 0}
template <class E>
Subspace<E> right_kernel(const Mat2<E>& m) {
  switch (rank(m)) {
    case 0: return Subspace<E>::full();
    case 2: return Subspace<E>::zero();
  }
  if (!is_zero(m.a) || !is_zero(m.b)) return detail::annihilator(m.a, m.b);
  return detail::annihilator(m.c, m.d);
}

enum class Side { left, right };

/// Orthogonal space through the form M. For side::left, z lives on the row
/// side and the result is {y : x^T M y = 0 for all x in z}; side::right is
/// the mirror image.
template <class E>
Subspace<E> perp(const Subspace<E>& z, const Mat2<E>& m, Side side) {
  if (z.is_zero()) return Subspace<E>::full();
  if (z.is_full()) return side == Side::left ? right_kernel(m) : left_kernel(m);
  const Vec2<E>& v = z.rep();
  if (side == Side::left) return detail::annihilator(E(v.x * m.a + v.y * m.c), E(v.x * m.b + v.y * m.d));
  return detail::annihilator(E(m.a * v.x + m.b * v.y), E(m.c * v.x + m.d * v.y));
}

/// True when u^T M v vanishes for all u in x and v in y.
template <class E>
bool orthogonal(const Subspace<E>& x, const Subspace<E>& y, const Mat2<E>& m) {
  return perp(x, m, Side::left).contains(y);
}

}  // namespace partrank
