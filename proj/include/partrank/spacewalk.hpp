#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "partrank/matching.hpp"

namespace partrank {

/// One vertex occurrence of a space-walk. `in` is the subspace on arrival
/// and `out` the subspace on departure; they differ only where an outer
/// walk hands over to an inner walk with a different initial space.
template <class E>
struct Visit {
  Vertex vertex;
  Subspace<E> in, out;

  bool operator==(const Visit&) const = default;
};

template <class E>
using Trail = std::vector<Visit<E>>;

enum class SegmentKind { outer, inner };

/// Maximal outer or inner piece of a trail, as inclusive visit indices.
/// Consecutive segments share their junction visit.
struct Segment {
  SegmentKind kind;
  std::size_t first, last;

  std::size_t steps() const { return last - first; }
};

/// Sequence concatenation that merges equal junction elements.
template <class T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  auto it = b.begin();
  if (!a.empty() && it != b.end() && a.back() == *it) ++it;
  a.insert(a.end(), it, b.end());
  return a;
}

/// Joins two trails at a shared vertex; the junction keeps the arrival space
/// of `a` and the departure space of `b`.
template <class E>
Trail<E> join(Trail<E> a, const Trail<E>& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (!(a.back().vertex == b.front().vertex)) throw StructureError("space-walks do not meet");
  a.back().out = b.front().out;
  a.insert(a.end(), b.begin() + 1, b.end());
  return a;
}

/// Subspace at visit i as seen from segment s.
template <class E>
const Subspace<E>& space_at(const Trail<E>& t, const Segment& s, std::size_t i) {
  return i == s.first ? t[i].out : t[i].in;
}

/// Forward propagation: start with `start` at path[0] and take orthogonal
/// spaces along each consecutive edge.
template <class Field>
Trail<typename Field::Element> front_propagate(const PartitionedMatrix<Field>& A,
                                               const Subspace<typename Field::Element>& start,
                                               std::span<const Vertex> path) {
  Trail<typename Field::Element> t;
  if (path.empty()) return t;
  t.push_back({path[0], start, start});
  for (std::size_t i = 1; i < path.size(); ++i) {
    auto s = A.perp_from(path[i - 1], t.back().out, edge_between(path[i - 1], path[i]));
    t.push_back({path[i], s, s});
  }
  return t;
}

/// Backward propagation: `end` sits at the last vertex of path.
template <class Field>
Trail<typename Field::Element> back_propagate(const PartitionedMatrix<Field>& A, std::span<const Vertex> path,
                                              const Subspace<typename Field::Element>& end) {
  Trail<typename Field::Element> t(path.size());
  if (path.empty()) return t;
  t.back() = {path.back(), end, end};
  for (std::size_t i = path.size() - 1; i-- > 0;) {
    auto s = A.perp_from(path[i + 1], t[i + 1].in, edge_between(path[i], path[i + 1]));
    t[i] = {path[i], s, s};
  }
  return t;
}

/// Extends a trail ending at path[0] by front propagation of its last
/// arrival space along path.
template <class Field>
Trail<typename Field::Element> extend(const PartitionedMatrix<Field>& A, Trail<typename Field::Element> t,
                                      std::span<const Vertex> path) {
  if (t.empty()) throw StructureError("cannot extend an empty space-walk");
  if (!(t.back().vertex == path.front())) throw StructureError("extension does not start at the walk end");
  auto tail = front_propagate(A, t.back().in, path);
  t.back().out = t.back().in;
  t.insert(t.end(), tail.begin() + 1, tail.end());
  return t;
}

template <class E>
std::vector<Vertex> vertices_of(const Trail<E>& t, std::size_t first, std::size_t last) {
  std::vector<Vertex> v;
  for (std::size_t i = first; i <= last; ++i) v.push_back(t[i].vertex);
  return v;
}

/// Result of splitting a trail into outer and inner segments.
struct ParsedWalk {
  std::vector<Segment> segments;
  std::string error;

  bool ok() const { return error.empty(); }
  std::size_t m() const { return segments.size() / 2; }
  /// Outer segment P_i.
  const Segment& outer(std::size_t i) const { return segments[2 * i]; }
  /// Inner segment Q_i, i >= 1.
  const Segment& inner(std::size_t i) const { return segments[2 * i - 1]; }
};

/// Edge role relative to a q-matching.
enum class EdgeRole { off, isolated, inner };

template <class Field>
EdgeRole edge_role(const PartitionedMatrix<Field>& A, const EdgeSet& I, EdgeKey e) {
  if (!I.contains(e)) return EdgeRole::off;
  if (A.rank(e) == 2 && I.degree(Vertex::alpha(e.alpha)) == 1 && I.degree(Vertex::beta(e.beta)) == 1)
    return EdgeRole::isolated;
  return EdgeRole::inner;
}

/// Splits a trail into alternating outer and inner segments with respect
/// to I. Structure only; subspaces are checked by validate_augmenting.
template <class Field, class E>
ParsedWalk parse_walk(const PartitionedMatrix<Field>& A, const EdgeSet& I, const Trail<E>& t) {
  ParsedWalk pw;
  if (t.size() < 2) {
    pw.error = "walk has no edges";
    return pw;
  }
  std::vector<EdgeRole> roles;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    Vertex u = t[i].vertex, v = t[i + 1].vertex;
    if (u.part == v.part) {
      pw.error = "consecutive vertices on the same side at position " + std::to_string(i);
      return pw;
    }
    EdgeKey e = edge_between(u, v);
    if (!A.has_edge(e)) {
      pw.error = "walk uses a zero block " + to_string(e);
      return pw;
    }
    roles.push_back(edge_role(A, I, e));
  }
  std::size_t i = 0;
  while (i < roles.size()) {
    bool inner = roles[i] == EdgeRole::inner;
    std::size_t j = i;
    while (j < roles.size() && (roles[j] == EdgeRole::inner) == inner) ++j;
    pw.segments.push_back({inner ? SegmentKind::inner : SegmentKind::outer, i, j});
    i = j;
  }
  for (std::size_t s = 0; s < pw.segments.size(); ++s) {
    const auto& seg = pw.segments[s];
    bool want_outer = s % 2 == 0;
    if ((seg.kind == SegmentKind::outer) != want_outer) {
      pw.error = "segments do not alternate";
      return pw;
    }
    if (t[seg.first].vertex.is_row() == (seg.kind == SegmentKind::outer)) {
      pw.error = "segment " + std::to_string(s) + " starts on the wrong side";
      return pw;
    }
    if (seg.steps() % 2 == 0) {
      pw.error = "segment " + std::to_string(s) + " ends on the wrong side";
      return pw;
    }
    for (std::size_t k = seg.first; k < seg.last; ++k) {
      EdgeKey e = edge_between(t[k].vertex, t[k + 1].vertex);
      bool even = (k - seg.first) % 2 == 0;
      if (seg.kind == SegmentKind::outer) {
        if (even != (roles[k] == EdgeRole::off)) {
          pw.error = "outer segment " + std::to_string(s) + " does not alternate off/isolated edges at " + to_string(e);
          return pw;
        }
      } else if (!even && A.rank(e) != 2) {
        pw.error = "inner segment crosses rank-1 edge " + to_string(e) + " from the column side";
        return pw;
      }
    }
    for (std::size_t k = seg.first + 1; k < seg.last; ++k)
      if (!(t[k].in == t[k].out)) {
        pw.error = "split subspace inside a segment at position " + std::to_string(k);
        return pw;
      }
    if (seg.kind == SegmentKind::inner && !(t[seg.last].in == t[seg.last].out)) {
      pw.error = "subspace changes where an inner segment hands over at position " + std::to_string(seg.last);
      return pw;
    }
  }
  if (pw.segments.back().kind != SegmentKind::outer) pw.error = "walk ends with an inner segment";
  if (!(t.front().in == t.front().out) || !(t.back().in == t.back().out)) pw.error = "split subspace at an end";
  return pw;
}

struct WalkReport {
  std::string violation;

  bool ok() const { return violation.empty(); }
};

/// Full check of the augmenting space-walk conditions for the q-matching M:
/// outer propagation, inner labels, compatibility, both endpoint conditions
/// and irredundancy.
template <class Field>
WalkReport validate_augmenting(const PartitionedMatrix<Field>& A, const Matching<Field>& M,
                               const Trail<typename Field::Element>& t) {
  using Space = Subspace<typename Field::Element>;
  auto fail = [](std::string s) { return WalkReport{std::move(s)}; };
  auto pw = parse_walk(A, M.edges, t);
  if (!pw.ok()) return fail("structure: " + pw.error);

  for (const auto& seg : pw.segments) {
    for (std::size_t k = seg.first; k < seg.last; ++k) {
      Vertex u = t[k].vertex, v = t[k + 1].vertex;
      EdgeKey e = edge_between(u, v);
      const Space& here = space_at(t, seg, k);
      const Space& next = t[k + 1].in;
      if (seg.kind == SegmentKind::outer) {
        if ((k - seg.first) % 2 == 0) {
          if (here.is_zero()) return fail("outer: zero subspace at " + to_string(u));
          if (A.right_kernel(e).contains(here)) return fail("outer: subspace inside the kernel on " + to_string(e));
        }
        if (!(A.perp_from(u, here, e) == next)) return fail("outer: propagation mismatch on " + to_string(e));
      } else if ((k - seg.first) % 2 == 0) {
        if (!M.labels.has(u) || !M.labels.has(v)) return fail("inner: unlabeled vertex on " + to_string(e));
        Sign s = M.edges.sign(e);
        if (!(here == M.labels.get(u, s))) return fail("inner: subspace differs from label at " + to_string(u));
        if (!(next == M.labels.get(v, -s))) return fail("inner: subspace differs from label at " + to_string(v));
      }
    }
  }
  // Handover from an outer segment into an inner segment.
  for (std::size_t i = 1; i < pw.segments.size(); i += 2) {
    std::size_t k = pw.segments[i].first;
    Vertex a = t[k].vertex;
    EdgeKey first = edge_between(a, t[k + 1].vertex);
    Sign s = M.edges.sign(first);
    if (t[k].in == M.labels.get(a, -s)) return fail("compatibility violated at " + to_string(a));
  }
  Vertex b0 = t.front().vertex;
  Space k0 = ker_of(A, M.edges, b0);
  if (k0.is_zero() || !(t.front().out == k0)) return fail("initial subspace is not the nonzero kernel at " + to_string(b0));
  Vertex al = t.back().vertex;
  Space kl = ker_of(A, M.edges, al);
  if (kl.is_zero() || t.back().in.contains(kl)) return fail("final subspace contains the kernel at " + to_string(al));

  std::map<Vertex, std::vector<std::size_t>> seen;
  for (std::size_t i = 0; i < t.size(); ++i) seen[t[i].vertex].push_back(i);
  for (const auto& [v, at] : seen) {
    if (at.size() > 2) return fail("vertex " + to_string(v) + " appears more than twice");
    if (at.size() == 2) {
      const Space& x = t[at[0]].in;
      const Space& y = t[at[1]].in;
      if (v.is_row() ? y.contains(x) : x.contains(y)) return fail("redundant revisit of " + to_string(v));
    }
  }
  return {};
}

/// Inner space-walk along a walk of I given by its vertices (alpha first).
template <class Field>
Trail<typename Field::Element> inner_space_walk(const Matching<Field>& M, std::span<const Vertex> path) {
  Trail<typename Field::Element> t;
  if (path.size() < 2 || !path.front().is_row()) throw StructureError("inner walk must start at a row vertex");
  for (std::size_t i = 0; i < path.size(); ++i) {
    Vertex v = path[i];
    EdgeKey e = i % 2 == 0 ? edge_between(v, path[i + 1]) : edge_between(path[i - 1], v);
    if (!M.edges.contains(e)) throw StructureError("inner walk leaves the matching at " + to_string(e));
    Sign s = M.edges.sign(e);
    auto sp = M.labels.get(v, i % 2 == 0 ? s : -s);
    t.push_back({v, sp, sp});
  }
  return t;
}

/// Extended support size plus the count of matching edges used twice by
/// inner segments.
template <class Field>
int theta(const PartitionedMatrix<Field>& A, const Matching<Field>& M, const Trail<typename Field::Element>& t) {
  auto pw = parse_walk(A, M.edges, t);
  auto d = M.decomposition();
  std::set<EdgeKey> support;
  std::set<int> comps;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) support.insert(edge_between(t[i].vertex, t[i + 1].vertex));
  for (const auto& v : t) {
    int c = d.component_of(v.vertex);
    if (c >= 0) comps.insert(c);
  }
  for (int c : comps) {
    const auto& comp = d.component(c);
    if (comp.isolated() && A.rank(comp.edges.front()) == 2) continue;
    support.insert(comp.edges.begin(), comp.edges.end());
  }
  std::map<EdgeKey, int> inner_uses;
  for (const auto& seg : pw.segments)
    if (seg.kind == SegmentKind::inner)
      for (std::size_t k = seg.first; k < seg.last; ++k) ++inner_uses[edge_between(t[k].vertex, t[k + 1].vertex)];
  int doubles = 0;
  for (const auto& [e, n] : inner_uses)
    if (n >= 2) ++doubles;
  return static_cast<int>(support.size()) + doubles;
}

}  // namespace partrank
