#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "partrank/spacewalk.hpp"

namespace partrank {

/// Per-vertex subspaces certifying that no larger matching exists.
template <class E>
struct Witness {
  std::vector<Subspace<E>> X;  // row side
  std::vector<Subspace<E>> Y;  // column side

  int value() const {
    int v = 2 * static_cast<int>(X.size() + Y.size());
    for (const auto& x : X) v -= x.dim();
    for (const auto& y : Y) v -= y.dim();
    return v;
  }
};

struct LabelRef {
  Vertex vertex;
  int index = 0;

  bool operator==(const LabelRef&) const = default;
};

/// Labels of the search, at most two per vertex, kept in insertion order.
/// Every label except the seeds carries a back pointer.
template <class E>
class LabelState {
 public:
  struct Entry {
    Subspace<E> space;
    std::optional<LabelRef> back;
  };

  LabelState(int mu, int nu) : mu_(mu), at_(static_cast<size_t>(mu + nu)) {}

  const std::vector<Entry>& labels(Vertex v) const { return at_[id(v)]; }
  const Entry& entry(LabelRef r) const { return at_[id(r.vertex)][static_cast<size_t>(r.index)]; }

  std::optional<LabelRef> find(Vertex v, const Subspace<E>& s) const {
    const auto& l = at_[id(v)];
    for (size_t i = 0; i < l.size(); ++i)
      if (l[i].space == s) return LabelRef{v, static_cast<int>(i)};
    return std::nullopt;
  }

  LabelRef add(Vertex v, const Subspace<E>& s, std::optional<LabelRef> back) {
    auto& l = at_[id(v)];
    if (l.size() >= 2) throw std::logic_error("third label at " + to_string(v));
    l.push_back({s, back});
    return {v, static_cast<int>(l.size()) - 1};
  }

  /// Intersection of the labels at a row vertex, everything when unlabeled.
  Subspace<E> x_star(Vertex a) const {
    auto x = Subspace<E>::full();
    for (const auto& e : at_[id(a)]) x = subspace_intersect(x, e.space);
    return x;
  }
  /// Sum of the labels at a column vertex.
  Subspace<E> y_star(Vertex b) const {
    auto y = Subspace<E>::zero();
    for (const auto& e : at_[id(b)]) y = subspace_sum(y, e.space);
    return y;
  }

 private:
  size_t id(Vertex v) const { return static_cast<size_t>(vertex_id(v, mu_)); }

  int mu_;
  std::vector<std::vector<Entry>> at_;
};

/// Builds the walk ending at `start` (a row label with no further use) by
/// following back pointers down to a seed.
template <class Field>
Trail<typename Field::Element> back_track(const PartitionedMatrix<Field>& A,
                                          const LabelState<typename Field::Element>& state, LabelRef start) {
  using E = typename Field::Element;
  const auto& last = state.entry(start);
  if (!last.back) throw std::logic_error("back-track start has no back pointer");
  LabelRef cur = *last.back;
  const auto& y = state.entry(cur).space;
  Trail<E> t{{cur.vertex, y, y}, {start.vertex, last.space, last.space}};
  while (true) {
    const auto& be = state.entry(cur);
    if (!be.back) break;
    LabelRef a = *be.back;
    const auto& ae = state.entry(a);
    if (!ae.back) throw std::logic_error("dangling back pointer at " + to_string(a.vertex));
    LabelRef b = *ae.back;
    const auto& yb = state.entry(b).space;
    auto in = A.perp_from(b.vertex, yb, edge_between(b.vertex, a.vertex));
    t.front().in = t.front().out;
    t.insert(t.begin(), {{b.vertex, yb, yb}, {a.vertex, in, ae.space}});
    cur = b;
  }
  return t;
}

template <class E>
using SearchResult = std::variant<Witness<E>, Trail<E>>;

/// Labeling procedure: returns an optimality witness for M, or an augmenting
/// space-walk. Triples are scanned in edge order, labels in insertion order.
template <class Field>
SearchResult<typename Field::Element> find_witness_or_walk(const PartitionedMatrix<Field>& A, const Matching<Field>& M,
                                                           std::ostream* trace = nullptr) {
  using E = typename Field::Element;
  using Space = Subspace<E>;
  const EdgeSet& I = M.edges;
  LabelState<E> state(A.mu(), A.nu());
  for (int b = 0; b < A.nu(); ++b) {
    Vertex v = Vertex::beta(b);
    auto k = ker_of(A, I, v);
    if (!k.is_zero()) state.add(v, k, std::nullopt);
  }

  auto log = [&](const std::string& s) {
    if (trace) *trace << "search: " << s << "\n";
  };

  while (true) {
    bool found = false;
    for (const auto& edge : A.edges()) {
      EdgeKey e = edge.key;
      if (I.contains(e)) continue;
      Vertex a = Vertex::alpha(e.alpha), b = Vertex::beta(e.beta);
      const auto& lb = state.labels(b);
      for (size_t yi = 0; yi < lb.size(); ++yi) {
        Space z = A.perp_from(b, lb[yi].space, e);
        if (z.contains(state.x_star(a))) continue;
        LabelRef from{b, static_cast<int>(yi)};
        found = true;
        auto inc = I.at(a);
        auto head = [&] {
          return "triple " + to_string(a) + " " + to_string(b) + " Y=" + to_string(lb[yi].space) + " Z=" + to_string(z);
        };
        bool case_a = inc.empty() || (inc.size() == 1 && A.rank(inc.front()) == 1 && !(z == A.left_kernel(inc.front())));
        if (case_a) {
          if (trace) log(head() + " case A");
          // Z does not contain X*, so it is not a label of α yet.
          LabelRef end = state.add(a, z, from);
          return back_track(A, state, end);
        }
        if (inc.size() == 1 && A.rank(inc.front()) == 2) {
          if (trace) log(head() + " case B");
          EdgeKey iso = inc.front();
          Vertex b2 = Vertex::beta(iso.beta);
          LabelRef ra = state.add(a, z, from);
          Space z2 = A.perp_from(a, z, iso);
          if (!state.find(b2, z2)) state.add(b2, z2, ra);
          break;
        }
        if (trace) log(head() + " case C");
        std::vector<Sign> signs;
        for (Sign s : {Sign::plus, Sign::minus})
          if (z == M.labels.get(a, s)) signs.push_back(s);
        if (signs.empty()) signs = {Sign::plus, Sign::minus};
        for (Sign s : signs) {
          Space x = M.labels.get(a, s);
          if (state.find(a, x)) continue;
          LabelRef prev = state.add(a, x, from);
          // Longest inner walk from a starting along its s-edge.
          std::vector<EdgeKey> used;
          auto seen = [&](EdgeKey f) { return std::find(used.begin(), used.end(), f) != used.end(); };
          Vertex cur = a;
          auto step = I.edge_with_sign(cur, s);
          while (step && !seen(*step)) {
            used.push_back(*step);
            Vertex nb = Vertex::beta(step->beta);
            Space vb = M.labels.get(nb, -s);
            if (auto r = state.find(nb, vb))
              prev = *r;
            else
              prev = state.add(nb, vb, prev);
            auto back = I.edge_with_sign(nb, -s);
            if (!back || seen(*back) || A.rank(*back) != 2) break;
            used.push_back(*back);
            cur = Vertex::alpha(back->alpha);
            Space ua = M.labels.get(cur, s);
            if (auto r = state.find(cur, ua))
              prev = *r;
            else
              prev = state.add(cur, ua, prev);
            step = I.edge_with_sign(cur, s);
          }
        }
        break;
      }
      if (found) break;
    }
    if (!found) break;
  }

  Witness<E> w;
  for (int a = 0; a < A.mu(); ++a) w.X.push_back(state.x_star(Vertex::alpha(a)));
  for (int b = 0; b < A.nu(); ++b) w.Y.push_back(state.y_star(Vertex::beta(b)));
  log("witness value " + std::to_string(w.value()));
  return w;
}

}  // namespace partrank
