#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "partrank/dense.hpp"
#include "partrank/instance.hpp"

namespace partrank {

class StructureError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Sign : signed char { plus = 1, minus = -1 };

inline Sign operator-(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }
inline const char* to_string(Sign s) { return s == Sign::plus ? "+" : "-"; }

/// Edge subset together with a +/- coloring.
class EdgeSet {
 public:
  EdgeSet() = default;
  EdgeSet(int mu, int nu) : mu_(mu), nu_(nu), sign_(static_cast<size_t>(mu) * nu, 0) {}

  int mu() const { return mu_; }
  int nu() const { return nu_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool contains(EdgeKey e) const { return sign_[slot(e)] != 0; }
  Sign sign(EdgeKey e) const { return static_cast<Sign>(sign_[slot(e)]); }

  void insert(EdgeKey e, Sign s = Sign::plus) {
    auto& x = sign_[slot(e)];
    if (!x) ++size_;
    x = static_cast<signed char>(s);
  }
  void erase(EdgeKey e) {
    auto& x = sign_[slot(e)];
    if (x) --size_;
    x = 0;
  }
  void set_sign(EdgeKey e, Sign s) { sign_[slot(e)] = static_cast<signed char>(s); }

  std::vector<EdgeKey> keys() const {
    std::vector<EdgeKey> out;
    out.reserve(size_);
    for (int a = 0; a < mu_; ++a)
      for (int b = 0; b < nu_; ++b)
        if (sign_[slot({a, b})]) out.push_back({a, b});
    return out;
  }

  std::vector<EdgeKey> at(Vertex v) const {
    std::vector<EdgeKey> out;
    if (v.is_row()) {
      for (int b = 0; b < nu_; ++b)
        if (sign_[slot({v.index, b})]) out.push_back({v.index, b});
    } else {
      for (int a = 0; a < mu_; ++a)
        if (sign_[slot({a, v.index})]) out.push_back({a, v.index});
    }
    return out;
  }
  int degree(Vertex v) const { return static_cast<int>(at(v).size()); }

  std::optional<EdgeKey> edge_with_sign(Vertex v, Sign s) const {
    for (EdgeKey e : at(v))
      if (sign(e) == s) return e;
    return std::nullopt;
  }

  bool operator==(const EdgeSet&) const = default;

 private:
  size_t slot(EdgeKey e) const { return static_cast<size_t>(e.alpha) * nu_ + e.beta; }

  int mu_ = 0, nu_ = 0;
  std::vector<signed char> sign_;
  std::size_t size_ = 0;
};

inline int vertex_id(Vertex v, int mu) { return v.is_row() ? v.index : mu + v.index; }

/// Path or cycle component. For a path the vertices run from its smaller
/// endpoint; for a cycle the first vertex is not repeated at the end.
struct Component {
  std::vector<EdgeKey> edges;
  std::vector<Vertex> vertices;
  bool cycle = false;

  bool isolated() const { return edges.size() == 1; }
};

class Decomposition {
 public:
  Decomposition() = default;

  static Decomposition of(const EdgeSet& I) {
    Decomposition d;
    const int mu = I.mu(), nu = I.nu();
    d.mu_ = mu;
    d.nu_ = nu;
    d.edge_comp_.assign(static_cast<size_t>(mu) * nu, -1);
    d.vertex_comp_.assign(static_cast<size_t>(mu + nu), -1);
    std::vector<Vertex> order;
    for (int a = 0; a < mu; ++a) order.push_back(Vertex::alpha(a));
    for (int b = 0; b < nu; ++b) order.push_back(Vertex::beta(b));
    for (Vertex v : order)
      if (I.degree(v) > 2) throw StructureError("degree exceeds two at vertex " + to_string(v));

    auto trace = [&](Vertex start, EdgeKey first, bool cycle) {
      Component c;
      c.cycle = cycle;
      int id = static_cast<int>(d.comps_.size());
      Vertex v = start;
      EdgeKey e = first;
      while (true) {
        c.vertices.push_back(v);
        d.vertex_comp_[vertex_id(v, mu)] = id;
        c.edges.push_back(e);
        d.edge_comp_[static_cast<size_t>(e.alpha) * nu + e.beta] = id;
        v = other_end(e, v);
        std::optional<EdgeKey> next;
        for (EdgeKey f : I.at(v))
          if (d.edge_comp_[static_cast<size_t>(f.alpha) * nu + f.beta] < 0) next = f;
        if (!next) break;
        e = *next;
      }
      if (!cycle) {
        c.vertices.push_back(v);
        d.vertex_comp_[vertex_id(v, mu)] = id;
      }
      d.comps_.push_back(std::move(c));
    };

    for (Vertex v : order)
      if (I.degree(v) == 1 && d.vertex_comp_[vertex_id(v, mu)] < 0) trace(v, I.at(v).front(), false);
    for (Vertex v : order)
      if (I.degree(v) == 2 && d.vertex_comp_[vertex_id(v, mu)] < 0) trace(v, I.at(v).front(), true);
    return d;
  }

  const std::vector<Component>& components() const { return comps_; }
  const Component& component(int i) const { return comps_[static_cast<size_t>(i)]; }
  int component_of(EdgeKey e) const { return edge_comp_[static_cast<size_t>(e.alpha) * nu_ + e.beta]; }
  int component_of(Vertex v) const { return vertex_comp_[vertex_id(v, mu_)]; }

 private:
  int mu_ = 0, nu_ = 0;
  std::vector<Component> comps_;
  std::vector<int> edge_comp_;
  std::vector<int> vertex_comp_;
};

/// Proper coloring of I: each component alternates along its walk order,
/// starting with + unless `prior` colors one of its edges, in which case the
/// first such edge keeps its prior sign.
inline EdgeSet color_edges(const EdgeSet& I, const Decomposition& d, const EdgeSet* prior = nullptr) {
  EdgeSet out(I.mu(), I.nu());
  for (const auto& c : d.components()) {
    Sign start = Sign::plus;
    if (prior) {
      for (size_t i = 0; i < c.edges.size(); ++i) {
        if (prior->contains(c.edges[i])) {
          Sign s = prior->sign(c.edges[i]);
          start = (i % 2 == 0) ? s : -s;
          break;
        }
      }
    }
    Sign s = start;
    for (EdgeKey e : c.edges) {
      out.insert(e, s);
      s = -s;
    }
  }
  return out;
}

/// Pair of distinct lines attached to a vertex of the matching.
template <class E>
struct LabelPair {
  Subspace<E> plus, minus;

  const Subspace<E>& operator[](Sign s) const { return s == Sign::plus ? plus : minus; }
  Subspace<E>& operator[](Sign s) { return s == Sign::plus ? plus : minus; }
  bool operator==(const LabelPair&) const = default;
};

template <class E>
class Labeling {
 public:
  Labeling() = default;
  Labeling(int mu, int nu) : mu_(mu), at_(static_cast<size_t>(mu + nu)) {}

  bool has(Vertex v) const { return at_[id(v)].has_value(); }
  const Subspace<E>& get(Vertex v, Sign s) const { return (*at_[id(v)])[s]; }
  const LabelPair<E>& pair(Vertex v) const { return *at_[id(v)]; }
  void set(Vertex v, const LabelPair<E>& p) { at_[id(v)] = p; }
  void clear(Vertex v) { at_[id(v)].reset(); }
  void swap_signs(Vertex v) {
    if (auto& p = at_[id(v)]) std::swap(p->plus, p->minus);
  }

  bool operator==(const Labeling&) const = default;

 private:
  size_t id(Vertex v) const { return static_cast<size_t>(vertex_id(v, mu_)); }

  int mu_ = 0;
  std::vector<std::optional<LabelPair<E>>> at_;
};

template <class E>
struct LabelHint {
  Vertex vertex;
  Sign sign;
  Subspace<E> space;
};

/// Input to the labeling builder. `prefer` seeds chains that are not pinned
/// by a rank-1 edge, first match wins; `soft` seeds are taken only when they
/// respect `avoid` and the partner labels; `avoid` excludes values for
/// freely chosen chains.
template <class E>
struct LabelConstraints {
  std::vector<LabelHint<E>> prefer;
  std::vector<LabelHint<E>> soft;
  std::vector<LabelHint<E>> avoid;
};

template <class E>
struct LabelingResult {
  std::optional<Labeling<E>> labels;
  std::optional<Vertex> degenerate;
  std::string error;

  bool ok() const { return labels.has_value(); }
};

/// Candidate line number k: (1,0), (0,1), (1,1), (1,2), ...; nullopt past
/// the end of the field or the limit.
template <class Field>
std::optional<Subspace<typename Field::Element>> free_line(const Field& f, std::size_t k,
                                                           std::size_t limit = 64) {
  using E = typename Field::Element;
  if (k >= limit) return std::nullopt;
  if (k == 0) return Subspace<E>::span({f.one(), f.zero()});
  if (k == 1) return Subspace<E>::span({f.zero(), f.one()});
  E y = f.from_int(static_cast<long long>(k - 1));
  if (is_zero(y)) return std::nullopt;
  return Subspace<E>::span({f.one(), y});
}

/// The first candidate lines, in order.
template <class Field>
std::vector<Subspace<typename Field::Element>> free_lines(const Field& f, std::size_t limit = 64) {
  std::vector<Subspace<typename Field::Element>> out;
  for (std::size_t k = 0;; ++k) {
    auto l = free_line(f, k, limit);
    if (!l) return out;
    out.push_back(std::move(*l));
  }
}

namespace detail {

// Node (vertex, sign) of the label graph: labels linked through rank-2
// edges of I are determined by each other, rank-1 edges pin kernels.
template <class Field>
class LabelGraph {
 public:
  using E = typename Field::Element;
  using Space = Subspace<E>;

  LabelGraph(const PartitionedMatrix<Field>& A, const EdgeSet& I)
      : A_(A), mu_(A.mu()), n_(2 * (A.mu() + A.nu())), links_(n_), pin_(n_), active_(n_, false), lone_(n_, false) {
    for (EdgeKey e : I.keys()) {
      Vertex a = Vertex::alpha(e.alpha), b = Vertex::beta(e.beta);
      bool lone = A.rank(e) == 2 && I.degree(a) == 1 && I.degree(b) == 1;
      for (Sign s : {Sign::plus, Sign::minus}) {
        active_[node(a, s)] = true;
        active_[node(b, s)] = true;
        lone_[node(a, s)] = lone_[node(b, s)] = lone;
      }
      if (A.rank(e) == 2) {
        link(node(a, Sign::plus), node(b, Sign::minus), e);
        link(node(a, Sign::minus), node(b, Sign::plus), e);
      } else {
        Sign s = I.sign(e);
        add_pin(node(a, s), A.left_kernel(e));
        add_pin(node(b, s), A.right_kernel(e));
      }
    }
  }

  int node(Vertex v, Sign s) const { return 2 * vertex_id(v, mu_) + (s == Sign::plus ? 0 : 1); }
  Vertex vertex_of(int n) const {
    int id = n / 2;
    return id < mu_ ? Vertex::alpha(id) : Vertex::beta(id - mu_);
  }
  static Sign sign_of(int n) { return n % 2 == 0 ? Sign::plus : Sign::minus; }
  static int partner(int n) { return n ^ 1; }

  LabelingResult<E> build(const LabelConstraints<E>& cons) {
    LabelingResult<E> res;
    if (!pin_conflict_.empty()) {
      res.error = pin_conflict_;
      return res;
    }
    value_.assign(n_, std::nullopt);
    std::vector<std::vector<int>> chains = collect_chains();

    std::vector<char> done(chains.size(), 0);
    // Pinned chains.
    for (size_t c = 0; c < chains.size(); ++c) {
      for (int v : chains[c]) {
        if (pin_[v]) {
          if (!assign(chains[c], v, *pin_[v], value_)) {
            res.error = "inconsistent pins on the label chain through " + to_string(vertex_of(v));
            return res;
          }
          done[c] = 1;
          break;
        }
      }
    }
    // Hinted chains.
    std::vector<int> chain_of(n_, -1);
    for (size_t c = 0; c < chains.size(); ++c)
      for (int v : chains[c]) chain_of[v] = static_cast<int>(c);
    for (const auto& h : cons.prefer) {
      if (!h.space.is_line()) continue;
      int v = node(h.vertex, h.sign);
      int c = chain_of[v];
      if (c < 0 || done[c]) continue;
      if (!assign(chains[c], v, h.space, value_)) {
        res.error = "inconsistent label cycle through " + to_string(h.vertex);
        return res;
      }
      done[c] = 1;
    }
    // Labels on isolated rank-2 edges are never read; carrying them over
    // would only grow their representatives.
    for (const auto& h : cons.soft) {
      if (!h.space.is_line()) continue;
      int v = node(h.vertex, h.sign);
      if (lone_[v]) continue;
      int c = chain_of[v];
      if (c < 0 || done[c]) continue;
      auto trial = value_;
      if (assign(chains[c], v, h.space, trial) && acceptable(chains[c], trial, cons)) {
        value_ = std::move(trial);
        done[c] = 1;
      }
    }
    // Free chains.
    std::vector<Space> lines;
    auto line = [&](std::size_t k) -> const Space* {
      while (lines.size() <= k) {
        auto l = free_line(A_.field(), k);
        if (!l) return nullptr;
        lines.push_back(std::move(*l));
      }
      return &lines[k];
    };
    for (size_t c = 0; c < chains.size(); ++c) {
      if (done[c]) continue;
      int root = chains[c].front();
      std::optional<std::vector<std::optional<Space>>> fallback;
      bool placed = false;
      for (std::size_t k = 0; const Space* cand = line(k); ++k) {
        auto trial = value_;
        if (!assign(chains[c], root, *cand, trial)) continue;
        if (!fallback) fallback = trial;
        if (acceptable(chains[c], trial, cons)) {
          value_ = std::move(trial);
          placed = true;
          break;
        }
      }
      if (!placed) {
        if (!fallback) {
          res.error = "no consistent label on the cycle through " + to_string(vertex_of(root));
          return res;
        }
        value_ = std::move(*fallback);
      }
    }

    Labeling<E> L(A_.mu(), A_.nu());
    for (int v = 0; v < n_; v += 2) {
      if (!active_[v]) continue;
      if (value_[v] == value_[v + 1] && !res.degenerate) res.degenerate = vertex_of(v);
      L.set(vertex_of(v), LabelPair<E>{*value_[v], *value_[v + 1]});
    }
    if (res.degenerate) {
      res.error = "degenerate vertex " + to_string(*res.degenerate);
      return res;
    }
    res.labels = std::move(L);
    return res;
  }

 private:
  struct Link {
    int to;
    EdgeKey edge;
  };

  void link(int u, int v, EdgeKey e) {
    links_[u].push_back({v, e});
    links_[v].push_back({u, e});
  }
  void add_pin(int v, const Space& s) {
    if (pin_[v] && !(*pin_[v] == s) && pin_conflict_.empty())
      pin_conflict_ = "conflicting kernel labels at " + to_string(vertex_of(v));
    pin_[v] = s;
  }

  std::vector<std::vector<int>> collect_chains() const {
    std::vector<std::vector<int>> chains;
    std::vector<char> seen(n_, 0);
    for (int s = 0; s < n_; ++s) {
      if (!active_[s] || seen[s]) continue;
      std::vector<int> chain{s};
      seen[s] = 1;
      for (size_t i = 0; i < chain.size(); ++i)
        for (const auto& l : links_[chain[i]])
          if (!seen[l.to]) {
            seen[l.to] = 1;
            chain.push_back(l.to);
          }
      chains.push_back(std::move(chain));
    }
    return chains;
  }

  bool assign(const std::vector<int>& chain, int root, const Space& value,
              std::vector<std::optional<Space>>& val) const {
    for (int v : chain) val[v].reset();
    val[root] = value;
    std::vector<int> queue{root};
    for (size_t i = 0; i < queue.size(); ++i) {
      int u = queue[i];
      for (const auto& l : links_[u]) {
        Space next = A_.perp_from(vertex_of(u), *val[u], l.edge);
        if (val[l.to]) {
          if (!(*val[l.to] == next)) return false;
        } else {
          val[l.to] = next;
          queue.push_back(l.to);
        }
      }
    }
    for (int v : chain)
      if (pin_[v] && !(*pin_[v] == *val[v])) return false;
    return true;
  }

  bool acceptable(const std::vector<int>& chain, const std::vector<std::optional<Space>>& val,
                  const LabelConstraints<E>& cons) const {
    for (int v : chain) {
      const auto& other = val[partner(v)];
      if (other && *other == *val[v]) return false;
    }
    for (const auto& h : cons.avoid) {
      int v = node(h.vertex, h.sign);
      if (std::find(chain.begin(), chain.end(), v) != chain.end() && *val[v] == h.space) return false;
    }
    return true;
  }

  const PartitionedMatrix<Field>& A_;
  int mu_;
  int n_;
  std::vector<std::vector<Link>> links_;
  std::vector<std::optional<Space>> pin_;
  std::vector<char> active_;
  std::vector<char> lone_;
  std::string pin_conflict_;
  std::vector<std::optional<Space>> value_;
};

}  // namespace detail

/// Labeling satisfying the orthogonality and kernel rules for the colored
/// edge set I. Reports the first degenerate vertex (equal +/- labels) when
/// the forced labels coincide.
template <class Field>
LabelingResult<typename Field::Element> compute_valid_labeling(
    const PartitionedMatrix<Field>& A, const EdgeSet& I,
    const LabelConstraints<typename Field::Element>& cons = {}) {
  detail::LabelGraph<Field> g(A, I);
  return g.build(cons);
}

/// Matching or quasi-matching: colored edge set plus a valid labeling.
template <class Field>
struct Matching {
  using E = typename Field::Element;

  EdgeSet edges;
  Labeling<E> labels;

  Decomposition decomposition() const { return Decomposition::of(edges); }
};

enum class Condition { ok, deg, path, cycle, qcycle, vl };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::ok: return "ok";
    case Condition::deg: return "Deg";
    case Condition::path: return "Path";
    case Condition::cycle: return "Cycle";
    case Condition::qcycle: return "q-Cycle";
    case Condition::vl: return "VL";
  }
  return "?";
}

struct Verdict {
  Condition condition = Condition::ok;
  std::string detail;

  bool ok() const { return condition == Condition::ok; }
};

namespace detail {

template <class Field>
Verdict check_structure(const PartitionedMatrix<Field>& A, const EdgeSet& I, bool quasi) {
  for (int a = 0; a < A.mu(); ++a)
    if (I.degree(Vertex::alpha(a)) > 2) return {Condition::deg, to_string(Vertex::alpha(a))};
  for (int b = 0; b < A.nu(); ++b)
    if (I.degree(Vertex::beta(b)) > 2) return {Condition::deg, to_string(Vertex::beta(b))};
  auto d = Decomposition::of(I);
  for (const auto& c : d.components()) {
    if (c.cycle || c.isolated()) continue;
    if (A.rank(c.edges.front()) != 1) return {Condition::path, "end edge " + to_string(c.edges.front())};
    if (A.rank(c.edges.back()) != 1) return {Condition::path, "end edge " + to_string(c.edges.back())};
  }
  auto colored = color_edges(I, d);
  for (const auto& c : d.components()) {
    if (!c.cycle) continue;
    bool plus = false, minus = false;
    for (EdgeKey e : c.edges)
      if (A.rank(e) == 1) (colored.sign(e) == Sign::plus ? plus : minus) = true;
    if (quasi && !plus && !minus) return {Condition::qcycle, "cycle through " + to_string(c.vertices.front())};
    if (!quasi && !(plus && minus)) return {Condition::cycle, "cycle through " + to_string(c.vertices.front())};
  }
  auto lab = compute_valid_labeling(A, colored);
  if (!lab.ok()) return {Condition::vl, lab.error};
  return {};
}

}  // namespace detail

/// First violated condition among Deg, Path, Cycle, VL.
template <class Field>
Verdict check_matching(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  return detail::check_structure(A, I, false);
}

template <class Field>
Verdict check_quasi_matching(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  return detail::check_structure(A, I, true);
}

template <class Field>
int r_value(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  int r = static_cast<int>(I.size());
  for (EdgeKey e : I.keys())
    if (A.rank(e) == 2 && I.degree(Vertex::alpha(e.alpha)) == 1 && I.degree(Vertex::beta(e.beta)) == 1) ++r;
  return r;
}

/// Kernel contributed by vertex v to the canonical substitution of I.
template <class Field>
Subspace<typename Field::Element> ker_of(const PartitionedMatrix<Field>& A, const EdgeSet& I, Vertex v) {
  using Space = Subspace<typename Field::Element>;
  auto inc = I.at(v);
  if (inc.empty()) return Space::full();
  if (inc.size() == 1 && A.rank(inc.front()) == 1) return A.kernel_at(v, inc.front());
  return Space::zero();
}

/// Dense 2mu x 2nu matrix with the blocks of I in place and zeros elsewhere.
template <class Field>
DenseMatrix<typename Field::Element> canonical_substitution(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  DenseMatrix<typename Field::Element> M(2 * static_cast<size_t>(A.mu()), 2 * static_cast<size_t>(A.nu()),
                                         A.field().zero());
  for (EdgeKey e : I.keys()) {
    const auto& b = A.block(e);
    size_t r = 2 * static_cast<size_t>(e.alpha), c = 2 * static_cast<size_t>(e.beta);
    M(r, c) = b.a;
    M(r, c + 1) = b.b;
    M(r + 1, c) = b.c;
    M(r + 1, c + 1) = b.d;
  }
  return M;
}

/// Hints reproducing the current labels of `old` on the colored set I. Each
/// vertex keeps its label pair, swapped when an edge shared by both sets
/// changed sign.
template <class Field>
std::vector<LabelHint<typename Field::Element>> carried_labels(const Matching<Field>& old, const EdgeSet& I) {
  std::vector<LabelHint<typename Field::Element>> out;
  auto visit = [&](Vertex v) {
    if (!old.labels.has(v)) return;
    for (EdgeKey e : I.at(v)) {
      if (!old.edges.contains(e)) continue;
      bool flipped = old.edges.sign(e) != I.sign(e);
      for (Sign s : {Sign::plus, Sign::minus}) out.push_back({v, flipped ? -s : s, old.labels.get(v, s)});
      return;
    }
  };
  for (int a = 0; a < I.mu(); ++a) visit(Vertex::alpha(a));
  for (int b = 0; b < I.nu(); ++b) visit(Vertex::beta(b));
  return out;
}

/// Builds a matching from a bare edge set with the default coloring.
/// Throws StructureError when no valid labeling exists.
template <class Field>
Matching<Field> make_matching(const PartitionedMatrix<Field>& A, const EdgeSet& I) {
  auto colored = color_edges(I, Decomposition::of(I));
  auto lab = compute_valid_labeling(A, colored);
  if (!lab.ok()) throw StructureError("no valid labeling: " + lab.error);
  return {colored, *lab.labels};
}

/// Swaps the signs on component `comp` and the paired labels on its vertices.
template <class Field>
void recolor_component(Matching<Field>& M, const Component& comp) {
  for (EdgeKey e : comp.edges) M.edges.set_sign(e, -M.edges.sign(e));
  for (Vertex v : comp.vertices) M.labels.swap_signs(v);
}

namespace detail {

// Removes even-position edges from the front of a path while the
// odd-position edges are rank 2. Returns the removed edges.
template <class Field>
std::vector<EdgeKey> trim_path_front(const PartitionedMatrix<Field>& A, const std::vector<EdgeKey>& path) {
  std::vector<EdgeKey> removed;
  if (path.size() < 2 || A.rank(path.front()) != 2) return removed;
  size_t i = 0;
  while (i < path.size() && A.rank(path[i]) == 2) {
    if (i + 1 < path.size()) removed.push_back(path[i + 1]);
    i += 2;
  }
  return removed;
}

}  // namespace detail

/// Edges removed by the elimination from one path end, or from a cycle
/// when `end` is empty.
struct EliminationStep {
  std::optional<Vertex> end;
  std::vector<EdgeKey> removed;
};

/// Elimination on a colored edge set without touching labels. Paths are
/// trimmed starting from the end listed first in `first_ends`, otherwise
/// from the smaller endpoint.
template <class Field>
std::vector<EliminationStep> elimination_plan(const PartitionedMatrix<Field>& A, const EdgeSet& I,
                                              const std::vector<Vertex>& first_ends = {}) {
  std::vector<EliminationStep> plan;
  auto d = Decomposition::of(I);
  for (const auto& c : d.components()) {
    if (c.cycle) {
      bool plus_rank2 = true, minus_rank2 = true;
      for (EdgeKey e : c.edges) {
        if (A.rank(e) == 2) continue;
        (I.sign(e) == Sign::plus ? plus_rank2 : minus_rank2) = false;
      }
      if (plus_rank2 || minus_rank2) {
        Sign drop = plus_rank2 ? Sign::minus : Sign::plus;
        EliminationStep step;
        for (EdgeKey e : c.edges)
          if (I.sign(e) == drop) step.removed.push_back(e);
        plan.push_back(std::move(step));
      }
      continue;
    }
    if (c.isolated()) continue;
    std::vector<EdgeKey> path = c.edges;
    Vertex head = c.vertices.front(), tail = c.vertices.back();
    for (Vertex v : first_ends) {
      if (v == tail) {
        std::reverse(path.begin(), path.end());
        std::swap(head, tail);
        break;
      }
      if (v == head) break;
    }
    auto front = detail::trim_path_front(A, path);
    size_t kept = 2 * front.size();
    if (!front.empty()) plan.push_back({head, std::move(front)});
    if (kept < path.size()) {
      std::vector<EdgeKey> rest(path.begin() + static_cast<std::ptrdiff_t>(kept), path.end());
      std::reverse(rest.begin(), rest.end());
      auto back = detail::trim_path_front(A, rest);
      if (!back.empty()) plan.push_back({tail, std::move(back)});
    }
  }
  return plan;
}

/// Repairs a quasi-matching into a matching without decreasing r and
/// rebuilds the labels, keeping old ones where they remain valid. Returns
/// the removed edges in removal order.
template <class Field>
std::vector<EdgeKey> eliminate(const PartitionedMatrix<Field>& A, Matching<Field>& M,
                               const std::vector<Vertex>& first_ends = {}) {
  std::vector<EdgeKey> removed;
  for (const auto& step : elimination_plan(A, M.edges, first_ends))
    removed.insert(removed.end(), step.removed.begin(), step.removed.end());
  if (removed.empty()) return removed;
  Matching<Field> old = M;
  for (EdgeKey e : removed) M.edges.erase(e);
  LabelConstraints<typename Field::Element> cons;
  cons.soft = carried_labels(old, M.edges);
  auto lab = compute_valid_labeling(A, M.edges, cons);
  if (!lab.ok()) throw StructureError("labeling lost during elimination: " + lab.error);
  M.labels = *lab.labels;
  return removed;
}

}  // namespace partrank
