#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "partrank/search.hpp"

namespace partrank {

/// Raised when a transformation breaks one of the invariants the
/// augmentation relies on.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct AugmentOptions {
  bool check = true;
  std::ostream* trace = nullptr;
};

struct AugmentStats {
  int iterations = 0;
  std::vector<int> theta;  // value at each return to the initial stage
  std::map<std::string, int> cases;
  bool no_first_case = false;
  int restarts = 0;  // fresh searches, each starting a new θ sequence
  std::vector<std::string> violations;
};

namespace detail {

template <class E>
Trail<E> prefix(const Trail<E>& t, std::size_t idx) {
  Trail<E> p(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(idx) + 1);
  p.back().out = p.back().in;
  return p;
}

template <class T>
std::vector<T> reversed(std::vector<T> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

inline std::vector<EdgeKey> edges_of(const std::vector<Vertex>& path) {
  std::vector<EdgeKey> out;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) out.push_back(edge_between(path[i], path[i + 1]));
  return out;
}

template <class T>
bool has(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <class T>
std::size_t index_of(const std::vector<T>& v, const T& x) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

// A walk starting at a row vertex that alternates isolated rank-2 edges of I
// and edges outside I, with the outer-walk subspace conditions.
template <class Field>
bool truncated_outer_ok(const PartitionedMatrix<Field>& A, const EdgeSet& I, const Trail<typename Field::Element>& t) {
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    EdgeKey e = edge_between(t[i].vertex, t[i + 1].vertex);
    if (!A.has_edge(e)) return false;
    auto role = edge_role(A, I, e);
    if (t[i].vertex.is_row()) {
      if (role != EdgeRole::isolated) return false;
    } else {
      if (role != EdgeRole::off) return false;
      if (t[i].in.is_zero() || A.right_kernel(e).contains(t[i].in)) return false;
    }
  }
  return true;
}

// Inner walk of I from a row vertex along its s-edge; stops at a path end, a
// rank-1 edge entered from the column side, or a repeated edge.
template <class Field>
std::vector<Vertex> inner_walk_from(const PartitionedMatrix<Field>& A, const EdgeSet& I, Vertex a, Sign s,
                                    std::optional<Vertex> target = std::nullopt) {
  std::vector<Vertex> path{a};
  std::vector<EdgeKey> used;
  auto step = I.edge_with_sign(a, s);
  while (step && !has(used, *step)) {
    used.push_back(*step);
    Vertex b = Vertex::beta(step->beta);
    path.push_back(b);
    if (target && b == *target) return path;
    auto back = I.edge_with_sign(b, -s);
    if (!back || has(used, *back) || A.rank(*back) != 2) break;
    used.push_back(*back);
    Vertex next = Vertex::alpha(back->alpha);
    path.push_back(next);
    step = I.edge_with_sign(next, s);
  }
  if (target) return {};
  if (!path.back().is_row()) return path;
  path.pop_back();
  return path;
}

// Maximal inner walk of I ending at b whose last edge has sign s, as a
// vertex list from its row start to b.
template <class Field>
std::vector<Vertex> inner_walk_into(const PartitionedMatrix<Field>& A, const EdgeSet& I, Vertex b, Sign s) {
  auto last = I.edge_with_sign(b, s);
  if (!last) return {};
  std::vector<Vertex> rev{b, Vertex::alpha(last->alpha)};
  std::vector<EdgeKey> used{*last};
  while (true) {
    Vertex a = rev.back();
    auto f = I.edge_with_sign(a, -s);
    if (!f || has(used, *f) || A.rank(*f) != 2) break;
    Vertex nb = Vertex::beta(f->beta);
    auto g = I.edge_with_sign(nb, s);
    if (!g || has(used, *g)) break;
    used.push_back(*f);
    used.push_back(*g);
    rev.push_back(nb);
    rev.push_back(Vertex::alpha(g->alpha));
  }
  return reversed(rev);
}

}  // namespace detail

/// Augmentation of a matching along an augmenting space-walk. Each round
/// rewrites (I, T) into a quasi-matching and a new walk until r grows.
template <class Field>
class Augmenter {
 public:
  using E = typename Field::Element;
  using Space = Subspace<E>;
  using M_t = Matching<Field>;

  using Observer = std::function<void(const M_t&, const Trail<E>&)>;

  Augmenter(const PartitionedMatrix<Field>& A, AugmentOptions opt = {}, Observer observe = {})
      : A_(A), opt_(opt), observe_(std::move(observe)) {}

  const AugmentStats& stats() const { return stats_; }

  M_t run(M_t M, Trail<E> T) {
    r0_ = r_value(A_, M.edges);
    M_ = std::move(M);
    T_ = std::move(T);
    std::optional<int> last_theta;
    while (true) {
      ++stats_.iterations;
      require_valid("loop start");
      if (observe_) observe_(M_, T_);
      if (opt_.trace) log("I = " + describe(M_.edges) + " T = " + describe(T_));
      int th = theta(A_, M_, T_);
      stats_.theta.push_back(th);
      if (restarted_) {
        restarted_ = false;
        last_theta.reset();
        if (++stats_.restarts > A_.mu() * A_.nu()) fail("too many fresh searches");
      }
      if (last_theta && th >= *last_theta) fail("theta did not decrease: " + std::to_string(*last_theta) + " -> " + std::to_string(th));
      last_theta = th;
      enforce_no();
      auto pw = parse();
      std::size_t m = pw.m();
      const auto& pm = pw.outer(m);
      bool simple = true;
      {
        std::set<EdgeKey> seen;
        for (std::size_t i = pm.first; i < pm.last; ++i)
          if (!seen.insert(edge_between(T_[i].vertex, T_[i + 1].vertex)).second) simple = false;
      }
      std::optional<M_t> done;
      std::string which;
      if (!simple) {
        which = "nonsimple";
        nonsimple_case();
      } else if (m == 0) {
        which = "base";
        done = base_case();
      } else {
        which = "simple";
        done = simple_case();
      }
      if (opt_.trace)
        log("iteration " + std::to_string(stats_.iterations) + " " + which + " theta " + std::to_string(th) +
            (done ? " -> done r " + std::to_string(r_value(A_, done->edges))
                  : " -> " + std::to_string(theta(A_, M_, T_)) + " r " + std::to_string(r_value(A_, M_.edges))));
      if (done) {
        if (opt_.check) {
          auto v = check_matching(A_, done->edges);
          if (!v.ok()) fail(std::string("result violates ") + to_string(v.condition) + ": " + v.detail);
        }
        if (r_value(A_, done->edges) <= r0_) fail("augmentation did not increase r");
        return *done;
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    log("invariant failure: " + what);
    throw InvariantError(what);
  }
  void log(const std::string& s) const {
    if (opt_.trace) *opt_.trace << "augment: " << s << "\n";
  }
  void count(const std::string& c) {
    ++stats_.cases[c];
    log("case " + c);
  }

  std::string describe(const EdgeSet& I) const {
    std::string out;
    for (EdgeKey e : I.keys())
      out += (out.empty() ? "" : " ") + to_string(e) + to_string(I.sign(e)) + (A_.rank(e) == 1 ? "'" : "");
    return "{" + out + "}";
  }
  std::string describe(const Trail<E>& t) const {
    std::string out;
    for (const auto& v : t) {
      out += (out.empty() ? "" : " ") + to_string(v.vertex) + ":" + to_string(v.in);
      if (!(v.in == v.out)) out += "/" + to_string(v.out);
    }
    return out;
  }

  ParsedWalk parse() const {
    auto pw = parse_walk(A_, M_.edges, T_);
    if (!pw.ok()) throw InvariantError("walk does not parse: " + pw.error);
    return pw;
  }

  void require_valid(const std::string& where) {
    if (!opt_.check) return;
    auto rep = validate_augmenting(A_, M_, T_);
    if (!rep.ok()) fail(where + ": walk is not augmenting: " + rep.violation);
  }

  Space U(Vertex v, Sign s) const { return M_.labels.get(v, s); }

  std::vector<Vertex> verts(std::size_t first, std::size_t last) const { return vertices_of(T_, first, last); }

  // Back-propagation of the kernel at the end of P_m along P_m.
  Trail<E> pm_vee(const Segment& pm) const {
    auto v = verts(pm.first, pm.last);
    return back_propagate(A_, std::span<const Vertex>(v), ker_of(A_, M_.edges, v.back()));
  }

  // ---------------------------------------------------------------------
  // Commit: color I' compatibly with I, derive labels from the inner
  // segments of T' and the old labels, and check the result.

  M_t relabel(const EdgeSet& colored, const Trail<E>& t, const std::string& where) const {
    LabelConstraints<E> cons;
    auto pw = parse_walk(A_, colored, t);
    if (!pw.ok()) throw InvariantError(where + ": new walk does not parse: " + pw.error);
    for (std::size_t i = 1; i < pw.segments.size(); i += 2) {
      const auto& seg = pw.segments[i];
      for (std::size_t k = seg.first; k < seg.last; k += 2) {
        Vertex a = t[k].vertex, b = t[k + 1].vertex;
        Sign s = colored.sign(edge_between(a, b));
        cons.prefer.push_back({a, s, space_at(t, seg, k)});
        cons.prefer.push_back({b, -s, t[k + 1].in});
      }
      Vertex a = t[seg.first].vertex;
      Sign s = colored.sign(edge_between(a, t[seg.first + 1].vertex));
      cons.avoid.push_back({a, -s, t[seg.first].in});
    }
    cons.soft = carried_labels(M_, colored);
    auto lab = compute_valid_labeling(A_, colored, cons);
    if (!lab.ok()) throw InvariantError(where + ": no valid labeling for the new edge set: " + lab.error);
    return M_t{colored, *lab.labels};
  }

  void commit(const EdgeSet& colored, Trail<E> t, const std::string& where) {
    if (opt_.trace) log(where + ": I' = " + describe(colored) + " T' = " + describe(t));
    M_t next = relabel(colored, t, where);
    if (opt_.check) {
      auto v = check_quasi_matching(A_, next.edges);
      if (!v.ok()) fail(where + ": not a quasi-matching (" + to_string(v.condition) + ": " + v.detail + ")");
      if (r_value(A_, next.edges) < r_value(A_, M_.edges)) fail(where + ": r decreased");
      auto rep = validate_augmenting(A_, next, t);
      if (!rep.ok()) fail(where + ": new walk is not augmenting: " + rep.violation);
    }
    M_ = std::move(next);
    T_ = std::move(t);
  }

  EdgeSet colored_from(const EdgeSet& bare) const {
    return color_edges(bare, Decomposition::of(bare), &M_.edges);
  }

  // Path elimination on a colored set in place. Cycles are left alone since
  // a quasi-matching may keep them.
  std::vector<EliminationStep> eliminate_edges(EdgeSet& I, const std::vector<Vertex>& ends) const {
    auto plan = elimination_plan(A_, I, ends);
    std::erase_if(plan, [](const EliminationStep& st) { return !st.end; });
    for (const auto& st : plan)
      for (EdgeKey e : st.removed) I.erase(e);
    return plan;
  }

  // When the edge set already has a larger r, finish with it as a matching.
  std::optional<M_t> try_finish(const EdgeSet& colored) {
    if (r_value(A_, colored) <= r_value(A_, M_.edges)) return std::nullopt;
    LabelConstraints<E> cons;
    cons.soft = carried_labels(M_, colored);
    auto lab = compute_valid_labeling(A_, colored, cons);
    if (!lab.ok()) return std::nullopt;
    M_t out{colored, *lab.labels};
    eliminate(A_, out);
    if (!check_matching(A_, out.edges).ok()) return std::nullopt;
    count("larger-r");
    return out;
  }

  // ---------------------------------------------------------------------

  void enforce_no() {
    while (true) {
      auto pw = parse();
      const auto& pm = pw.outer(pw.m());
      auto vee = pm_vee(pm);
      std::map<Vertex, std::size_t> first, last;
      for (std::size_t i = 0; i < T_.size(); ++i) {
        first.try_emplace(T_[i].vertex, i);
        last[T_[i].vertex] = i;
      }
      auto in_outer = [&](std::size_t f) {
        for (std::size_t i = 0; i <= pw.m(); ++i)
          if (pw.outer(i).first <= f && f <= pw.outer(i).last) return true;
        return false;
      };
      std::optional<std::size_t> best_f, best_s;
      for (std::size_t j = pm.first; j <= pm.last; ++j) {
        Vertex v = T_[j].vertex;
        std::size_t f = first[v], s = last[v];
        if (f == s || s != j || !in_outer(f)) continue;
        if (T_[f].in == vee[s - pm.first].in) continue;
        if (!best_f || f < *best_f) {
          best_f = f;
          best_s = s;
        }
      }
      if (!best_f) return;
      Vertex g = T_[*best_f].vertex;
      if (g == T_[pm.last].vertex) {
        stats_.no_first_case = true;
        count("No-1");
      } else {
        count(g.is_row() ? "No-2" : "No-3");
      }
      int before = theta(A_, M_, T_);
      auto path = verts(*best_s, T_.size() - 1);
      auto t = extend(A_, detail::prefix(T_, *best_f), std::span<const Vertex>(path));
      if (opt_.check) {
        auto rep = validate_augmenting(A_, M_, t);
        if (!rep.ok()) fail("first-appearance rewrite: " + rep.violation);
        int after = theta(A_, M_, t);
        if (after >= before) fail("first-appearance rewrite did not decrease theta");
      }
      T_ = std::move(t);
      log("first-appearance rewrite at " + to_string(g));
    }
  }

  // ---------------------------------------------------------------------

  std::optional<M_t> base_case() {
    count("base");
    EdgeSet bare = M_.edges;
    for (std::size_t i = 0; i + 1 < T_.size(); ++i) bare.insert(edge_between(T_[i].vertex, T_[i + 1].vertex));
    EdgeSet colored = colored_from(bare);
    LabelConstraints<E> cons;
    cons.soft = carried_labels(M_, colored);
    auto lab = compute_valid_labeling(A_, colored, cons);
    if (!lab.ok()) fail("base case: no valid labeling: " + lab.error);
    M_t out{colored, *lab.labels};
    if (opt_.check) {
      auto v = check_quasi_matching(A_, out.edges);
      if (!v.ok() && v.condition != Condition::path) fail(std::string("base case: ") + to_string(v.condition));
    }
    eliminate(A_, out, {T_.back().vertex});
    return out;
  }

  // ---------------------------------------------------------------------

  void nonsimple_case() {
    auto pw = parse();
    const auto& pm = pw.outer(pw.m());
    std::optional<std::size_t> i0, i1;
    for (std::size_t i = pm.last + 1; i-- > pm.first;) {
      for (std::size_t j = i + 1; j <= pm.last; ++j)
        if (T_[j].vertex == T_[i].vertex) {
          i0 = i;
          i1 = j;
          break;
        }
      if (i0) break;
    }
    if (!i0 || T_[*i0].vertex.is_row() || *i0 == pm.first) fail("non-simple case: no repeated column vertex");
    std::size_t k = (*i1 - *i0) / 2;
    auto alpha = [&](std::size_t i) { return T_[*i0 + 2 * i - 1].vertex; };
    auto beta = [&](std::size_t i) { return T_[*i0 + 2 * i].vertex; };
    std::size_t r = 0;
    for (std::size_t i = 1; i <= k; ++i)
      if (A_.rank(edge_between(beta(i - 1), alpha(i))) == 1) r = i;
    std::size_t lo = r == 0 ? 1 : r;
    std::vector<Vertex> targets;
    for (std::size_t i = lo; i <= k; ++i) targets.push_back(alpha(i));
    std::size_t f = 0;
    while (f < T_.size() && !detail::has(targets, T_[f].vertex)) ++f;
    std::size_t s = lo + detail::index_of(targets, T_[f].vertex);

    EdgeSet bare = M_.edges;
    std::vector<Vertex> path;
    for (std::size_t i = s; i > lo; --i) {
      path.push_back(alpha(i));
      path.push_back(beta(i - 1));
    }
    path.push_back(alpha(lo));
    if (r == 0) {
      count("nonsimple-rank2");
      for (std::size_t i = 1; i <= k; ++i) {
        bare.insert(edge_between(beta(i - 1), alpha(i)));
        bare.erase(edge_between(alpha(i), beta(i)));
      }
      path.push_back(beta(0));
      for (std::size_t j = *i1 + 1; j < T_.size(); ++j) path.push_back(T_[j].vertex);
      auto t = extend(A_, detail::prefix(T_, f), std::span<const Vertex>(path));
      commit(colored_from(bare), std::move(t), "non-simple rank-2 loop");
      return;
    }
    count("nonsimple-rank1");
    for (std::size_t j = *i0; j < pm.last; ++j) bare.insert(edge_between(T_[j].vertex, T_[j + 1].vertex));
    for (std::size_t i = r; i <= k; ++i) bare.erase(edge_between(alpha(i), beta(i)));
    EdgeSet colored = colored_from(bare);
    eliminate_edges(colored, {T_[pm.last].vertex});
    auto t = extend(A_, detail::prefix(T_, f), std::span<const Vertex>(path));
    commit(colored, std::move(t), "non-simple loop with a rank-1 edge");
  }

  // ---------------------------------------------------------------------

  struct Shape {
    ParsedWalk pw;
    std::size_t m = 0;
    Segment pm{SegmentKind::outer, 0, 0}, qm{SegmentKind::inner, 0, 0};
    std::vector<Vertex> pm_verts;
    Vertex bstar, apm;
    std::vector<Vertex> qplus, qminus;
    int comp = -1;
  };

  Shape shape() const {
    Shape sh;
    sh.pw = parse();
    sh.m = sh.pw.m();
    sh.pm = sh.pw.outer(sh.m);
    sh.qm = sh.pw.inner(sh.m);
    sh.pm_verts = verts(sh.pm.first, sh.pm.last);
    sh.bstar = sh.pm_verts.front();
    sh.apm = sh.pm_verts.back();
    return sh;
  }

  // (N_i): inner walks from an earlier junction that reach β(P_m) with a
  // subspace different from the back-propagated one.
  void enforce_ni() {
    auto sh = shape();
    if (sh.m < 2) return;
    auto vee = pm_vee(sh.pm);
    const Space& yv = vee.front().in;
    for (std::size_t l = 0; l + 2 <= sh.m; ++l) {
      std::size_t j = sh.pw.outer(l).last;
      Vertex a = T_[j].vertex;
      if (!M_.labels.has(a)) continue;
      for (Sign s : {Sign::plus, Sign::minus}) {
        if (T_[j].in == U(a, -s)) continue;
        auto q = detail::inner_walk_from(A_, M_.edges, a, s, sh.bstar);
        if (q.empty()) continue;
        if (U(sh.bstar, -s) == yv) continue;
        count("Ni");
        auto head = detail::prefix(T_, j);
        head.back().out = U(a, s);
        auto t = join(head, inner_space_walk(M_, std::span<const Vertex>(q)));
        t = extend(A_, std::move(t), std::span<const Vertex>(sh.pm_verts));
        if (opt_.check) {
          auto rep = validate_augmenting(A_, M_, t);
          if (!rep.ok()) fail("inner shortcut rewrite: " + rep.violation);
        }
        T_ = std::move(t);
        log("inner shortcut from " + to_string(a));
        return;
      }
    }
  }

  // Makes the last edge of Q_m a +-edge and fills in Q^+, Q^-.
  Shape normalized() {
    auto sh = shape();
    EdgeKey last = edge_between(T_[sh.qm.last - 1].vertex, T_[sh.qm.last].vertex);
    auto d = M_.decomposition();
    sh.comp = d.component_of(last);
    if (M_.edges.sign(last) == Sign::minus) recolor_component(M_, d.component(sh.comp));
    sh.qplus = detail::inner_walk_into(A_, M_.edges, sh.bstar, Sign::plus);
    sh.qminus = detail::inner_walk_into(A_, M_.edges, sh.bstar, Sign::minus);
    auto qm = verts(sh.qm.first, sh.qm.last);
    if (qm.size() > sh.qplus.size() || !std::equal(qm.begin(), qm.end(), sh.qplus.end() - static_cast<std::ptrdiff_t>(qm.size())))
      fail("last inner walk is not a suffix of the maximal +-walk");
    return sh;
  }

  // P_0 ∘ ... ∘ P_{m-1} ▷ Q^+[α(Q_m), α^+]
  Trail<E> cycle_form(const Shape& sh, const std::vector<Vertex>& tail = {}) const {
    std::size_t j = sh.pw.outer(sh.m - 1).last;
    Vertex aq = T_[j].vertex;
    auto qp = sh.qplus;
    std::size_t at = detail::index_of(qp, aq);
    std::vector<Vertex> path(qp.begin(), qp.begin() + static_cast<std::ptrdiff_t>(at) + 1);
    path = concat(detail::reversed(path), tail);
    return extend(A_, detail::prefix(T_, j), std::span<const Vertex>(path));
  }

  EdgeSet cycle_case_edges(const Shape& sh) const {
    EdgeSet bare = M_.edges;
    for (std::size_t i = sh.pm.first; i < sh.pm.last; ++i) bare.insert(edge_between(T_[i].vertex, T_[i + 1].vertex));
    for (EdgeKey e : detail::edges_of(sh.qplus))
      if (M_.edges.sign(e) == Sign::plus) bare.erase(e);
    return bare;
  }

  std::optional<M_t> simple_case() {
    enforce_ni();
    auto sh = normalized();
    auto d = M_.decomposition();
    const Component& C = d.component(sh.comp);
    if (C.cycle) {
      bool minus_rank1 = false;
      for (EdgeKey e : C.edges)
        if (A_.rank(e) == 1 && M_.edges.sign(e) == Sign::minus) minus_rank1 = true;
      if (!minus_rank1 && cycle_case_two(sh, C)) return std::nullopt;
      if (!minus_rank1) sh = normalized();
      return cycle_case_one(sh);
    }
    return path_case(sh);
  }

  std::optional<M_t> cycle_case_one(const Shape& sh) {
    count("cycle-1");
    EdgeSet colored = colored_from(cycle_case_edges(sh));
    eliminate_edges(colored, {sh.apm});
    if (auto done = try_finish(colored)) return done;
    commit(colored, cycle_form(sh), "cycle case 1");
    return std::nullopt;
  }

  // Returns true when the walk was rewritten for I minus the +-edges of C.
  // Otherwise T is replaced by a walk for I whose last inner walk ends with a
  // --edge, and the caller continues with case 1.
  bool cycle_case_two(const Shape& sh, const Component& C) {
    std::size_t j = sh.pw.outer(sh.m - 1).last;
    Vertex aq = T_[j].vertex;
    std::vector<EdgeKey> qm_edges = detail::edges_of(verts(sh.qm.first, sh.qm.last));
    // Complementary arc from α(Q_m) to β*.
    std::vector<Vertex> q{aq};
    {
      Vertex cur = aq;
      Sign s = Sign::minus;
      for (std::size_t steps = 0; steps < C.edges.size(); ++steps) {
        auto e = M_.edges.edge_with_sign(cur, s);
        if (!e || detail::has(qm_edges, *e)) fail("cycle case 2: arc runs into the last inner walk");
        cur = other_end(*e, cur);
        q.push_back(cur);
        if (cur == sh.bstar) break;
        s = -s;
      }
      if (!(q.back() == sh.bstar)) fail("cycle case 2: arc does not reach the end vertex");
    }
    EdgeSet bare = M_.edges;
    for (EdgeKey e : C.edges)
      if (M_.edges.sign(e) == Sign::plus) bare.erase(e);
    EdgeSet colored = colored_from(bare);
    auto path = concat(q, sh.pm_verts);
    auto t = extend(A_, detail::prefix(T_, j), std::span<const Vertex>(path));
    Trail<E> tail(t.begin() + static_cast<std::ptrdiff_t>(j), t.end());
    Space kl = ker_of(A_, colored, sh.apm);
    if (detail::truncated_outer_ok(A_, colored, tail) && !kl.is_zero() && !t.back().in.contains(kl)) {
      count("cycle-2");
      commit(colored, std::move(t), "cycle case 2");
      return true;
    }
    count("cycle-2-fallback");
    auto head = detail::prefix(T_, j);
    head.back().out = U(aq, Sign::minus);
    auto t2 = join(head, inner_space_walk(M_, std::span<const Vertex>(q)));
    t2 = extend(A_, std::move(t2), std::span<const Vertex>(sh.pm_verts));
    if (opt_.check) {
      auto rep = validate_augmenting(A_, M_, t2);
      if (!rep.ok()) fail("cycle case 2 fallback: " + rep.violation);
    }
    T_ = std::move(t2);
    return false;
  }

  // ---------------------------------------------------------------------

  std::optional<M_t> path_case(const Shape& sh) {
    const EdgeSet& I = M_.edges;
    bool pat_a = sh.apm == sh.qplus.front();
    bool pat_b = I.degree(sh.bstar) == 1;
    EdgeSet colored = colored_from(cycle_case_edges(sh));
    EdgeSet before = colored;
    auto plan = eliminate_edges(colored, {sh.apm, sh.bstar});
    std::vector<EdgeKey> d_alpha, d_beta;
    for (const auto& st : plan) {
      if (st.end && *st.end == sh.apm) d_alpha = st.removed;
      if (st.end && *st.end == sh.bstar) d_beta = st.removed;
    }
    if (auto done = try_finish(colored)) return done;
    EdgeKey last_pm = edge_between(sh.pm_verts[sh.pm_verts.size() - 2], sh.apm);
    if (!pat_a && (!pat_b || d_beta.empty())) {
      count("path-plain");
      commit(colored, cycle_form(sh), "path case");
      return std::nullopt;
    }
    if (pat_a && !pat_b) {
      if (A_.rank(last_pm) == 1 || d_alpha.empty()) {
        count("path-A-rank1");
        commit(colored, cycle_form(sh), "path case A");
        return std::nullopt;
      }
      count("path-A");
      auto res = path_a(sh, colored, d_alpha, true);
      commit(colored, std::move(res.walk), "path case A");
      return std::nullopt;
    }
    if (!pat_a) {
      count("path-B");
      commit_start_checked(sh, before, colored, d_beta, path_b(sh, before, colored, d_beta), "path case B");
      return std::nullopt;
    }
    count("path-AB");
    bool has_rank1 = false;
    for (EdgeKey e : detail::edges_of(sh.pm_verts))
      if (A_.rank(e) == 1) has_rank1 = true;
    if (!has_rank1) fail("path case A and B: all-rank-2 last outer walk did not increase r");
    PathA res;
    if (A_.rank(last_pm) == 1 || d_alpha.empty()) {
      res.walk = cycle_form(sh);
      res.kept = sh.pw.outer(sh.m - 1).last;
      res.ell = sh.m - 1;
    } else {
      res = path_a(sh, colored, d_alpha, false);
    }
    Trail<E> t = std::move(res.walk);
    if (!d_beta.empty()) {
      // L runs from β^0 to β* along P_m.
      auto L = l_path(sh, before, d_beta);
      std::optional<std::size_t> best_l, best_idx;
      for (std::size_t l = 0; l <= res.ell && l + 1 <= sh.m; ++l) {
        auto idx = p2_vertex(sh, l, L);
        if (idx && *idx <= res.kept) {
          best_l = l;
          best_idx = idx;
        }
      }
      if (best_l) {
        std::size_t at = detail::index_of(L, T_[*best_idx].vertex);
        std::vector<Vertex> lp(L.begin(), L.begin() + static_cast<std::ptrdiff_t>(at) + 1);
        auto head = front_propagate(A_, ker_of(A_, colored, L.front()), std::span<const Vertex>(lp));
        Trail<E> rest(t.begin() + static_cast<std::ptrdiff_t>(*best_idx), t.end());
        t = join(head, rest);
      }
    }
    commit_start_checked(sh, before, colored, d_beta, std::move(t), "path case A and B");
    return std::nullopt;
  }

  // When the walk starts on L, the elimination from β* changes the kernel at
  // its first vertex and the prefix of T no longer starts correctly. Try the
  // walk from β^0 along L and back along Q^+, then a fresh search for I'.
  void commit_start_checked(const Shape& sh, const EdgeSet& before, const EdgeSet& ip, const std::vector<EdgeKey>& D,
                            Trail<E> t, const std::string& where) {
    Space k0 = ker_of(A_, ip, t.front().vertex);
    if (D.empty() || (!k0.is_zero() && t.front().out == k0)) {
      commit(ip, std::move(t), where);
      return;
    }
    auto L = l_path(sh, before, D);
    auto path = concat(L, detail::reversed(sh.qplus));
    auto cand = front_propagate(A_, ker_of(A_, ip, L.front()), std::span<const Vertex>(path));
    if (parse_walk(A_, ip, cand).ok()) {
      M_t next = relabel(ip, cand, where);
      if (validate_augmenting(A_, next, cand).ok()) {
        count("path-restart");
        commit(ip, std::move(cand), where + " (restart along L)");
        return;
      }
    }
    count("path-research");
    LabelConstraints<E> cons;
    cons.soft = carried_labels(M_, ip);
    auto lab = compute_valid_labeling(A_, ip, cons);
    if (!lab.ok()) fail(where + ": no valid labeling for the new edge set: " + lab.error);
    M_t next{ip, *lab.labels};
    auto found = find_witness_or_walk(A_, next);
    auto* walk = std::get_if<Trail<E>>(&found);
    if (!walk) fail(where + ": no augmenting walk after the first vertex lost its kernel");
    commit(ip, std::move(*walk), where + " (new search)");
    restarted_ = true;
  }

  struct PathA {
    Trail<E> walk;
    std::size_t kept = 0;  // last index shared with T
    std::size_t ell = 0;
  };

  PathA path_a(const Shape& sh, const EdgeSet& ip, const std::vector<EdgeKey>& D, bool use_q) {
    // K runs from α(P_m) back along P_m and then backwards along Q^-.
    auto K = concat(detail::reversed(sh.pm_verts), detail::reversed(sh.qminus));
    auto touches = [&](Vertex v) {
      for (EdgeKey e : D)
        if (incident(e, v)) return true;
      return false;
    };
    std::size_t star = 0;
    for (std::size_t i = 0; i < K.size(); ++i)
      if (touches(K[i])) star = i;
    std::vector<Vertex> R(K.begin(), K.begin() + static_cast<std::ptrdiff_t>(star) + 1);
    std::size_t pm_len = sh.pm_verts.size();
    auto r_pm = detail::edges_of({R.begin(), R.begin() + static_cast<std::ptrdiff_t>(std::min(R.size(), pm_len))});
    bool enters_q = R.size() > pm_len;

    std::size_t ell = sh.m;
    for (std::size_t l = 0; l <= sh.m; ++l) {
      const auto& seg = sh.pw.outer(l);
      bool meets = false;
      for (std::size_t i = seg.first; i < seg.last; ++i)
        if (detail::has(r_pm, edge_between(T_[i].vertex, T_[i + 1].vertex))) meets = true;
      if (meets) {
        ell = l;
        break;
      }
    }
    std::size_t kk = std::numeric_limits<std::size_t>::max();
    std::vector<Vertex> kwalk;
    if (use_q && enters_q) {
      std::vector<EdgeKey> rq;
      for (std::size_t i = pm_len - 1; i + 1 < R.size(); ++i) rq.push_back(edge_between(R[i], R[i + 1]));
      Space kam = ker_of(A_, ip, sh.qminus.front());
      for (std::size_t k = 1; k + 1 <= sh.m; ++k) {
        const auto& q = sh.pw.inner(k);
        bool shares = false;
        for (std::size_t i = q.first; i < q.last; ++i)
          if (detail::has(rq, edge_between(T_[i].vertex, T_[i + 1].vertex))) shares = true;
        Vertex aq = T_[q.first].vertex;
        if (!shares || !detail::has(sh.qminus, aq)) continue;
        std::size_t at = detail::index_of(sh.qminus, aq);
        std::vector<Vertex> path(sh.qminus.begin(), sh.qminus.begin() + static_cast<std::ptrdiff_t>(at) + 1);
        path = detail::reversed(path);
        auto cand = front_propagate(A_, T_[q.first].in, std::span<const Vertex>(path));
        if (!detail::truncated_outer_ok(A_, ip, cand) || kam.is_zero() || cand.back().in.contains(kam)) continue;
        kk = k;
        kwalk = path;
        break;
      }
    }
    PathA res;
    if (kk <= ell) {
      count("path-A-q1");
      std::size_t j = sh.pw.outer(kk - 1).last;
      res.walk = extend(A_, detail::prefix(T_, j), std::span<const Vertex>(kwalk));
      res.kept = j;
      res.ell = kk - 1;
      return res;
    }
    if (ell < sh.m) {
      const auto& seg = sh.pw.outer(ell);
      std::optional<std::size_t> f;
      for (std::size_t i = seg.first; i <= seg.last && !f; ++i)
        if (touches(T_[i].vertex)) f = i;
      if (!f || !T_[*f].vertex.is_row()) fail("path case A: earlier outer walk does not reach a trimmed edge at a row vertex");
      std::size_t at = detail::index_of(R, T_[*f].vertex);
      std::vector<Vertex> path(R.begin() + static_cast<std::ptrdiff_t>(at), R.end());
      res.walk = extend(A_, detail::prefix(T_, *f), std::span<const Vertex>(path));
      res.kept = *f;
      res.ell = ell;
      return res;
    }
    res.walk = cycle_form(sh, R);
    res.kept = sh.pw.outer(sh.m - 1).last;
    res.ell = sh.m - 1;
    return res;
  }

  // Path from β^0 to β* in the direction opposite to P_m, through the part of
  // the old component beyond α(P_m) when the trimming reaches it.
  std::vector<Vertex> l_path(const Shape& sh, const EdgeSet& before, const std::vector<EdgeKey>& D) const {
    auto K = sh.pm_verts;  // from β*
    auto d = Decomposition::of(before);
    int c = d.component_of(sh.apm);
    if (c >= 0) {
      const auto& comp = d.component(c);
      auto vs = comp.vertices;
      if (!(vs.front() == sh.bstar)) vs = detail::reversed(vs);
      // The component runs β* ... α(P_m) ... end; K is its vertex list.
      if (vs.front() == sh.bstar) K = vs;
    }
    std::size_t far = 0;
    for (std::size_t i = 0; i < K.size(); ++i)
      for (EdgeKey e : D)
        if (incident(e, K[i])) far = i;
    std::vector<Vertex> L(K.begin(), K.begin() + static_cast<std::ptrdiff_t>(far) + 1);
    return detail::reversed(L);
  }

  // (p2): index in T of the last vertex of P_l on P_m when it is a column
  // vertex of L.
  std::optional<std::size_t> p2_vertex(const Shape& sh, std::size_t l, const std::vector<Vertex>& L) const {
    const auto& seg = sh.pw.outer(l);
    std::optional<std::size_t> lastpm;
    for (std::size_t i = seg.first; i <= seg.last; ++i)
      if (detail::has(sh.pm_verts, T_[i].vertex)) lastpm = i;
    if (!lastpm || T_[*lastpm].vertex.is_row() || !detail::has(L, T_[*lastpm].vertex)) return std::nullopt;
    return lastpm;
  }

  Trail<E> path_b(const Shape& sh, const EdgeSet& before, const EdgeSet& ip, const std::vector<EdgeKey>& D) {
    auto L = l_path(sh, before, D);
    Vertex b0 = L.front();
    Space k0 = ker_of(A_, ip, b0);
    std::vector<EdgeKey> l_edges = detail::edges_of(L);
    std::set<EdgeKey> pm_edges;
    for (EdgeKey e : detail::edges_of(sh.pm_verts)) pm_edges.insert(e);
    std::size_t J = sh.pw.outer(sh.m - 1).last;

    long ell = -1, kk = -1;
    std::size_t ell_idx = 0;
    for (std::size_t l = 0; l + 1 <= sh.m; ++l)
      if (auto idx = p2_vertex(sh, l, L)) {
        ell = static_cast<long>(l);
        ell_idx = *idx;
      }
    std::vector<std::size_t> q22;
    for (std::size_t k = 1; k + 1 <= sh.m; ++k) {
      const auto& q = sh.pw.inner(k);
      bool shares = false;
      for (std::size_t i = q.first; i < q.last; ++i) {
        EdgeKey e = edge_between(T_[i].vertex, T_[i + 1].vertex);
        if (detail::has(l_edges, e) && !pm_edges.count(e)) shares = true;
      }
      if (!shares || !detail::has(L, T_[q.last].vertex)) continue;
      EdgeKey e1 = edge_between(T_[q.first].vertex, T_[q.first + 1].vertex);
      if (!detail::has(l_edges, e1)) continue;  // enters L through β^0
      if (detail::has(D, e1)) {
        kk = static_cast<long>(k);
        continue;
      }
      const auto& pk = sh.pw.outer(k);
      auto path = vertices_of(T_, q.first, pk.last);
      auto cand = front_propagate(A_, T_[q.first].in, std::span<const Vertex>(path));
      bool ok = detail::truncated_outer_ok(A_, ip, cand);
      if (ok && k + 1 < sh.m) {
        std::size_t j = pk.last;
        Vertex a = T_[j].vertex;
        Sign s = M_.edges.sign(edge_between(a, T_[j + 1].vertex));
        if (cand.back().in == U(a, -s)) ok = false;
      }
      if (ok)
        q22.push_back(k);
      else
        kk = static_cast<long>(k);
    }
    Trail<E> S = detail::prefix(T_, J);
    std::size_t cut = 0;
    Trail<E> head;
    if (ell >= kk && ell >= 0) {
      std::size_t at = detail::index_of(L, T_[ell_idx].vertex);
      std::vector<Vertex> lp(L.begin(), L.begin() + static_cast<std::ptrdiff_t>(at) + 1);
      head = front_propagate(A_, k0, std::span<const Vertex>(lp));
      cut = ell_idx;
      count("path-B-after1");
    } else if (kk > ell) {
      const auto& q = sh.pw.inner(static_cast<std::size_t>(kk));
      const auto& pk = sh.pw.outer(static_cast<std::size_t>(kk));
      std::size_t at = detail::index_of(L, T_[q.last].vertex);
      std::vector<Vertex> lp(L.begin(), L.begin() + static_cast<std::ptrdiff_t>(at) + 1);
      lp = concat(lp, vertices_of(T_, pk.first, pk.last));
      head = front_propagate(A_, k0, std::span<const Vertex>(lp));
      cut = pk.last;
      count("path-B-after2");
    }
    if (!head.empty()) S[cut].in = head.back().in;
    for (std::size_t k : q22) {
      if (static_cast<long>(k) <= std::max(ell, kk)) continue;
      count("path-B-q22");
      std::size_t a = sh.pw.outer(k - 1).last, b = sh.pw.outer(k).last;
      S[a].out = S[a].in;
      for (std::size_t i = a + 1; i <= b; ++i) {
        auto sp = A_.perp_from(S[i - 1].vertex, S[i - 1].out, edge_between(S[i - 1].vertex, S[i].vertex));
        S[i].in = sp;
        if (i < b || b == J) S[i].out = sp;
      }
    }
    if (!head.empty()) {
      Trail<E> rest(S.begin() + static_cast<std::ptrdiff_t>(cut), S.end());
      S = join(head, rest);
    }
    // S ends at α(Q_m); continue along Q^+ backwards.
    Vertex aq = S.back().vertex;
    std::size_t at = detail::index_of(sh.qplus, aq);
    std::vector<Vertex> path(sh.qplus.begin(), sh.qplus.begin() + static_cast<std::ptrdiff_t>(at) + 1);
    path = detail::reversed(path);
    return extend(A_, std::move(S), std::span<const Vertex>(path));
  }

  const PartitionedMatrix<Field>& A_;
  AugmentOptions opt_;
  Observer observe_;
  AugmentStats stats_;
  int r0_ = 0;
  bool restarted_ = false;
  M_t M_;
  Trail<E> T_;
};

/// Matching with larger r obtained from M along the augmenting walk T.
template <class Field>
Matching<Field> augment(const PartitionedMatrix<Field>& A, const Matching<Field>& M,
                        const Trail<typename Field::Element>& T, AugmentOptions opt = {},
                        AugmentStats* stats = nullptr, typename Augmenter<Field>::Observer observe = {}) {
  Augmenter<Field> aug(A, opt, std::move(observe));
  try {
    auto out = aug.run(M, T);
    if (stats) *stats = aug.stats();
    return out;
  } catch (...) {
    if (stats) *stats = aug.stats();
    throw;
  }
}

}  // namespace partrank
