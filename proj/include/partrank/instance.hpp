#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "partrank/field.hpp"
#include "partrank/linear2.hpp"

namespace partrank {

/// Block position, 0-based internally.
struct EdgeKey {
  int alpha = 0;
  int beta = 0;
  auto operator<=>(const EdgeKey&) const = default;
};

/// A row block (alpha) or a column block (beta) of the bipartite graph.
struct Vertex {
  enum Part : int { row = 0, col = 1 };
  Part part = row;
  int index = 0;

  static Vertex alpha(int i) { return {row, i}; }
  static Vertex beta(int j) { return {col, j}; }
  bool is_row() const { return part == row; }
  auto operator<=>(const Vertex&) const = default;
};

inline Vertex other_end(EdgeKey e, Vertex v) {
  return v.is_row() ? Vertex::beta(e.beta) : Vertex::alpha(e.alpha);
}
inline bool incident(EdgeKey e, Vertex v) {
  return v.is_row() ? e.alpha == v.index : e.beta == v.index;
}
/// Edge joining two vertices on opposite sides.
inline EdgeKey edge_between(Vertex u, Vertex v) {
  return u.is_row() ? EdgeKey{u.index, v.index} : EdgeKey{v.index, u.index};
}

inline std::string to_string(Vertex v) {
  return (v.is_row() ? "a" : "b") + std::to_string(v.index + 1);
}
inline std::string to_string(EdgeKey e) {
  return std::to_string(e.alpha + 1) + "-" + std::to_string(e.beta + 1);
}

struct Edge {
  EdgeKey key;
  int rank = 0;
};

template <class Field>
class PartitionedMatrix {
 public:
  using field_type = Field;
  using Element = typename Field::Element;
  using Block = Mat2<Element>;
  using Space = Subspace<Element>;

  PartitionedMatrix(Field field, int mu, int nu)
      : field_(std::move(field)), mu_(mu), nu_(nu), blocks_(static_cast<size_t>(mu) * nu), ranks_(blocks_.size(), 0) {
    if (mu < 1 || nu < 1) throw ParseError("block counts must be positive");
  }

  const Field& field() const { return field_; }
  int mu() const { return mu_; }
  int nu() const { return nu_; }

  void set_block(int alpha, int beta, const Block& m) {
    if (alpha < 0 || alpha >= mu_ || beta < 0 || beta >= nu_)
      throw ParseError("block index out of range at " + to_string(EdgeKey{alpha, beta}));
    if (m.is_zero()) throw ParseError("zero block listed explicitly at " + to_string(EdgeKey{alpha, beta}));
    auto i = slot(alpha, beta);
    blocks_[i] = m;
    ranks_[i] = static_cast<signed char>(partrank::rank(m));
    EdgeKey key{alpha, beta};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                               [](const Edge& e, const EdgeKey& k) { return e.key < k; });
    if (it != edges_.end() && it->key == key)
      it->rank = ranks_[i];
    else
      edges_.insert(it, Edge{key, ranks_[i]});
  }

  bool has_edge(EdgeKey e) const { return ranks_[slot(e.alpha, e.beta)] != 0; }
  const Block& block(EdgeKey e) const { return *blocks_[slot(e.alpha, e.beta)]; }
  int rank(EdgeKey e) const { return ranks_[slot(e.alpha, e.beta)]; }

  /// Nonzero blocks in lexicographic order.
  const std::vector<Edge>& edges() const { return edges_; }

  std::vector<EdgeKey> edges_at(Vertex v) const {
    std::vector<EdgeKey> out;
    if (v.is_row()) {
      for (int b = 0; b < nu_; ++b)
        if (ranks_[slot(v.index, b)]) out.push_back({v.index, b});
    } else {
      for (int a = 0; a < mu_; ++a)
        if (ranks_[slot(a, v.index)]) out.push_back({a, v.index});
    }
    return out;
  }

  /// Orthogonal space of z (a subspace at v) through the block of e.
  Space perp_from(Vertex v, const Space& z, EdgeKey e) const {
    return perp(z, block(e), v.is_row() ? Side::left : Side::right);
  }
  Space left_kernel(EdgeKey e) const { return partrank::left_kernel(block(e)); }
  Space right_kernel(EdgeKey e) const { return partrank::right_kernel(block(e)); }
  /// Kernel of the block of e on the side of v.
  Space kernel_at(Vertex v, EdgeKey e) const { return v.is_row() ? left_kernel(e) : right_kernel(e); }

  friend bool operator==(const PartitionedMatrix& l, const PartitionedMatrix& r) {
    return l.field_ == r.field_ && l.mu_ == r.mu_ && l.nu_ == r.nu_ && l.blocks_ == r.blocks_;
  }

 private:
  size_t slot(int a, int b) const { return static_cast<size_t>(a) * nu_ + b; }

  Field field_;
  int mu_, nu_;
  std::vector<std::optional<Block>> blocks_;
  std::vector<signed char> ranks_;
  std::vector<Edge> edges_;
};

using RationalMatrix = PartitionedMatrix<RationalField>;
using PrimeMatrix = PartitionedMatrix<PrimeField>;
using AnyMatrix = std::variant<RationalMatrix, PrimeMatrix>;

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <class Field>
typename Field::Element parse_entry(const Field& f, const nlohmann::json& e) {
  if (e.is_number_integer()) return f.from_int(e.get<long long>());
  if (e.is_string()) return f.parse(e.get<std::string>());
  throw ParseError("block entry must be an integer or a \"num/den\" string");
}

inline nlohmann::json format_entry(const RationalField&, const mpq_class& v) {
  if (v.get_den() == 1 && v.get_num().fits_slong_p()) return v.get_num().get_si();
  return v.get_str();
}
inline nlohmann::json format_entry(const PrimeField&, const Zp& v) { return v.v; }

template <class Field>
PartitionedMatrix<Field> parse_blocks(Field f, int mu, int nu, const nlohmann::json& doc) {
  PartitionedMatrix<Field> A(std::move(f), mu, nu);
  if (!doc.contains("blocks")) return A;
  const auto& blocks = doc.at("blocks");
  if (!blocks.is_array()) throw ParseError("\"blocks\" must be an array");
  std::vector<char> seen(static_cast<size_t>(mu) * nu, 0);
  for (const auto& blk : blocks) {
    int a = blk.at("alpha").get<int>();
    int b = blk.at("beta").get<int>();
    std::string key = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
    if (a < 1 || a > mu || b < 1 || b > nu) throw ParseError("block index out of range at " + key);
    auto& flag = seen[static_cast<size_t>(a - 1) * nu + (b - 1)];
    if (flag) throw ParseError("duplicate block at " + key);
    flag = 1;
    const auto& m = blk.at("m");
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[0].size() != 2 || !m[1].is_array() ||
        m[1].size() != 2)
      throw ParseError("block " + key + " must be a 2x2 array");
    typename PartitionedMatrix<Field>::Block M{parse_entry(A.field(), m[0][0]), parse_entry(A.field(), m[0][1]),
                                               parse_entry(A.field(), m[1][0]), parse_entry(A.field(), m[1][1])};
    if (M.is_zero()) throw ParseError("zero block listed explicitly at " + key);
    A.set_block(a - 1, b - 1, M);
  }
  return A;
}

}  // namespace detail

inline AnyMatrix instance_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("instance must be a JSON object");
    int mu = doc.at("mu").get<int>();
    int nu = doc.at("nu").get<int>();
    const auto& field = doc.at("field");
    if (field.is_string()) {
      if (field.get<std::string>() != "Q") throw ParseError("unknown field \"" + field.get<std::string>() + "\"");
      return detail::parse_blocks(RationalField{}, mu, nu, doc);
    }
    if (field.is_object() && field.contains("gf")) {
      auto p = field.at("gf").get<long long>();
      if (p < 2 || p > 0x7fffffffLL || !is_prime(static_cast<std::uint64_t>(p)))
        throw ParseError("modulus not prime: " + std::to_string(p));
      return detail::parse_blocks(PrimeField(static_cast<std::uint32_t>(p)), mu, nu, doc);
    }
    throw ParseError("field must be \"Q\" or {\"gf\": p}");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  }
}

inline AnyMatrix load_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

inline nlohmann::json field_to_json(const RationalField&) { return "Q"; }
inline nlohmann::json field_to_json(const PrimeField& f) { return {{"gf", f.modulus()}}; }

template <class Field>
nlohmann::json to_json(const PartitionedMatrix<Field>& A) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& e : A.edges()) {
    const auto& m = A.block(e.key);
    const auto& f = A.field();
    blocks.push_back({{"alpha", e.key.alpha + 1},
                      {"beta", e.key.beta + 1},
                      {"m",
                       {{detail::format_entry(f, m.a), detail::format_entry(f, m.b)},
                        {detail::format_entry(f, m.c), detail::format_entry(f, m.d)}}}});
  }
  return {{"mu", A.mu()}, {"nu", A.nu()}, {"field", field_to_json(A.field())}, {"blocks", blocks}};
}

template <class Field>
std::string save_instance(const PartitionedMatrix<Field>& A) {
  return to_json(A).dump(2) + "\n";
}

}  // namespace partrank
