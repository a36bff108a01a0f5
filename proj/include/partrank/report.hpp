#pragma once

#include <string>

#include "nlohmann/json.hpp"
#include "partrank/oracle.hpp"

namespace partrank {

inline nlohmann::json element_to_json(const Zp& x) { return x.v; }
inline nlohmann::json element_to_json(const mpq_class& x) {
  if (x.get_den() == 1 && x.get_num().fits_slong_p()) return x.get_num().get_si();
  return x.get_str();
}

/// Lines carry their canonical representative (first nonzero coordinate 1).
template <class E>
nlohmann::json to_json(const Subspace<E>& s) {
  nlohmann::json j{{"dim", s.dim()}};
  if (s.is_line()) j["rep"] = {element_to_json(s.rep().x), element_to_json(s.rep().y)};
  return j;
}

template <class E>
nlohmann::json to_json(const DenseMatrix<E>& M) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < M.rows; ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j = 0; j < M.cols; ++j) row.push_back(element_to_json(M(i, j)));
    rows.push_back(row);
  }
  return rows;
}

template <class Field>
nlohmann::json to_json(const PartitionedMatrix<Field>& A, const Matching<Field>& M) {
  auto edges = nlohmann::json::array();
  for (EdgeKey e : M.edges.keys())
    edges.push_back({{"alpha", e.alpha + 1},
                     {"beta", e.beta + 1},
                     {"rank", A.rank(e)},
                     {"sign", to_string(M.edges.sign(e))}});
  auto labels = nlohmann::json::array();
  auto add = [&](Vertex v) {
    if (!M.labels.has(v)) return;
    labels.push_back({{"vertex", to_string(v)},
                      {"plus", to_json(M.labels.get(v, Sign::plus))},
                      {"minus", to_json(M.labels.get(v, Sign::minus))}});
  };
  for (int a = 0; a < A.mu(); ++a) add(Vertex::alpha(a));
  for (int b = 0; b < A.nu(); ++b) add(Vertex::beta(b));
  return {{"edges", edges}, {"labels", labels}, {"r", r_value(A, M.edges)}};
}

template <class E>
nlohmann::json to_json(const Witness<E>& w) {
  auto X = nlohmann::json::array(), Y = nlohmann::json::array();
  for (const auto& x : w.X) X.push_back(to_json(x));
  for (const auto& y : w.Y) Y.push_back(to_json(y));
  return {{"X", X}, {"Y", Y}, {"value", w.value()}};
}

inline nlohmann::json to_json(const RankReport& r) {
  nlohmann::json j{{"rank", r.rank}, {"method", r.method}};
  if (r.method == "montecarlo") {
    j["trials"] = r.trials;
    j["prime"] = r.prime;
    j["seed"] = r.seed;
  }
  return j;
}

inline nlohmann::json to_json(const SolveStats& s) {
  std::size_t theta = 0;
  for (const auto& r : s.rounds) theta += r.theta.size();
  return {{"augmentations", s.augmentations}, {"theta_trace_length", theta}, {"r_trace", s.r_trace},
          {"seconds", s.seconds}};
}

template <class Field>
nlohmann::json to_json(const PartitionedMatrix<Field>& A, const SolveResult<Field>& res) {
  return {{"rank", res.rank},
          {"matching", to_json(A, res.matching)},
          {"completion", to_json(res.completion)},
          {"witness", to_json(res.witness)},
          {"stats", to_json(res.stats)}};
}

/// Edge subset from a JSON document: a list of [alpha, beta] pairs or
/// {"alpha", "beta"} objects, optionally wrapped in {"edges": ...} or in a
/// solve result's {"matching": ...}. Indices are 1-based.
inline EdgeSet edges_from_json(const nlohmann::json& doc, int mu, int nu) {
  try {
    const nlohmann::json* list = &doc;
    if (doc.is_object() && doc.contains("matching")) list = &doc.at("matching");
    if (list->is_object()) list = &list->at("edges");
    if (!list->is_array()) throw ParseError("edge list must be an array");
    EdgeSet I(mu, nu);
    for (const auto& item : *list) {
      int a = 0, b = 0;
      if (item.is_array() && item.size() == 2) {
        a = item[0].get<int>();
        b = item[1].get<int>();
      } else if (item.is_object()) {
        a = item.at("alpha").get<int>();
        b = item.at("beta").get<int>();
      } else {
        throw ParseError("edge must be [alpha, beta]");
      }
      if (a < 1 || a > mu || b < 1 || b > nu)
        throw ParseError("edge index out of range at " + std::to_string(a) + "-" + std::to_string(b));
      EdgeKey e{a - 1, b - 1};
      if (I.contains(e)) throw ParseError("duplicate edge " + to_string(e));
      I.insert(e);
    }
    return I;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed edge list: ") + e.what());
  }
}

}  // namespace partrank
