// partrank: rank of 2x2-type generic partitioned matrices.
//
//   partrank solve INSTANCE [--verify] [--trace] [--field F]
//   partrank gen MU NU DENSITY RANK1_FRACTION [FIELD] [SEED]
//   partrank check INSTANCE EDGES
//   partrank oracle INSTANCE [--trials N] [--prime P] [--seed S] [--brute]
//
// Exit codes: 0 success, 2 bad input, 3 internal invariant breach.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "partrank/generate.hpp"
#include "partrank/report.hpp"

using namespace partrank;
using nlohmann::json;

namespace {

constexpr int kInputError = 2;
constexpr int kInvariantError = 3;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ParseError(path + ": malformed JSON: " + e.what());
  }
}

json field_json(const std::string& name) {
  if (name == "Q" || name == "q") return "Q";
  std::string digits = name;
  for (const char* prefix : {"gf", "GF"})
    if (digits.rfind(prefix, 0) == 0) digits = digits.substr(2);
  if (!digits.empty() && digits.front() == '(' && digits.back() == ')') digits = digits.substr(1, digits.size() - 2);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError("unknown field \"" + name + "\"");
  return {{"gf", std::stoll(digits)}};
}

// Re-reads the document over another field. Blocks vanishing there are dropped.
AnyMatrix load(const std::string& path, const std::string& field) {
  json doc = read_json(path);
  if (!field.empty() && doc.is_object()) {
    doc["field"] = field_json(field);
    if (doc["field"].is_object() && doc.contains("blocks") && doc["blocks"].is_array()) {
      PrimeField F(static_cast<std::uint32_t>(doc["field"]["gf"].get<long long>()));
      json kept = json::array();
      for (const auto& b : doc["blocks"]) {
        bool zero = true;
        for (const auto& row : b.at("m"))
          for (const auto& x : row) zero = zero && is_zero(F.parse(x.is_string() ? x.get<std::string>() : x.dump()));
        if (!zero) kept.push_back(b);
      }
      doc["blocks"] = kept;
    }
  }
  return instance_from_json(doc);
}

bool trace_requested(bool flag) {
  const char* env = std::getenv("PARTRANK_TRACE");
  return flag || (env && std::string(env) == "1");
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

struct OracleFlags {
  int trials = 5;
  std::uint64_t prime = kDefaultPrime;
  std::uint64_t seed = 1;
  bool brute = false;
};

template <class Field>
json oracle_report(const PartitionedMatrix<Field>& A, const OracleFlags& f) {
  if (f.brute) {
    auto [I, r] = brute_force_max_matching(A);
    auto edges = json::array();
    for (EdgeKey e : I.keys()) edges.push_back({e.alpha + 1, e.beta + 1});
    return {{"rank", r}, {"method", "brute"}, {"matching", edges}};
  }
  return to_json(monte_carlo_rank(A, f.trials, f.prime, f.seed));
}

template <class Field>
int solve_cmd(const PartitionedMatrix<Field>& A, bool verify, bool trace, const OracleFlags& f) {
  SolveOptions<Field> opt;
  if (trace) opt.trace = &std::cerr;
  auto res = solve(A, opt);
  json out = to_json(A, res);
  if (verify) {
    json checks;
    bool all = true;
    auto note = [&](const std::string& name, const CheckReport& c) {
      checks[name] = c.ok ? "ok" : c.detail;
      all = all && c.ok;
    };
    auto v = check_matching(A, res.matching.edges);
    note("matching", v.ok() ? CheckReport{} : CheckReport{false, std::string("violated(") + to_string(v.condition) + ")"});
    note("witness", verify_witness(res.witness, A, res.rank));
    int dense = dense_rank(res.completion);
    note("completion", dense == res.rank ? CheckReport{}
                                         : CheckReport{false, "completion rank " + std::to_string(dense)});
    note("kernel", check_kernel_formula(A, res.matching.edges));
    auto mc = monte_carlo_rank(A, f.trials, f.prime, f.seed);
    note("montecarlo", mc.rank == res.rank ? CheckReport{}
                                           : CheckReport{false, "Monte Carlo rank " + std::to_string(mc.rank)});
    out["oracle"] = to_json(mc);
    if (static_cast<long>(A.mu()) * A.nu() <= 12) {
      int br = brute_force_max_matching(A).second;
      note("brute", br == res.rank ? CheckReport{} : CheckReport{false, "enumeration rank " + std::to_string(br)});
    }
    out["checks"] = checks;
    print(out);
    return all ? 0 : kInvariantError;
  }
  print(out);
  return 0;
}

template <class Field>
int check_cmd(const PartitionedMatrix<Field>& A, const std::string& edges_path) {
  EdgeSet I = edges_from_json(read_json(edges_path), A.mu(), A.nu());
  for (EdgeKey e : I.keys())
    if (!A.has_edge(e)) throw ParseError("no block at " + to_string(e));
  auto v = check_matching(A, I);
  if (v.ok()) {
    print({{"verdict", "ok"}, {"r", r_value(A, I)}});
  } else {
    print({{"verdict", "violated"}, {"condition", to_string(v.condition)}, {"detail", v.detail}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact rank of 2x2-type generic partitioned matrices"};
  app.require_subcommand(1);

  std::string instance, edges_path, field;
  bool verify = false, trace = false;
  OracleFlags of;

  auto* solve = app.add_subcommand("solve", "Compute rank, maximum matching, completion and witness");
  solve->add_option("instance", instance, "Instance JSON")->required();
  solve->add_flag("--verify", verify, "Run every oracle check on the result");
  solve->add_flag("--trace", trace, "Per-iteration log on stderr");
  solve->add_option("--field", field, "Read the instance over another field (Q or gfP)");
  solve->add_option("--trials", of.trials, "Monte Carlo trials for --verify");
  solve->add_option("--prime", of.prime, "Monte Carlo prime for --verify");
  solve->add_option("--seed", of.seed, "Monte Carlo seed for --verify");

  GenParams g;
  std::string gen_field = "Q";
  auto* gen = app.add_subcommand("gen", "Random instance");
  gen->add_option("mu", g.mu)->required()->check(CLI::PositiveNumber);
  gen->add_option("nu", g.nu)->required()->check(CLI::PositiveNumber);
  gen->add_option("density", g.density)->required()->check(CLI::Range(0.0, 1.0));
  gen->add_option("rank1_fraction", g.rank1_fraction)->required()->check(CLI::Range(0.0, 1.0));
  gen->add_option("field_name", gen_field, "Q or gfP");
  gen->add_option("seed_value", g.seed);
  gen->add_option("--field", gen_field, "Q or gfP");
  gen->add_option("--seed", g.seed);

  auto* check = app.add_subcommand("check", "Decide whether an edge subset is a matching");
  check->add_option("instance", instance, "Instance JSON")->required();
  check->add_option("edges", edges_path, "Edge list JSON")->required();
  check->add_option("--field", field, "Read the instance over another field (Q or gfP)");

  auto* oracle = app.add_subcommand("oracle", "Rank by random substitution or enumeration");
  oracle->add_option("instance", instance, "Instance JSON")->required();
  oracle->add_option("--trials", of.trials)->check(CLI::PositiveNumber);
  oracle->add_option("--prime", of.prime);
  oracle->add_option("--seed", of.seed);
  oracle->add_flag("--brute", of.brute, "Enumerate edge subsets instead");
  oracle->add_option("--field", field, "Read the instance over another field (Q or gfP)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*gen) {
      json f = field_json(gen_field);
      if (f.is_string()) {
        std::cout << save_instance(random_instance(RationalField{}, g));
      } else {
        auto p = f["gf"].get<long long>();
        if (p < 2 || p > 0x7fffffffLL || !is_prime(static_cast<std::uint64_t>(p)))
          throw ParseError("modulus not prime: " + std::to_string(p));
        std::cout << save_instance(random_instance(PrimeField(static_cast<std::uint32_t>(p)), g));
      }
      return 0;
    }
    AnyMatrix A = load(instance, field);
    return std::visit(
        [&](const auto& M) {
          if (*solve) return solve_cmd(M, verify, trace_requested(trace), of);
          if (*check) return check_cmd(M, edges_path);
          print(oracle_report(M, of));
          return 0;
        },
        A);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariantError;
  }
}
