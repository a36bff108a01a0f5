// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "partrank/generate.hpp"
#include "partrank/report.hpp"

using namespace partrank;

namespace {

// Pinned parameters.
constexpr int kSeeds = 200;
constexpr int kMaxDim = 6;
constexpr double kDensity = 0.5;
constexpr double kRank1Fractions[] = {0.0, 0.5, 1.0};
constexpr std::uint32_t kSmallPrime = 101;
constexpr int kMcTrials = 5;
constexpr std::uint64_t kMcPrime = 2147483647;
constexpr double kOracleBudgetSeconds = 60;
constexpr double kBruteBudgetSeconds = 120;
constexpr int kGf2Instances = 50;
constexpr int kGf2MaxDim = 4;
constexpr long kBitBound = 1000000;
constexpr double kScaleBudgetSeconds = 10;
constexpr double kMaxSlope = 6;

struct Tally {
  long cases = 0;
  long failures = 0;
  std::string first;

  void record(bool ok, const std::string& what) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first = what;
  }
  bool ok() const { return failures == 0; }
};

struct Criteria {
  Tally oracle, brute, triple, gf2, kernel, progress, bits, scaling;
  double oracle_seconds = 0, brute_seconds = 0;
  long progress_theta = 0, progress_r = 0, progress_count = 0;
  int worst_augments = 0;
  std::string worst_case;
};

std::uint64_t suite_seed(int seed, int mu, int nu, int field, int r1) {
  return ((((static_cast<std::uint64_t>(seed) * 7 + mu) * 7 + nu) * 2 + field) * 3 + r1) * 1000003 + 17;
}

bool bits_ok(const mpq_class& x) {
  static const mpz_class bound(kBitBound);
  return abs(x.get_num()) < bound && x.get_den() < bound;
}
bool bits_ok(const Zp&) { return true; }

template <class Field>
void run_instance(Criteria& c, const PartitionedMatrix<Field>& A, const std::string& name, bool check_bits) {
  using E = typename Field::Element;
  long big = 0;
  SolveOptions<Field> opt;
  opt.check = true;
  if (check_bits)
    opt.observe = [&](const Subspace<E>& s) {
      if (s.is_line() && !(bits_ok(s.rep().x) && bits_ok(s.rep().y))) ++big;
    };
  SolveResult<Field> res;
  try {
    auto t0 = std::chrono::steady_clock::now();
    res = solve(A, opt);
    c.oracle_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } catch (const std::exception& e) {
    std::string what = name + ": " + e.what();
    c.oracle.record(false, what);
    c.triple.record(false, what);
    c.kernel.record(false, what);
    c.progress.record(false, what);
    if (check_bits) c.bits.record(false, what);
    return;
  }
  auto t0 = std::chrono::steady_clock::now();
  int mc = monte_carlo_rank(A, kMcTrials, kMcPrime, 1).rank;
  c.oracle_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.oracle.record(res.rank == mc,
                  name + ": solve " + std::to_string(res.rank) + " Monte Carlo " + std::to_string(mc));

  if (A.mu() <= 3 && A.nu() <= 3) {
    auto t1 = std::chrono::steady_clock::now();
    int br = brute_force_max_matching(A).second;
    c.brute_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    c.brute.record(res.rank == br, name + ": solve " + std::to_string(res.rank) + " enumeration " + std::to_string(br));
  }

  auto w = verify_witness(res.witness, A, res.rank);
  int dense = dense_rank(res.completion);
  auto v = check_matching(A, res.matching.edges);
  std::string why = !w.ok ? w.detail
                    : dense != res.rank ? "completion rank " + std::to_string(dense)
                    : !v.ok()           ? std::string("matching violates ") + to_string(v.condition)
                                        : "";
  c.triple.record(why.empty(), name + ": " + why);

  auto k = check_kernel_formula(A, res.matching.edges);
  c.kernel.record(k.ok, name + ": " + k.detail);

  int bound = std::min(A.mu(), A.nu());
  int r_violations = 0;
  for (std::size_t i = 1; i < res.stats.r_trace.size(); ++i)
    if (res.stats.r_trace[i] < res.stats.r_trace[i - 1] + 1) ++r_violations;
  int theta_violations = 0;
  for (const auto& round : res.stats.rounds) theta_violations += static_cast<int>(round.violations.size());
  bool count_ok = res.stats.augmentations <= bound;
  c.progress_theta += theta_violations;
  c.progress_r += r_violations;
  if (!count_ok) ++c.progress_count;
  if (!count_ok && res.stats.augmentations - bound > c.worst_augments) {
    c.worst_augments = res.stats.augmentations - bound;
    c.worst_case = name + ": " + std::to_string(res.stats.augmentations) + " augmentations, min{mu,nu} = " +
                   std::to_string(bound) + ", rank " + std::to_string(res.rank);
  }
  c.progress.record(theta_violations == 0 && r_violations == 0 && count_ok, name);

  if (check_bits) c.bits.record(big == 0, name + ": " + std::to_string(big) + " oversized representatives");
}

template <class Field>
double timed_solve(const PartitionedMatrix<Field>& A, int& rank) {
  SolveOptions<Field> opt;
  auto t0 = std::chrono::steady_clock::now();
  rank = solve(A, opt).rank;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void line(int n, const char* title, bool ok, const std::string& detail) {
  std::printf("criterion %d %-28s %s  %s\n", n, title, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string counts(const Tally& t) {
  return std::to_string(t.cases - t.failures) + "/" + std::to_string(t.cases) + " ok" +
         (t.failures ? "; first failure " + t.first : "");
}

}  // namespace

int main() {
  Criteria c;
  for (int fi = 0; fi < 2; ++fi)
    for (int ri = 0; ri < 3; ++ri)
      for (int mu = 1; mu <= kMaxDim; ++mu)
        for (int nu = 1; nu <= kMaxDim; ++nu)
          for (int seed = 0; seed < kSeeds; ++seed) {
            GenParams g{mu, nu, kDensity, kRank1Fractions[ri], suite_seed(seed, mu, nu, fi, ri)};
            std::string name = std::string(fi == 0 ? "Q" : "GF(101)") + " mu=" + std::to_string(mu) +
                               " nu=" + std::to_string(nu) + " r1=" + std::to_string(kRank1Fractions[ri]).substr(0, 3) +
                               " seed=" + std::to_string(g.seed);
            if (fi == 0)
              run_instance(c, random_instance(RationalField{}, g), name, mu == 6 && nu == 6);
            else
              run_instance(c, random_instance(PrimeField(kSmallPrime), g), name, false);
          }

  for (int i = 0; i < kGf2Instances; ++i) {
    GenParams g{1 + i % kGf2MaxDim, 1 + (i / kGf2MaxDim) % kGf2MaxDim, 0.7, (i % 3) / 2.0,
                static_cast<std::uint64_t>(9000 + i)};
    auto A = random_instance(PrimeField(2), g);
    std::string name = "GF(2) mu=" + std::to_string(g.mu) + " nu=" + std::to_string(g.nu) + " seed=" +
                       std::to_string(g.seed);
    try {
      auto res = solve(A);
      int dense = dense_rank(canonical_substitution(A, res.matching.edges));
      c.gf2.record(dense == res.rank,
                   name + ": completion rank " + std::to_string(dense) + " solve " + std::to_string(res.rank));
    } catch (const std::exception& e) {
      c.gf2.record(false, name + ": " + e.what());
    }
  }

  std::vector<double> sizes, times;
  bool scale_ok = true;
  std::string scale_detail;
  for (int n : {10, 20, 40}) {
    auto A = random_instance(PrimeField(kSmallPrime), GenParams{n, n, 1.0, 0.0, static_cast<std::uint64_t>(n)});
    int rank = 0;
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) best = std::min(best, timed_solve(A, rank));
    sizes.push_back(n);
    times.push_back(std::max(best, 1e-6));
    scale_detail += "n=" + std::to_string(n) + " " + std::to_string(best) + "s rank " + std::to_string(rank) + "; ";
    if (n == 40 && best >= kScaleBudgetSeconds) scale_ok = false;
  }
  double slope = std::log(times[2] / times[0]) / std::log(sizes[2] / sizes[0]);
  scale_detail += "slope " + std::to_string(slope);
  if (!(slope < kMaxSlope)) scale_ok = false;
  c.scaling.record(scale_ok, scale_detail);

  bool oracle_ok = c.oracle.ok() && c.oracle_seconds < kOracleBudgetSeconds;
  bool brute_ok = c.brute.ok() && c.brute_seconds < kBruteBudgetSeconds;
  line(1, "oracle equivalence", oracle_ok,
       counts(c.oracle) + "; " + std::to_string(c.oracle_seconds) + "s");
  line(2, "brute-force equivalence", brute_ok, counts(c.brute) + "; " + std::to_string(c.brute_seconds) + "s");
  line(3, "triple certificate", c.triple.ok(), counts(c.triple));
  line(4, "GF(2) completion", c.gf2.ok(), counts(c.gf2));
  line(5, "kernel formula", c.kernel.ok(), counts(c.kernel));
  line(6, "progress invariants", c.progress.ok(),
       "theta violations " + std::to_string(c.progress_theta) + ", r violations " + std::to_string(c.progress_r) +
           ", solves over min{mu,nu} augmentations " + std::to_string(c.progress_count) + "/" +
           std::to_string(c.progress.cases) + (c.worst_case.empty() ? "" : "; worst " + c.worst_case));
  line(7, "bit size over Q", c.bits.ok(), counts(c.bits));
  line(8, "scaling", c.scaling.ok(), scale_detail);

  bool all = oracle_ok && brute_ok && c.triple.ok() && c.gf2.ok() && c.kernel.ok() && c.progress.ok() &&
             c.bits.ok() && c.scaling.ok();
  return all ? 0 : 1;
}
