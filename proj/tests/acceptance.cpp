// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-golab-binary]

#include "golab/cli.hpp"
#include "oracle.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

using namespace golab;
using Q = Rational;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::pair<std::size_t, std::size_t>> kSpaces{{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 2}, {5, 3}};

std::string nk(std::size_t n, std::size_t k) { return "(" + std::to_string(n) + "," + std::to_string(k) + ")"; }

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

Outcome exact_algebra_suite() {
  Outcome o;
  auto t0 = Clock::now();
  for (std::size_t n = 2; n <= 5; ++n) {
    auto rep = validate_algebra(build_un<Q>(n));
    for (const char* c : {"closure", "antisymmetry", "jacobi", "inner_product", "basis_orthogonal", "ad_invariance"}) {
      auto* p = rep.find(c);
      if (!p || !p->passed) fail(o, "u(" + std::to_string(n) + ") " + c);
    }
  }
  double s = seconds_since(t0);
  if (s >= 30) fail(o, "took " + std::to_string(s) + " s");
  if (o.pass) o.detail = "u(2)..u(5), 6 properties each";
  return o;
}

Outcome bracket_oracle_u5() {
  Outcome o;
  auto g = build_un<Q>(5);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < g.dim(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j) {
      auto table = g.bracket(g.unit(i), g.unit(j));
      // Real-embedding commutator, expanded back into the basis.
      auto direct = g.coords_of(MatrixLieAlgebra<Q>::commutator(g.basis_matrix(i), g.basis_matrix(j)));
      // Complex commutator from the defining formulas.
      auto c = oracle::commutator(oracle::element(5, g.label(i)), oracle::element(5, g.label(j)));
      Vector<Q> want(g.dim());
      for (std::size_t p = 0; p < g.dim(); ++p) want[p] = oracle::coefficient(c, g.label(p));
      if (!direct || *direct != table || want != table) fail(o, "[" + g.label(i) + ", " + g.label(j) + "]");
      ++pairs;
    }
  if (o.pass) o.detail = std::to_string(pairs) + " basis pairs";
  return o;
}

Outcome decomposition_dims() {
  Outcome o;
  for (auto [n, k] : kSpaces) {
    auto g = std::make_shared<const MatrixLieAlgebra<Q>>(build_un<Q>(n));
    IsotropyAction<Q> action(reductive_split(diagonal_u_nk(g, k)));
    auto dec = decompose_isotypic(action);
    if (dec.s0.dim() != k * k) fail(o, nk(n, k) + " dim S0");
    auto mods = dec.nontrivial_modules();
    if (mods.size() != k || dec.summands.size() != 2) fail(o, nk(n, k) + " module count");
    for (const auto* m : mods)
      if (m->space.dim() != 2 * (n - k)) fail(o, nk(n, k) + " module dim");
    for (std::size_t a = 0; a < mods.size(); ++a) {
      for (std::size_t b = 0; b < mods.size(); ++b)
        if (a != b && intertwiners(action, mods[a]->space, mods[b]->space).empty())
          fail(o, nk(n, k) + " modules not equivalent");
      for (const auto& v : dec.s0.basis()) {
        Subspace<Q> line({v}, action.weights());
        if (!intertwiners(action, mods[a]->space, line).empty() || !intertwiners(action, line, mods[a]->space).empty())
          fail(o, nk(n, k) + " module equivalent to a trivial line");
      }
    }
  }
  if (o.pass) o.detail = "6 spaces: dim S0 = k^2, k equivalent modules of dim 2(n-k)";
  return o;
}

Outcome family_verification() {
  Outcome o;
  std::ostringstream times;
  for (auto [n, k] : kSpaces) {
    auto t0 = Clock::now();
    auto sp = build_stiefel<Q>(n, k);
    auto fv = verify_family(sp, {from_ratio<Q>(1, 2), Q(1), Q(2), Q(3)}, 100, 1);
    if (!fv.all_verified()) fail(o, nk(n, k) + " not verified");
    for (const auto& c : fv.certificates) {
      if (c.certificate.random_count != 100) fail(o, nk(n, k) + " sample count");
      for (const auto& w : c.certificate.witnesses)
        if (!w.residual2.is_zero()) fail(o, nk(n, k) + " nonzero residual at t=" + to_string(c.t));
    }
    double s = seconds_since(t0);
    if (s >= 120) fail(o, nk(n, k) + " took " + std::to_string(s) + " s");
    times << nk(n, k) << " " << std::fixed << std::setprecision(1) << s << "s ";
  }
  if (o.pass) o.detail = "t in {1/2,1,2,3}, 100 random X: " + times.str();
  return o;
}

bool has_witness(const ReductionTrace<Q>& tr, const char* rule, const std::function<bool(const BracketWitness<Q>&)>& f) {
  for (const auto* s : tr.by_rule(rule))
    for (const auto& w : s->witnesses)
      if (f(w)) return true;
  return false;
}

Outcome reduction_structure() {
  Outcome o;
  for (auto [n, k] : kSpaces) {
    if (k < 2) continue;
    auto sp = build_stiefel<Q>(n, k);
    auto red = reduce_family(sp.action, sp.dec, sp.ideals, 1);
    if (red.family.size() != 2) fail(o, nk(n, k) + " family size " + std::to_string(red.family.size()));
    auto pz = center_projector(sp);
    Matrix<Q> rest = Matrix<Q>::identity(sp.dim_m());
    rest -= pz;
    if (!coordinates_in(red.family, pz) || !coordinates_in(red.family, rest)) fail(o, nk(n, k) + " family != span{P_z, Id - P_z}");
    const auto& g = *sp.g;
    auto e = [&](std::size_t i, std::size_t j) { return g.unit(sp.index.e(i, j)); };
    auto eb = [&](std::size_t i, std::size_t j) { return g.unit(sp.index.eb(i, j)); };
    if (red.trace.by_rule(kRuleNormalizer).empty()) fail(o, nk(n, k) + " no normalizer step");
    if (!has_witness(red.trace, kRuleDiagonal, [&](const auto& w) {
          for (std::size_t i = 0; i < k; ++i)
            if (w.x == eb(i, i)) return true;
          return false;
        }))
      fail(o, nk(n, k) + " no eb_ii diagonalization witness");
    // [e_{i,k+1}, e_{j,k+1}] = -e_ij (0-based column k).
    if (!has_witness(red.trace, kRuleMerge, [&](const auto& w) {
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
              if (w.x == e(i, k) && w.y == e(j, k) && w.bracket == scaled(Q(-1), e(i, j))) return true;
          return false;
        }))
      fail(o, nk(n, k) + " no [e_{i,k+1}, e_{j,k+1}] witness");
    if (!has_witness(red.trace, kRuleMerge, [&](const auto& w) {
          return w.x == e(0, 1) && w.y == e(0, k) && w.bracket == scaled(Q(-1), e(1, k));
        }))
      fail(o, nk(n, k) + " no [e_12, e_{1,k+1}] witness");
    for (const auto& s : red.trace.steps)
      for (const auto& w : s.witnesses)
        if (g.bracket(w.x, w.y) != w.bracket) fail(o, nk(n, k) + " stale witness");
  }
  return o;
}

Outcome uniqueness_scans(std::size_t jobs) {
  Outcome o;
  std::ostringstream d;
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {4, 2}}) {
    auto sp = build_stiefel<Q>(n, k);
    auto rep = uniqueness_scan(sp, from_ratio<Q>(1, 4), Q(4), 1, jobs);
    const auto& s = rep.summary;
    if (!rep.consistent()) fail(o, nk(n, k) + " inconsistent");
    if (s.survivors_outside_family != 0) fail(o, nk(n, k) + " survivor off the A_t cone");
    if (s.family_points == 0 || s.family_points_passed != s.family_points) fail(o, nk(n, k) + " an A_t point failed");
    if (s.falsified_with_positive_residual != s.falsified) fail(o, nk(n, k) + " falsifier without positive residual");
    d << nk(n, k) << ": " << s.points << " points, " << s.positive_definite << " pd, " << s.survivors
      << " pass (all on A_t), " << s.falsified << " falsified; ";
  }
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome bracket_in_m(std::uint64_t seed) {
  Outcome o;
  std::mt19937_64 rng(seed);
  std::size_t count = 0;
  for (std::size_t round = 0; count < 1000; ++round) {
    auto [n, k] = kSpaces[round % kSpaces.size()];
    auto sp = build_stiefel<Q>(n, k);
    auto fam = full_family(sp.action);
    const auto& split = sp.split();
    for (int s = 0; s < 50 && count < 1000; ++s, ++count) {
      Vector<Q> p(fam.size()), x(sp.dim_m());
      for (auto& c : p) c = random_small_rational<Q>(rng);
      for (auto& c : x) c = random_small_rational<Q>(rng);
      auto a = fam.at(p);
      auto br = sp.g->bracket(split.from_m(x), split.from_m(a * x));
      if (!is_zero_vector(split.project(br, Part::H))) fail(o, nk(n, k) + " [X, AX] has an h-component");
    }
  }
  if (o.pass) o.detail = "1000 random (A, X) pairs";
  return o;
}

Outcome normalizer_consistency() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::size_t metrics = 0, go_like = 0, non_equivariant = 0;
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 3}}) {
    auto sp = build_stiefel<Q>(n, k);
    auto fam = full_family(sp.action);
    std::vector<Matrix<Q>> cands;
    for (Q t : {from_ratio<Q>(1, 3), Q(2)}) cands.push_back(family_metric(sp, t));
    cands.push_back(block_metric(sp, Q(1), Q(2), Q(3)));
    cands.push_back(block_metric(sp, Q(2), Q(1), Q(1)));
    for (int s = 0; s < 12; ++s) {
      Vector<Q> p(fam.size());
      for (auto& c : p) c = random_small_rational<Q>(rng);
      auto a = fam.at(p);
      // Shift into the positive cone.
      for (int shift = 0; shift < 64 && !make_metric(sp.action, a).positive_definite; ++shift)
        a += Matrix<Q>::identity(sp.dim_m());
      cands.push_back(a);
    }
    for (const auto& a : cands) {
      auto m = make_metric(sp.action, a);
      if (!m.valid()) continue;
      ++metrics;
      GoStrategy<Q> st;
      st.random_count = 8;
      auto cert = go_check(sp.action, a, st);
      bool eq = check_normalizer_equivariance(sp.action, a, sp.s0());
      if (cert.passed()) {
        ++go_like;
        if (!eq) fail(o, nk(n, k) + " GO-passing metric is not normalizer equivariant");
      }
      if (!eq) {
        ++non_equivariant;
        if (cert.verdict != Verdict::Falsified) fail(o, nk(n, k) + " non-equivariant metric was not falsified");
      }
    }
  }
  if (o.pass)
    o.detail = std::to_string(metrics) + " metrics, " + std::to_string(go_like) + " passing, " +
               std::to_string(non_equivariant) + " not normalizer equivariant";
  return o;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& binary) {
  Outcome o;
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "golab_acceptance";
  fs::create_directories(dir);
  auto p1 = (dir / "jobs1.json").string(), p8 = (dir / "jobs8.json").string();
  for (const auto& [jobs, path] : std::vector<std::pair<std::string, std::string>>{{"1", p1}, {"8", p8}}) {
    int code = 0;
    if (!binary.empty()) {
      std::string cmd = "\"" + binary + "\" --seed 1 --jobs " + jobs + " --out \"" + path + "\" reproduce-theorem 4 2";
      code = std::system(cmd.c_str());
      code = WIFEXITED(code) ? WEXITSTATUS(code) : -1;
    } else {
      std::vector<std::string> args{"golab", "--seed", "1", "--jobs", jobs, "--out", path, "reproduce-theorem", "4", "2"};
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    if (code != 0) fail(o, "reproduce-theorem 4 2 --jobs " + jobs + " exited with " + std::to_string(code));
  }
  auto a = slurp(p1), b = slurp(p8);
  if (a.empty() || a != b) fail(o, "reports differ");
  if (o.pass) o.detail = std::to_string(a.size()) + " bytes, identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string binary = argc > 1 ? argv[1] : "";
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all{
      {"1 exact algebra suite", exact_algebra_suite},
      {"2 structure table equals commutators on u(5)", bracket_oracle_u5},
      {"3 Stiefel decomposition dimensions", decomposition_dims},
      {"4 A_t verified with exact zero residuals", family_verification},
      {"5 uniqueness half: rule trace and grid scans",
       [] {
         auto a = reduction_structure(), b = uniqueness_scans(2);
         if (!a.pass) return Outcome{false, "(a) " + a.detail};
         if (!b.pass) return Outcome{false, "(b) " + b.detail};
         return Outcome{true, "(a) 2-parameter family with cited witnesses; (b) " + b.detail};
       }},
      {"6 [X, AX] lies in m", [] { return bracket_in_m(1); }},
      {"7 normalizer consistency", normalizer_consistency},
      {"8 reproduce-theorem 4 2 identical at --jobs 1 and 8", [&] { return determinism(binary); }},
  };
  bool ok = true;
  for (const auto& c : all) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " (" << std::fixed << std::setprecision(1)
              << seconds_since(t0) << " s)" << (o.detail.empty() ? "" : ": " + o.detail) << std::endl;
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
