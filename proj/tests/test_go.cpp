#include "catch2/catch_amalgamated.hpp"

#include "golab/go.hpp"
#include "oracle.hpp"

#include <random>

using namespace golab;
using Q = Rational;

namespace {

template <class T>
struct Space {
  AlgebraPtr<T> g;
  IsotropyAction<T> action;
  IsotypicalDecomposition<T> dec;
  IdealSplit<T> ideals;

  Vector<T> el(const std::string& label) const { return g->unit(g->index_of(label)); }
  Vector<T> m(const std::string& label) const { return action.split().m_coords(el(label)); }
};

template <class T = Q>
Space<T> make_space(std::size_t n, std::size_t k) {
  auto g = std::make_shared<const MatrixLieAlgebra<T>>(build_un<T>(n));
  IsotropyAction<T> action(reductive_split(diagonal_u_nk(g, k)));
  auto dec = decompose_isotypic(action);
  auto ideals = split_ideals(action, dec.s0);
  return {g, std::move(action), std::move(dec), std::move(ideals)};
}

template <class T>
Matrix<T> line_projector(const Vector<T>& v, const Vector<T>& w) {
  T nn(0);
  for (std::size_t i = 0; i < v.size(); ++i) nn += w[i] * v[i] * v[i];
  Matrix<T> p(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) p(i, j) = v[i] * w[j] * v[j] / nn;
  return p;
}

template <class T>
Matrix<T> a_t(const Space<T>& sp, std::size_t k, const T& t) {
  Vector<T> z(sp.action.dim_m());
  for (std::size_t i = 1; i <= k; ++i) z = z + sp.m("eb_" + std::to_string(i) + "_" + std::to_string(i));
  auto a = Matrix<T>::identity(sp.action.dim_m());
  a += T(t - T(1)) * line_projector(z, sp.action.weights());
  return a;
}

// 1 on S0, lambda_tilde on S1.
template <class T>
Matrix<T> split_weights(const Space<T>& sp, const T& lt) {
  auto a = Matrix<T>::identity(sp.action.dim_m());
  a += T(lt - T(1)) * sp.dec.summands[1].span.projector();
  return a;
}

oracle::CMat as_matrix(std::size_t n, const std::vector<std::pair<std::string, Q>>& terms) {
  oracle::CMat m(n);
  for (const auto& [l, c] : terms) {
    auto e = oracle::element(n, l);
    for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = m.a[i] + oracle::C{c, 0} * e.a[i];
  }
  return m;
}

bool is_zero_cmat(const oracle::CMat& m) {
  for (const auto& c : m.a)
    if (c.re != 0 || c.im != 0) return false;
  return true;
}

Vector<Q> random_vector(std::size_t d, std::mt19937_64& rng) {
  Vector<Q> x(d);
  for (auto& c : x) c = random_small_rational<Q>(rng);
  return x;
}

}  // namespace

TEST_CASE("closed-form witness on U(3)/U(2) at t = 2") {
  auto sp = make_space(3, 1);
  auto A = a_t(sp, 1, Q(2));
  auto x = sp.m("eb_1_1") + sp.m("e_1_2");
  auto wit = scaled(Q(-1), sp.el("eb_2_2") + sp.el("eb_3_3"));
  auto r = go_evaluate(sp.action, A, x, wit);
  CHECK(is_zero_vector(r.residual));
  CHECK(r.residual2 == 0);
  // Independent check with complex matrices: AX = 2 eb_11 + e_12.
  auto lhs = as_matrix(3, {{"eb_2_2", Q(-1)}, {"eb_3_3", Q(-1)}, {"eb_1_1", Q(1)}, {"e_1_2", Q(1)}});
  auto ax = as_matrix(3, {{"eb_1_1", Q(2)}, {"e_1_2", Q(1)}});
  CHECK(is_zero_cmat(oracle::commutator(lhs, ax)));
  CHECK(sp.action.split().from_m(A * x) == scaled(Q(2), sp.el("eb_1_1")) + sp.el("e_1_2"));
  // The least-squares solver reaches zero as well.
  CHECK(go_solve_at(sp.action, A, x).residual2 == 0);
}

TEST_CASE("normal metric needs no witness") {
  auto sp = make_space(4, 2);
  std::mt19937_64 rng(1);
  auto id = Matrix<Q>::identity(sp.action.dim_m());
  for (int s = 0; s < 10; ++s) {
    auto r = go_solve_at(sp.action, id, random_vector(sp.action.dim_m(), rng));
    CHECK(r.residual2 == 0);
    CHECK(is_zero_vector(r.a));
  }
}

TEST_CASE("lambda != lambda_tilde on U(3)/U(1) is not GO at e_12 + e_13") {
  auto sp = make_space(3, 2);
  auto A = split_weights(sp, Q(2));
  auto x = sp.m("e_1_2") + sp.m("e_1_3");
  auto r = go_solve_at(sp.action, A, x);
  CHECK(r.residual2 > 0);
  const auto& split = sp.action.split();
  auto xg = split.from_m(x), axg = split.from_m(A * x);
  CHECK(axg == sp.el("e_1_2") + scaled(Q(2), sp.el("e_1_3")));
  auto c = sp.g->bracket(xg, axg);
  CHECK(c == scaled(Q(-1), sp.el("e_2_3")));
  auto oc = oracle::commutator(as_matrix(3, {{"e_1_2", Q(1)}, {"e_1_3", Q(1)}}),
                               as_matrix(3, {{"e_1_2", Q(1)}, {"e_1_3", Q(2)}}));
  CHECK(oracle::coefficient(oc, "e_2_3") == -1);
  for (const auto& a : split.h().basis()) CHECK(sp.g->inner(sp.g->bracket(a, axg), sp.el("e_2_3")) == 0);
  // Best residual is [X, AX] itself, since [h, AX] is orthogonal to it.
  CHECK(r.residual2 == sp.g->inner(c, c));
  CHECK_THROWS_AS(go_solve_at_element(sp.action, A, sp.el("eb_3_3")), Error);
}

TEST_CASE("go_check verdicts") {
  auto sp = make_space(3, 2);
  const std::size_t d = sp.action.dim_m();
  SECTION("identity on the basis") {
    GoStrategy<Q> st;
    auto cert = go_check(sp.action, Matrix<Q>::identity(d), st);
    CHECK(cert.verdict == Verdict::PassedSampling);
    CHECK(cert.tested == d + d * (d - 1) / 2);
    for (const auto& w : cert.witnesses) CHECK(is_zero_vector(w.a));
  }
  SECTION("non-GO metric") {
    GoStrategy<Q> st;
    auto A = split_weights(sp, Q(2));
    auto cert = go_check(sp.action, A, st);
    REQUIRE(cert.verdict == Verdict::Falsified);
    REQUIRE(cert.falsifier.has_value());
    CHECK(cert.falsifier->residual2 > 0);
    CHECK(go_solve_at(sp.action, A, cert.falsifier->x).residual2 == cert.falsifier->residual2);
  }
  SECTION("A_t with its closed-form witness map") {
    for (Q t : {from_ratio<Q>(1, 2), Q(3)}) {
      GoStrategy<Q> st;
      st.random_count = 20;
      Matrix<Q> w(sp.g->dim(), d);
      // a_t = r (1 - t) eb_33 with r = B(X, z0) / B(z0, z0), z0 = eb_11 + eb_22.
      auto z0 = sp.m("eb_1_1") + sp.m("eb_2_2");
      Q zz = sp.action.split().inner_m(z0, z0);
      auto eb33 = sp.el("eb_3_3");
      for (std::size_t j = 0; j < d; ++j) {
        Q r = sp.action.split().inner_m(unit_vector<Q>(d, j), z0) / zz;
        for (std::size_t i = 0; i < sp.g->dim(); ++i) w(i, j) = r * (Q(1) - t) * eb33[i];
      }
      st.witness_map = w;
      auto cert = go_check(sp.action, a_t(sp, 2, t), st);
      CHECK(cert.verdict == Verdict::VerifiedOnFamily);
      CHECK(cert.polarization_complete);
      for (const auto& wt : cert.witnesses) {
        CHECK(wt.residual2 == 0);
        CHECK(wt.from_map);
      }
    }
  }
  SECTION("a wrong witness map does not verify") {
    GoStrategy<Q> st;
    st.witness_map = Matrix<Q>(sp.g->dim(), d);
    auto cert = go_check(sp.action, a_t(sp, 2, Q(2)), st);
    CHECK(cert.verdict != Verdict::VerifiedOnFamily);
  }
}

TEST_CASE("go_check is independent of the worker count") {
  auto sp = make_space(4, 2);
  auto A = split_weights(sp, from_ratio<Q>(3, 2));
  GoStrategy<Q> st;
  st.random_count = 40;
  st.seed = 9;
  auto one = go_check(sp.action, A, st);
  st.jobs = 4;
  auto four = go_check(sp.action, A, st);
  REQUIRE(one.falsifier.has_value());
  REQUIRE(four.falsifier.has_value());
  CHECK(one.falsifier->x == four.falsifier->x);
  CHECK(one.tested == four.tested);
}

TEST_CASE("[X, AX] has no h-component") {
  std::mt19937_64 rng(41);
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 1}, {3, 2}, {4, 2}}) {
    auto sp = make_space(n, k);
    auto fam = full_family(sp.action);
    for (int s = 0; s < 20; ++s) {
      auto A = fam.at(random_vector(fam.size(), rng));
      auto x = random_vector(sp.action.dim_m(), rng);
      auto r = go_solve_at(sp.action, A, x);
      CHECK(r.bracket_in_m);
      const auto& split = sp.action.split();
      CHECK(is_zero_vector(split.project(sp.g->bracket(split.from_m(x), split.from_m(A * x)), Part::H)));
    }
  }
}

TEST_CASE("residual is homogeneous of degree two") {
  std::mt19937_64 rng(43);
  auto sp = make_space(4, 2);
  auto fam = full_family(sp.action);
  for (int s = 0; s < 10; ++s) {
    auto A = fam.at(random_vector(fam.size(), rng));
    auto x = random_vector(sp.action.dim_m(), rng);
    auto base = go_solve_at(sp.action, A, x);
    for (Q c : {Q(2), Q(-1)}) {
      auto r = go_evaluate(sp.action, A, scaled(c, x), scaled(c, base.a));
      CHECK(r.residual == scaled(Q(c * c), base.residual));
      CHECK(r.residual2 == c * c * c * c * base.residual2);
    }
  }
}

// The coordinate modules m_i = span{e_ij, eb_ij : j > k}.
template <class T>
IsotypicalDecomposition<T> with_coordinate_modules(const Space<T>& sp, std::size_t n, std::size_t k) {
  std::vector<Subspace<T>> mods;
  for (std::size_t i = 1; i <= k; ++i) {
    std::vector<Vector<T>> vs;
    for (std::size_t j = k + 1; j <= n; ++j) {
      vs.push_back(sp.m("e_" + std::to_string(i) + "_" + std::to_string(j)));
      vs.push_back(sp.m("eb_" + std::to_string(i) + "_" + std::to_string(j)));
    }
    mods.push_back(Subspace<T>::span_of(vs, sp.action.weights()));
  }
  return with_members(sp.action, sp.dec, 1, mods);
}

TEST_CASE("reduced families of Stiefel spaces") {
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 3}}) {
    INFO("n=" << n << " k=" << k);
    auto sp = make_space(n, k);
    auto dec = with_coordinate_modules(sp, n, k);
    auto red = reduce_family(sp.action, dec, sp.ideals);
    CHECK(red.family.size() == 2);
    for (Q t : {from_ratio<Q>(1, 3), Q(1), Q(7)}) CHECK(coordinates_in(red.family, a_t(sp, k, t)).has_value());
    // For k = 1 the weights on S0 and S1 are independent (Berger type).
    CHECK(coordinates_in(red.family, split_weights(sp, Q(2))).has_value() == (k == 1));
    // Every cited bracket is recomputed.
    for (const auto& step : red.trace.steps)
      for (const auto& w : step.witnesses) CHECK(sp.g->bracket(w.x, w.y) == w.bracket);
  }
}

TEST_CASE("reduction keeps A_t for any choice of irreducible members") {
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {4, 2}, {5, 3}}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto sp = make_space(n, k);
      auto dec = decompose_isotypic(sp.action, seed);
      auto red = reduce_family(sp.action, dec, sp.ideals, seed);
      CHECK(red.family.size() >= 2);
      for (Q t : {from_ratio<Q>(1, 2), Q(3)}) CHECK(coordinates_in(red.family, a_t(sp, k, t)).has_value());
    }
  }
}

TEST_CASE("an isotropy irreducible toy reduces to scalars") {
  // su(2) with h = span{eb_11 - eb_22}: m = span{e_12, eb_12} is irreducible.
  auto u2 = build_un<Q>(2);
  auto mat = [&](const std::string& l) { return u2.basis_matrix(u2.index_of(l)); };
  auto diff = mat("eb_1_1");
  diff -= mat("eb_2_2");
  auto g = std::make_shared<const MatrixLieAlgebra<Q>>(MatrixLieAlgebra<Q>::from_matrices(
      2, {"h", "x", "y"}, {diff, mat("e_1_2"), mat("eb_1_2")}, u2.trace_scale()));
  IsotropyAction<Q> action(reductive_split(Subalgebra<Q>(g, {g->unit(0)})));
  auto dec = decompose_isotypic(action);
  CHECK(dec.s0.dim() == 0);
  auto ideals = split_ideals(action, dec.s0);
  auto red = reduce_family(action, dec, ideals);
  REQUIRE(red.family.size() == 1);
  CHECK(scalar_on(red.family.generators[0], Subspace<Q>::whole(action.weights())).has_value());
}

TEST_CASE("search_go over small families") {
  auto sp = make_space(3, 2);
  MetricFamily<Q> ident{{"c"}, {Matrix<Q>::identity(sp.action.dim_m())}};
  GoStrategy<Q> st;
  auto res = search_go(sp.action, ident, {Vector<Q>{Q(1)}, Vector<Q>{Q(-1)}}, st);
  CHECK(res.pd_count == 1);
  CHECK(res.survivors == 1);

  MetricFamily<Q> bad{{"s0", "s1"}, {sp.dec.s0.projector(), sp.dec.summands[1].span.projector()}};
  std::vector<Vector<Q>> pts;
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      if (a != b) pts.push_back({Q(a), Q(b)});
  auto r1 = search_go(sp.action, bad, pts, st, 1);
  CHECK(r1.pd_count == pts.size());
  CHECK(r1.falsified == pts.size());
  auto r3 = search_go(sp.action, bad, pts, st, 3);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(r1.candidates[i].certificate->falsifier->x == r3.candidates[i].certificate->falsifier->x);
  auto empty = search_go(sp.action, ident, {Vector<Q>{Q(-2)}}, st);
  CHECK(empty.pd_count == 0);
  CHECK_FALSE(empty.note.empty());
}

TEST_CASE("float backend samples but never verifies") {
  auto sp = make_space<double>(3, 2);
  const std::size_t d = sp.action.dim_m();
  GoStrategy<double> st;
  st.random_count = 10;
  Matrix<double> w(sp.g->dim(), d);
  auto z0 = sp.m("eb_1_1") + sp.m("eb_2_2");
  double zz = sp.action.split().inner_m(z0, z0);
  auto eb33 = sp.el("eb_3_3");
  for (std::size_t j = 0; j < d; ++j) {
    double r = sp.action.split().inner_m(unit_vector<double>(d, j), z0) / zz;
    for (std::size_t i = 0; i < sp.g->dim(); ++i) w(i, j) = r * (1.0 - 2.0) * eb33[i];
  }
  st.witness_map = w;
  auto good = go_check(sp.action, a_t(sp, 2, 2.0), st);
  CHECK(good.verdict == Verdict::PassedSampling);
  auto bad = go_check(sp.action, split_weights(sp, 2.0), GoStrategy<double>{});
  CHECK(bad.verdict == Verdict::Falsified);
}
