#include "catch2/catch_amalgamated.hpp"

#include "golab/stiefel.hpp"
#include "oracle.hpp"

#include <random>

using namespace golab;
using Q = Rational;

namespace {

Vector<Q> el(const StiefelSpace<Q>& sp, const std::string& l) { return sp.g->unit(sp.g->index_of(l)); }

std::string lbl(const char* p, std::size_t i, std::size_t j) {
  return std::string(p) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

// Random element of S1 written in the e_ij, eb_ij coordinates (i <= k < j).
Vector<Q> random_s1(const StiefelSpace<Q>& sp, std::mt19937_64& rng) {
  Vector<Q> v(sp.g->dim());
  for (std::size_t i = 1; i <= sp.k; ++i)
    for (std::size_t j = sp.k + 1; j <= sp.n; ++j) {
      v = v + scaled(random_small_rational<Q>(rng), el(sp, lbl("e", i, j)));
      v = v + scaled(random_small_rational<Q>(rng), el(sp, lbl("eb", i, j)));
    }
  return v;
}

}  // namespace

TEST_CASE("Stiefel dimensions") {
  auto s31 = build_stiefel<Q>(3, 1);
  CHECK(s31.dim_m() == 5);
  CHECK(s31.s0().dim() == 1);
  REQUIRE(s31.modules.size() == 1);
  CHECK(s31.modules[0].dim() == 4);

  auto s42 = build_stiefel<Q>(4, 2);
  CHECK(s42.dim_m() == 12);
  CHECK(s42.s0().dim() == 4);
  REQUIRE(s42.modules.size() == 2);
  for (const auto& m : s42.modules) CHECK(m.dim() == 4);

  CHECK(build_stiefel<Q>(2, 1).dim_m() == 3);
  CHECK_THROWS_AS(build_stiefel<Q>(3, 3), Error);
  CHECK_THROWS_AS(build_stiefel<Q>(3, 0), Error);
}

TEST_CASE("coordinate modules are spanned by e_ij, eb_im with j, m > k") {
  auto sp = build_stiefel<Q>(5, 2);
  const auto& split = sp.split();
  for (std::size_t i = 1; i <= 2; ++i) {
    const auto& m = sp.modules[i - 1];
    CHECK(m.dim() == 6);
    for (std::size_t j = 3; j <= 5; ++j) {
      CHECK(m.contains(split.m_coords(el(sp, lbl("e", i, j)))));
      CHECK(m.contains(split.m_coords(el(sp, lbl("eb", i, j)))));
    }
  }
  CHECK(sp.s1.dim() == 12);
}

TEST_CASE("tilde map") {
  auto sp = build_stiefel<Q>(3, 1);
  CHECK(tilde_map(sp, el(sp, "e_1_3")) == scaled(Q(-1), el(sp, "eb_1_3")));
  CHECK(is_zero_vector(tilde_map(sp, Vector<Q>(sp.g->dim()))));
  CHECK_THROWS_AS(tilde_map(sp, el(sp, "eb_1_1")), Error);
  std::mt19937_64 rng(3);
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 1}, {4, 2}, {5, 3}}) {
    auto s = build_stiefel<Q>(n, k);
    for (int t = 0; t < 10; ++t) {
      auto x = random_s1(s, rng);
      auto tx = tilde_map(s, x);
      CHECK(tilde_map(s, tx) == scaled(Q(-1), x));
      // Coefficient oracle: (a, b) -> (b, -a) per pair.
      for (std::size_t i = 1; i <= k; ++i)
        for (std::size_t j = k + 1; j <= n; ++j) {
          auto e = s.g->index_of(lbl("e", i, j)), eb = s.g->index_of(lbl("eb", i, j));
          CHECK(tx[e] == x[eb]);
          CHECK(tx[eb] == -x[e]);
        }
    }
  }
}

TEST_CASE("[eb_ii, v] = 2 sum_j (a_ij eb_ij - b_ij e_ij) on S1") {
  std::mt19937_64 rng(5);
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 1}, {3, 2}, {4, 2}, {5, 3}}) {
    auto sp = build_stiefel<Q>(n, k);
    for (int t = 0; t < 10; ++t) {
      auto v = random_s1(sp, rng);
      CHECK(ebar_action_identity(sp, v));
      // Same identity through complex matrices.
      for (std::size_t i = 1; i <= k; ++i) {
        oracle::CMat vm(n);
        for (std::size_t p = 0; p < sp.g->dim(); ++p) {
          auto e = oracle::element(n, sp.g->label(p));
          for (std::size_t q = 0; q < vm.a.size(); ++q) vm.a[q] = vm.a[q] + oracle::C{v[p], 0} * e.a[q];
        }
        auto br = oracle::commutator(oracle::element(n, lbl("eb", i, i)), vm);
        for (std::size_t j = k + 1; j <= n; ++j) {
          CHECK(oracle::coefficient(br, lbl("eb", i, j)) == 2 * v[sp.g->index_of(lbl("e", i, j))]);
          CHECK(oracle::coefficient(br, lbl("e", i, j)) == -2 * v[sp.g->index_of(lbl("eb", i, j))]);
        }
      }
    }
  }
}

TEST_CASE("[e_{i,k+1}, e_{j,k+1}] = -e_ij") {
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{3, 2}, {4, 2}, {5, 3}, {6, 4}}) {
    auto sp = build_stiefel<Q>(n, k);
    CHECK(frame_bracket_identity(sp));
    for (std::size_t i = 1; i <= k; ++i)
      for (std::size_t j = i + 1; j <= k; ++j) {
        auto br = sp.g->bracket(el(sp, lbl("e", i, k + 1)), el(sp, lbl("e", j, k + 1)));
        CHECK(br == scaled(Q(-1), el(sp, lbl("e", i, j))));
        CHECK(sp.s0().contains(sp.split().m_coords(br)));
      }
  }
}

TEST_CASE("[h, S0] = 0 and [z(S0), S0] = 0") {
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 1}, {3, 2}, {4, 2}, {5, 3}}) {
    auto sp = build_stiefel<Q>(n, k);
    const auto& split = sp.split();
    for (const auto& v : sp.s0().basis()) {
      auto vg = split.from_m(v);
      for (const auto& a : split.h().basis()) CHECK(is_zero_vector(sp.g->bracket(a, vg)));
      CHECK(is_zero_vector(sp.g->bracket(sp.z0, vg)));
    }
  }
}

TEST_CASE("A_t is positive definite exactly for t > 0 and A_1 is the identity") {
  auto sp = build_stiefel<Q>(4, 2);
  CHECK(family_metric(sp, Q(1)) == Matrix<Q>::identity(sp.dim_m()));
  CHECK(make_metric(sp.action, family_metric(sp, from_ratio<Q>(1, 100))).valid());
  CHECK_FALSE(make_metric(sp.action, family_metric(sp, Q(0))).positive_definite);
  CHECK_FALSE(make_metric(sp.action, family_metric(sp, Q(-2))).positive_definite);
  CHECK(is_zero_vector(family_witness_map(sp, Q(1)) * Vector<Q>(sp.dim_m(), Q(1))));
  CHECK(check_normalizer_equivariance(sp.action, family_metric(sp, Q(3)), sp.s0()));
  CHECK(family_parameter(sp, family_metric(sp, Q(5))) == std::optional<Q>(Q(5)));
  CHECK(family_parameter(sp, Matrix<Q>(Q(2) * family_metric(sp, Q(5)))) == std::optional<Q>(Q(5)));
  CHECK_FALSE(family_parameter(sp, block_metric(sp, Q(1), Q(1), Q(2))).has_value());
}

TEST_CASE("verify_family on small spaces") {
  SECTION("(3,1), t = 1/2, 50 random X") {
    auto sp = build_stiefel<Q>(3, 1);
    auto fv = verify_family(sp, {from_ratio<Q>(1, 2)}, 50);
    CHECK(fv.all_verified());
    for (const auto& c : fv.certificates)
      for (const auto& w : c.certificate.witnesses) CHECK(w.residual2 == 0);
    CHECK(fv.certificates[0].certificate.random_count == 50);
  }
  SECTION("(4,2), t = 3") {
    auto sp = build_stiefel<Q>(4, 2);
    CHECK(verify_family(sp, {Q(3)}, 20).all_verified());
  }
  SECTION("t = 1 has a zero witness") {
    auto sp = build_stiefel<Q>(3, 2);
    auto fv = verify_family(sp, {Q(1)}, 10);
    CHECK(fv.all_verified());
    for (const auto& w : fv.certificates[0].certificate.witnesses) CHECK(is_zero_vector(w.a));
  }
  SECTION("t <= 0 is rejected") {
    auto sp = build_stiefel<Q>(3, 1);
    try {
      verify_family(sp, {Q(0)}, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    }
  }
}

TEST_CASE("witness map matches r(1 - t) sum_{i>k} eb_ii") {
  auto sp = build_stiefel<Q>(4, 2);
  const auto& split = sp.split();
  std::mt19937_64 rng(8);
  Q t = from_ratio<Q>(5, 3);
  auto w = family_witness_map(sp, t);
  for (int s = 0; s < 10; ++s) {
    Vector<Q> x(sp.dim_m());
    for (auto& c : x) c = random_small_rational<Q>(rng);
    auto xg = split.from_m(x);
    // r from coordinates: B(eb_ii, eb_ii) = 4, so r = (sum_i 4 c_ii) / (4k).
    Q r = (xg[sp.g->index_of("eb_1_1")] + xg[sp.g->index_of("eb_2_2")]) / 2;
    auto want = scaled(Q(r * (1 - t)), el(sp, "eb_3_3") + el(sp, "eb_4_4"));
    CHECK(w * x == want);
  }
}

TEST_CASE("uniqueness scan for k = 1") {
  for (std::size_t n : {2u, 3u}) {
    auto sp = build_stiefel<Q>(n, 1);
    auto rep = uniqueness_scan(sp, from_ratio<Q>(1, 2), Q(2), 1);
    CHECK(rep.consistent());
    CHECK(rep.summary.survivors == rep.summary.positive_definite);
    CHECK(rep.summary.falsified == 0);
    CHECK(rep.grassmannian_commutant == 1);
    bool berger = false;
    for (const auto& s : rep.notes) berger = berger || s.find("Berger") != std::string::npos;
    CHECK(berger);
  }
}

TEST_CASE("uniqueness scan for (3,2) at a coarse step") {
  auto sp = build_stiefel<Q>(3, 2);
  auto rep = uniqueness_scan(sp, Q(1), Q(3), 1);
  CHECK(rep.reduced_matches_family);
  CHECK(rep.grassmannian_commutant == 1);
  CHECK(rep.summary.survivors_outside_family == 0);
  CHECK(rep.summary.family_points_passed == rep.summary.family_points);
  CHECK(rep.summary.falsified_with_positive_residual == rep.summary.falsified);
  CHECK(rep.summary.falsified > 0);
  CHECK(rep.consistent());
}
