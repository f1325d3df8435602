#pragma once

#include "golab/go.hpp"

#include <sstream>

namespace golab {

/// V_k C^n = U(n)/U(n-k) with its reductive decomposition, isotypical
/// structure and ideal split of S0 = u(k).
///
/// The nontrivial summand S1 carries the coordinate submodules
/// m_i = span{e_ij, eb_ij : j > k}, i <= k (1-based).
template <class T>
struct StiefelSpace {
  std::size_t n = 0, k = 0;
  AlgebraPtr<T> g;
  IsotropyAction<T> action;
  IsotypicalDecomposition<T> dec;
  IdealSplit<T> ideals;
  Subspace<T> s1;
  std::vector<Subspace<T>> modules;
  Vector<T> z0;  // sum of eb_ii, i <= k (g-coordinates)
  Vector<T> wh;  // sum of eb_ii, i > k (g-coordinates)
  UnitaryBasisIndex index{1};

  const ReductiveSplit<T>& split() const { return action.split(); }
  const Subspace<T>& s0() const { return dec.s0; }
  std::size_t dim_m() const { return action.dim_m(); }
};

template <class T>
StiefelSpace<T> build_stiefel(std::size_t n, std::size_t k, std::uint64_t seed = 1) {
  if (k < 1 || k >= n)
    throw Error(ErrorKind::InvalidDimension,
                "Stiefel space needs 1 <= k < n, got n=" + std::to_string(n) + ", k=" + std::to_string(k));
  auto g = std::make_shared<const MatrixLieAlgebra<T>>(build_un<T>(n));
  IsotropyAction<T> action(reductive_split(diagonal_u_nk<T>(g, k)));
  const auto& split = action.split();
  UnitaryBasisIndex idx(n);
  auto dec = decompose_isotypic(action, seed);

  auto fail = [](const std::string& what) { throw Error(ErrorKind::Internal, "Stiefel invariant violated: " + what); };
  if (split.dim_m() != 2 * n * k - k * k) fail("dim m != 2nk - k^2");
  if (dec.s0.dim() != k * k) fail("dim S0 != k^2");
  if (dec.summands.size() != 2 || dec.summands[1].members.size() != k) fail("S1 does not split into k modules");
  for (const auto& m : dec.summands[1].members)
    if (m.space.dim() != 2 * (n - k)) fail("module dimension != 2(n-k)");

  std::vector<Subspace<T>> modules;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Vector<T>> vs;
    for (std::size_t j = k; j < n; ++j) {
      vs.push_back(split.m_coords(g->unit(idx.e(i, j))));
      vs.push_back(split.m_coords(g->unit(idx.eb(i, j))));
    }
    modules.push_back(Subspace<T>::span_of(vs, action.weights()));
  }
  dec = with_members(action, std::move(dec), 1, modules);
  auto ideals = split_ideals(action, dec.s0, seed);

  StiefelSpace<T> sp{n, k, g, action, dec, ideals, dec.summands[1].span, modules, {}, {}, idx};
  sp.z0.assign(g->dim(), T(0));
  sp.wh.assign(g->dim(), T(0));
  for (std::size_t i = 0; i < n; ++i) (i < k ? sp.z0 : sp.wh)[idx.eb(i, i)] = T(1);
  if (ideals.center.dim() != 1 || !ideals.center.contains(split.m_coords(sp.z0))) fail("z(S0) != span(z0)");
  if (ideals.simples.size() != (k >= 2 ? 1u : 0u)) fail("S0 is not u(1) + su(k)");
  if (k >= 2 && ideals.simples[0].dim() != k * k - 1) fail("dim su(k)");
  return sp;
}

/// Orthogonal projector onto z(S0), su(k) and S1 respectively.
template <class T>
Matrix<T> center_projector(const StiefelSpace<T>& sp) {
  return sp.ideals.center.projector();
}

template <class T>
Matrix<T> su_projector(const StiefelSpace<T>& sp) {
  if (sp.ideals.simples.empty()) return Matrix<T>(sp.dim_m(), sp.dim_m());
  return sp.ideals.simples[0].projector();
}

template <class T>
Matrix<T> s1_projector(const StiefelSpace<T>& sp) {
  return sp.s1.projector();
}

/// mu Id on z(S0) + lambda Id on su(k) + lambda_tilde Id on S1.
template <class T>
Matrix<T> block_metric(const StiefelSpace<T>& sp, const T& mu, const T& lambda, const T& lambda_tilde) {
  Matrix<T> a = mu * center_projector(sp);
  a += lambda * su_projector(sp);
  a += lambda_tilde * s1_projector(sp);
  return a;
}

/// A_t = Id on su(k) + S1, t Id on z(S0).
template <class T>
Matrix<T> family_metric(const StiefelSpace<T>& sp, const T& t) {
  return block_metric(sp, t, T(1), T(1));
}

/// r(X) = B(X, z0) / B(z0, z0), the z(S0)-coordinate of X along z0.
template <class T>
T center_coefficient(const StiefelSpace<T>& sp, const Vector<T>& xg) {
  return sp.g->inner(xg, sp.z0) / sp.g->inner(sp.z0, sp.z0);
}

/// The linear witness map X -> r(X)(1 - t) sum_{i>k} eb_ii, as a (dim g) x (dim m) matrix.
template <class T>
Matrix<T> family_witness_map(const StiefelSpace<T>& sp, const T& t) {
  const auto& split = sp.split();
  Matrix<T> w(sp.g->dim(), sp.dim_m());
  for (std::size_t j = 0; j < sp.dim_m(); ++j) {
    T r = center_coefficient(sp, split.m_basis()[j]);
    if (is_zero(r)) continue;
    w.set_col(j, scaled(T(r * (T(1) - t)), sp.wh));
  }
  return w;
}

/// Complex structure on S1: sum a_ij e_ij + b_ij eb_ij -> sum b_ij e_ij - a_ij eb_ij.
template <class T>
Vector<T> tilde_map(const StiefelSpace<T>& sp, const Vector<T>& xg) {
  const auto& split = sp.split();
  if (xg.size() != sp.g->dim()) throw Error(ErrorKind::DimensionMismatch, "vector has wrong length");
  if (!split.in_m(xg) || !sp.s1.contains(split.m_coords(xg)))
    throw Error(ErrorKind::NotInSubspace, "tilde map is defined on S1 only");
  Vector<T> out(sp.g->dim(), T(0));
  for (std::size_t i = 0; i < sp.k; ++i)
    for (std::size_t j = sp.k; j < sp.n; ++j) {
      auto e = sp.index.e(i, j), eb = sp.index.eb(i, j);
      out[e] = xg[eb];
      out[eb] = -xg[e];
    }
  return out;
}

/// [eb_ii, v] = 2 sum_j (a_ij eb_ij - b_ij e_ij) for v in S1 and i <= k.
template <class T>
bool ebar_action_identity(const StiefelSpace<T>& sp, const Vector<T>& vg) {
  for (std::size_t i = 0; i < sp.k; ++i) {
    Vector<T> expect(sp.g->dim(), T(0));
    for (std::size_t j = sp.k; j < sp.n; ++j) {
      auto e = sp.index.e(i, j), eb = sp.index.eb(i, j);
      expect[eb] = T(2) * vg[e];
      expect[e] = T(-2) * vg[eb];
    }
    if (!is_zero_vector(sp.g->bracket(sp.g->unit(sp.index.eb(i, i)), vg) - expect)) return false;
  }
  return true;
}

/// [e_{i,k+1}, e_{j,k+1}] = -e_ij for all i != j <= k (1-based).
template <class T>
bool frame_bracket_identity(const StiefelSpace<T>& sp) {
  const auto& g = *sp.g;
  const std::size_t c = sp.k;  // 0-based index of k+1
  for (std::size_t i = 0; i < sp.k; ++i)
    for (std::size_t j = 0; j < sp.k; ++j) {
      if (i == j) continue;
      Vector<T> expect(g.dim(), T(0));
      if (i < j)
        expect[sp.index.e(i, j)] = T(-1);
      else
        expect[sp.index.e(j, i)] = T(1);
      if (!is_zero_vector(g.bracket(g.unit(sp.index.e(i, c)), g.unit(sp.index.e(j, c))) - expect)) return false;
    }
  return true;
}

struct IdentityCheck {
  std::string name;
  bool passed = true;
  std::size_t checked = 0;
};

template <class T>
struct FamilyCertificate {
  T t;
  GOCertificate<T> certificate;
};

template <class T>
struct FamilyVerification {
  std::vector<IdentityCheck> identities;
  std::vector<FamilyCertificate<T>> certificates;

  bool all_verified() const {
    for (const auto& c : identities)
      if (!c.passed) return false;
    for (const auto& c : certificates)
      if (c.certificate.verdict != Verdict::VerifiedOnFamily) return false;
    return !certificates.empty();
  }
};

/// Checks the bracket identities behind the closed-form witness on spanning
/// sets, then the full equation [a_t + X, A_t X] = 0 on basis vectors, pairwise
/// sums and `samples` seeded random X, for every t.
template <class T>
FamilyVerification<T> verify_family(const StiefelSpace<T>& sp, const std::vector<T>& ts, std::size_t samples,
                                    std::uint64_t seed = 1, std::size_t jobs = 1) {
  for (const auto& t : ts)
    if (!ScalarTraits<T>::is_positive(t))
      throw Error(ErrorKind::NotPositiveDefinite, "A_t is positive definite only for t > 0, got t=" + to_string(t));
  const auto& g = *sp.g;
  const auto& split = sp.split();
  FamilyVerification<T> out;
  std::vector<Vector<T>> s1_basis, su_basis;
  for (const auto& v : sp.s1.basis()) s1_basis.push_back(split.from_m(v));
  if (!sp.ideals.simples.empty())
    for (const auto& v : sp.ideals.simples[0].basis()) su_basis.push_back(split.from_m(v));

  IdentityCheck center{"[X_z, X_S1] = -2 r tilde(X_S1)", true, 0};
  for (const auto& v : s1_basis) {
    center.passed = center.passed && is_zero_vector(g.bracket(sp.z0, v) + scaled(T(2), tilde_map(sp, v)));
    ++center.checked;
  }
  out.identities.push_back(center);
  IdentityCheck wit{"[a_t, X_S1] = 2 r (1 - t) tilde(X_S1)", true, 0};
  for (const auto& t : ts) {
    auto at = scaled(T(T(1) - t), sp.wh);
    for (const auto& v : s1_basis) {
      auto rhs = scaled(T(T(2) * (T(1) - t)), tilde_map(sp, v));
      wit.passed = wit.passed && is_zero_vector(g.bracket(at, v) - rhs);
      ++wit.checked;
    }
  }
  out.identities.push_back(wit);
  IdentityCheck zero{"[a_t, X_z] = [a_t, X_su] = [X_z, X_su] = 0", true, 0};
  auto check0 = [&](const Vector<T>& x, const Vector<T>& y) {
    zero.passed = zero.passed && is_zero_vector(g.bracket(x, y));
    ++zero.checked;
  };
  check0(sp.wh, sp.z0);
  for (const auto& u : su_basis) {
    check0(sp.wh, u);
    check0(sp.z0, u);
  }
  out.identities.push_back(zero);

  for (const auto& t : ts) {
    GoStrategy<T> st;
    st.basis = true;
    st.random_count = samples;
    st.seed = seed;
    st.witness_map = family_witness_map(sp, t);
    st.jobs = jobs;
    out.certificates.push_back({t, go_check(sp.action, family_metric(sp, t), st)});
  }
  return out;
}

/// Whether A = mu P_z + lambda (Id - P_z) for some mu, lambda > 0, i.e. A is a
/// positive multiple of some A_t. Returns t = mu / lambda.
template <class T>
std::optional<T> family_parameter(const StiefelSpace<T>& sp, const Matrix<T>& a) {
  auto pz = center_projector(sp);
  auto rest = Matrix<T>::identity(sp.dim_m()) - pz;
  MetricFamily<T> f{{"mu", "lambda"}, {pz, rest}};
  auto c = coordinates_in(f, a);
  if (!c || !ScalarTraits<T>::is_positive((*c)[0]) || !ScalarTraits<T>::is_positive((*c)[1])) return std::nullopt;
  return (*c)[0] / (*c)[1];
}

/// Commutant of S1 under h + S0 (the isotropy action of the Grassmannian
/// U(n)/(U(k) x U(n-k))) restricted to symmetric operators.
template <class T>
std::size_t grassmannian_commutant_dim(const StiefelSpace<T>& sp) {
  auto ops = sp.action.ops();
  auto extra = sp.action.normalizer_ops(sp.s0());
  ops.insert(ops.end(), extra.begin(), extra.end());
  return symmetric_commutant(restrict_all(ops, sp.s1), sp.s1.norms()).size();
}

/// The full symmetric commutant in block coordinates: P_z, P_su (k >= 2),
/// P_S1, followed by the remaining commutant directions.
template <class T>
MetricFamily<T> block_coordinates(const StiefelSpace<T>& sp) {
  MetricFamily<T> f;
  f.labels.push_back("mu");
  f.generators.push_back(center_projector(sp));
  if (sp.k >= 2) {
    f.labels.push_back("lambda");
    f.generators.push_back(su_projector(sp));
  }
  f.labels.push_back("lambda_tilde");
  f.generators.push_back(s1_projector(sp));
  const std::size_t d = sp.dim_m();
  RowReducer<T> r(d * d);
  for (const auto& gm : f.generators) r.add(gm.data());
  for (const auto& s : symmetric_commutant(sp.action.ops(), sp.action.weights()))
    if (r.add(s.data())) {
      f.labels.push_back("d" + std::to_string(f.generators.size() - (sp.k >= 2 ? 3 : 2) + 1));
      f.generators.push_back(s);
    }
  return f;
}

template <class T>
struct ScanPoint {
  std::string kind;  // "block" or "perturbation"
  Vector<T> params;  // in block coordinates
};

/// Grid points for the uniqueness scan over values G = {step, ..., hi}:
/// every (mu, lambda, lambda_tilde) in G^3 (G^2 when k = 1), and every
/// A_mu + c d_j with mu, c in G along each off-block direction d_j.
template <class T>
std::vector<ScanPoint<T>> scan_points(const StiefelSpace<T>& sp, const MetricFamily<T>& blocks,
                                      const std::vector<T>& values) {
  const std::size_t nb = sp.k >= 2 ? 3 : 2;
  std::vector<ScanPoint<T>> out;
  for (auto& p : grid_points<T>(nb, values)) {
    Vector<T> full(blocks.size(), T(0));
    std::copy(p.begin(), p.end(), full.begin());
    out.push_back({"block", std::move(full)});
  }
  for (std::size_t j = nb; j < blocks.size(); ++j)
    for (const auto& mu : values)
      for (const auto& c : values) {
        Vector<T> full(blocks.size(), T(0));
        full[0] = mu;
        for (std::size_t b = 1; b < nb; ++b) full[b] = T(1);
        full[j] = c;
        out.push_back({"perturbation", std::move(full)});
      }
  return out;
}

template <class T>
struct ScanSummary {
  std::size_t points = 0;
  std::size_t positive_definite = 0;
  std::size_t survivors = 0;
  std::size_t survivors_in_family = 0;
  std::size_t survivors_outside_family = 0;
  std::size_t family_points = 0;
  std::size_t family_points_passed = 0;
  std::size_t falsified = 0;
  std::size_t falsified_with_positive_residual = 0;
};

template <class T>
struct UniquenessReport {
  ReducedFamily<T> reduced;
  bool reduced_matches_family = false;
  std::size_t grassmannian_commutant = 0;
  MetricFamily<T> blocks;
  std::vector<ScanPoint<T>> points;
  SearchResult<T> search;
  ScanSummary<T> summary;
  std::vector<std::string> notes;

  bool consistent() const {
    return reduced_matches_family && grassmannian_commutant == 1 && summary.survivors_outside_family == 0 &&
           summary.family_points_passed == summary.family_points &&
           summary.falsified_with_positive_residual == summary.falsified;
  }
};

/// Reduction trace, Grassmannian cross-check and grid scan over the full
/// commutant; survivors are compared with the family {A_t} up to scale.
template <class T>
UniquenessReport<T> uniqueness_scan(const StiefelSpace<T>& sp, const T& step, const T& hi, std::uint64_t seed,
                                    std::size_t jobs = 1, std::size_t random_samples = 8) {
  UniquenessReport<T> rep;
  rep.reduced = reduce_family(sp.action, sp.dec, sp.ideals, seed);
  {
    const auto& fam = rep.reduced.family;
    bool ok = fam.size() == 2;
    auto pz = center_projector(sp);
    auto rest = Matrix<T>::identity(sp.dim_m()) - pz;
    MetricFamily<T> target{{"mu", "lambda"}, {pz, rest}};
    for (std::size_t i = 0; ok && i < fam.size(); ++i) ok = coordinates_in(target, fam.generators[i]).has_value();
    rep.reduced_matches_family = ok;
  }
  rep.grassmannian_commutant = grassmannian_commutant_dim(sp);
  rep.blocks = block_coordinates(sp);
  rep.points = scan_points(sp, rep.blocks, grid_values(step, hi));
  std::vector<Vector<T>> params;
  for (const auto& p : rep.points) params.push_back(p.params);
  GoStrategy<T> st;
  st.basis = true;
  st.random_count = random_samples;
  st.seed = seed;
  rep.search = search_go(sp.action, rep.blocks, params, st, jobs);
  auto& s = rep.summary;
  s.points = params.size();
  for (const auto& c : rep.search.candidates) {
    if (!c.positive_definite) continue;
    ++s.positive_definite;
    bool in_family = family_parameter(sp, rep.blocks.at(c.params)).has_value();
    if (in_family) ++s.family_points;
    if (c.survived()) {
      ++s.survivors;
      if (in_family) {
        ++s.survivors_in_family;
        ++s.family_points_passed;
      } else {
        ++s.survivors_outside_family;
      }
    } else {
      ++s.falsified;
      if (c.certificate->falsifier && ScalarTraits<T>::is_positive(c.certificate->falsifier->residual2))
        ++s.falsified_with_positive_residual;
    }
  }
  if (sp.k == 1)
    rep.notes.push_back(
        "k = 1: S0 = z(S0) is one-dimensional and S1 is irreducible, so every invariant metric is "
        "mu Id on S0 + lambda Id on S1; all of them are GO (for n = 2 these are the Berger spheres)");
  return rep;
}

}  // namespace golab
