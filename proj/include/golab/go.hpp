#pragma once

#include "golab/metric.hpp"
#include "golab/parallel.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace golab {

/// Result of minimizing |[a + X, AX]|_B over a in h for one X.
template <class T>
struct GOSolve {
  Vector<T> a;         // g-coordinates, lies in h
  Vector<T> residual;  // [a + X, AX] in g-coordinates
  T residual2;         // B(residual, residual)
  bool bracket_in_m = true;
};

namespace detail {

template <class T>
GOSolve<T> least_squares_witness(const ReductiveSplit<T>& split, const Vector<T>& xg, const Vector<T>& axg) {
  const auto& g = split.algebra();
  GOSolve<T> out;
  auto c = g.bracket(xg, axg);
  out.bracket_in_m = is_zero_vector(split.project(c, Part::H));
  const auto& hb = split.h().basis();
  const std::size_t p = hb.size();
  std::vector<Vector<T>> v;
  v.reserve(p);
  for (const auto& a : hb) v.push_back(g.bracket(a, axg));
  RowReducer<T> normal(p + 1);
  for (std::size_t mu = 0; mu < p; ++mu) {
    Vector<T> row(p + 1);
    for (std::size_t nu = 0; nu < p; ++nu) row[nu] = g.inner(v[mu], v[nu]);
    row[p] = -g.inner(v[mu], c);
    normal.add(row);
  }
  auto coef = normal.particular_solution();
  if (!coef) throw Error(ErrorKind::Internal, "normal equations are inconsistent");
  out.a.assign(g.dim(), T(0));
  out.residual = c;
  for (std::size_t mu = 0; mu < p; ++mu) {
    if (ScalarTraits<T>::is_exact_zero((*coef)[mu])) continue;
    axpy((*coef)[mu], hb[mu], out.a);
    axpy((*coef)[mu], v[mu], out.residual);
  }
  out.residual2 = g.inner(out.residual, out.residual);
  return out;
}

}  // namespace detail

/// Best witness a in h for X (m-coordinates) and the resulting residual.
/// Exact over the rationals: the normal equations are solved exactly and the
/// squared residual is returned as a rational.
template <class T>
GOSolve<T> go_solve_at(const IsotropyAction<T>& action, const Matrix<T>& a, const Vector<T>& x) {
  const auto& split = action.split();
  if (x.size() != split.dim_m()) throw Error(ErrorKind::DimensionMismatch, "X must be given in m-coordinates");
  return detail::least_squares_witness(split, split.from_m(x), split.from_m(a * x));
}

/// Same as go_solve_at but with X given in g-coordinates; X must lie in m.
template <class T>
GOSolve<T> go_solve_at_element(const IsotropyAction<T>& action, const Matrix<T>& a, const Vector<T>& xg) {
  const auto& split = action.split();
  if (xg.size() != split.algebra().dim()) throw Error(ErrorKind::DimensionMismatch, "X has wrong length");
  if (!split.in_m(xg)) throw Error(ErrorKind::NotInSubspace, "X is not in m");
  return go_solve_at(action, a, split.m_coords(xg));
}

/// [a + X, AX] for a given witness a (g-coordinates) and X in m-coordinates.
template <class T>
GOSolve<T> go_evaluate(const IsotropyAction<T>& action, const Matrix<T>& a, const Vector<T>& x, const Vector<T>& wit) {
  const auto& split = action.split();
  const auto& g = split.algebra();
  auto xg = split.from_m(x);
  auto axg = split.from_m(a * x);
  GOSolve<T> out;
  out.a = wit;
  out.bracket_in_m = is_zero_vector(split.project(g.bracket(xg, axg), Part::H));
  out.residual = g.bracket(wit + xg, axg);
  out.residual2 = g.inner(out.residual, out.residual);
  return out;
}

/// Whether a residual counts as a falsification of the GO equation at X.
/// Exact: any nonzero residual. Float: residual > 1e-6 |X| |AX|.
template <class T>
bool is_falsifying(const IsotropyAction<T>& action, const Matrix<T>& a, const Vector<T>& x, const T& residual2) {
  if constexpr (ScalarTraits<T>::exact) {
    (void)action;
    (void)a;
    (void)x;
    return !ScalarTraits<T>::is_exact_zero(residual2);
  } else {
    const auto& s = action.split();
    double nx = std::sqrt(to_double(s.inner_m(x, x)));
    auto ax = a * x;
    double nax = std::sqrt(to_double(s.inner_m(ax, ax)));
    return std::sqrt(std::max(0.0, to_double(residual2))) > 1e-6 * nx * nax;
  }
}

enum class Verdict { VerifiedOnFamily, PassedSampling, Falsified };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::VerifiedOnFamily:
      return "verified-on-family";
    case Verdict::PassedSampling:
      return "passed-sampling";
    case Verdict::Falsified:
      return "falsified";
  }
  return "?";
}

template <class T>
struct Witness {
  Vector<T> x;  // m-coordinates
  Vector<T> a;  // g-coordinates
  T residual2;
  bool from_map = false;
};

template <class T>
struct GOCertificate {
  Verdict verdict = Verdict::PassedSampling;
  std::vector<Witness<T>> witnesses;
  std::optional<Witness<T>> falsifier;
  std::uint64_t seed = 0;
  std::size_t random_count = 0;
  std::size_t tested = 0;
  /// Every X of the basis and pairwise-sum set was covered by the witness map.
  bool polarization_complete = false;

  bool passed() const { return verdict != Verdict::Falsified; }
};

template <class T>
struct GoStrategy {
  bool basis = true;
  std::size_t random_count = 0;
  std::uint64_t seed = 1;
  /// Closed-form witness map X -> a_X as a (dim g) x (dim m) matrix.
  std::optional<Matrix<T>> witness_map;
  std::size_t jobs = 1;
};

/// Test vectors: basis vectors, then all pairwise sums, then seeded random
/// rational vectors. Random vectors are drawn sequentially up front so they do
/// not depend on evaluation order.
template <class T>
std::vector<Vector<T>> go_test_vectors(std::size_t dim, bool basis, std::size_t random_count, std::uint64_t seed) {
  std::vector<Vector<T>> xs;
  if (basis) {
    for (std::size_t i = 0; i < dim; ++i) xs.push_back(unit_vector<T>(dim, i));
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j) {
        auto v = unit_vector<T>(dim, i);
        v[j] = T(1);
        xs.push_back(std::move(v));
      }
  }
  std::mt19937_64 rng(seed);
  for (std::size_t r = 0; r < random_count; ++r) {
    Vector<T> v(dim);
    for (auto& c : v) c = random_small_rational<T>(rng);
    xs.push_back(std::move(v));
  }
  return xs;
}

/// Decides the GO equation on a finite set of X.
///
/// Sampling can only falsify or pass. With a witness map on the exact
/// backend, zero residuals on all basis vectors and pairwise sums cover every
/// X: the map X -> [a_X + X, AX] is then a quadratic form vanishing on a
/// polarization set, so the certificate is reported as verified on the family.
///
/// Work is split into fixed-size chunks; within a chunk all X are evaluated in
/// parallel and the first falsifier by index is kept, so the result does not
/// depend on the number of workers.
template <class T>
GOCertificate<T> go_check(const IsotropyAction<T>& action, const Matrix<T>& a, const GoStrategy<T>& strategy) {
  const std::size_t d = action.dim_m();
  GOCertificate<T> cert;
  cert.seed = strategy.seed;
  cert.random_count = strategy.random_count;
  auto xs = go_test_vectors<T>(d, strategy.basis, strategy.random_count, strategy.seed);
  const std::size_t polar_count = strategy.basis ? xs.size() - strategy.random_count : 0;
  bool map_ok = strategy.witness_map.has_value();
  const bool valid_a = is_b_symmetric(a, action.weights()) && commutes_with(a, action.ops());
  constexpr std::size_t chunk = 32;
  std::vector<Witness<T>> slots;
  std::vector<char> bad;
  for (std::size_t start = 0; start < xs.size(); start += chunk) {
    const std::size_t count = std::min(chunk, xs.size() - start);
    slots.assign(count, Witness<T>{});
    bad.assign(count, 0);
    std::vector<char> map_miss(count, 0);
    parallel_for(count, strategy.jobs, [&](std::size_t i) {
      const auto& x = xs[start + i];
      Witness<T> w;
      w.x = x;
      if (strategy.witness_map) {
        auto r = go_evaluate(action, a, x, *strategy.witness_map * x);
        if (valid_a && !r.bracket_in_m) throw Error(ErrorKind::Internal, "[X, AX] has an h-component");
        if (!is_falsifying(action, a, x, r.residual2)) {
          w.a = std::move(r.a);
          w.residual2 = r.residual2;
          w.from_map = true;
          slots[i] = std::move(w);
          return;
        }
        map_miss[i] = 1;
      }
      auto r = go_solve_at(action, a, x);
      if (valid_a && !r.bracket_in_m) throw Error(ErrorKind::Internal, "[X, AX] has an h-component");
      w.a = std::move(r.a);
      w.residual2 = r.residual2;
      bad[i] = is_falsifying(action, a, x, w.residual2) ? 1 : 0;
      slots[i] = std::move(w);
    });
    for (std::size_t i = 0; i < count; ++i) {
      if (map_miss[i] && start + i < polar_count) map_ok = false;
      if (bad[i]) {
        cert.falsifier = std::move(slots[i]);
        cert.tested = start + i + 1;
        cert.verdict = Verdict::Falsified;
        return cert;
      }
      cert.witnesses.push_back(std::move(slots[i]));
    }
  }
  cert.tested = xs.size();
  cert.polarization_complete = map_ok && strategy.basis;
  cert.verdict = (ScalarTraits<T>::exact && cert.polarization_complete) ? Verdict::VerifiedOnFamily
                                                                         : Verdict::PassedSampling;
  return cert;
}

// ---------------------------------------------------------------------------
// Reduction rules

/// A bracket fact [x, y] with its projection onto a named target subspace.
template <class T>
struct BracketWitness {
  Vector<T> x, y;        // g-coordinates
  Vector<T> bracket;     // [x, y], g-coordinates
  Vector<T> projection;  // component in the target, g-coordinates
  std::string target;
};

template <class T>
struct ReductionStep {
  std::string rule;
  std::vector<std::string> subspaces;
  std::string detail;
  std::vector<BracketWitness<T>> witnesses;
};

template <class T>
struct ReductionTrace {
  std::vector<ReductionStep<T>> steps;
  std::vector<std::string> notes;

  std::vector<const ReductionStep<T>*> by_rule(const std::string& rule) const {
    std::vector<const ReductionStep<T>*> out;
    for (const auto& s : steps)
      if (s.rule == rule) out.push_back(&s);
    return out;
  }
};

/// A named B-orthogonal piece of m on which every metric of the current
/// family acts as a scalar.
template <class T>
struct ScalarPiece {
  std::string name;
  Subspace<T> space;
};

template <class T>
struct ReducedFamily {
  ReductionTrace<T> trace;
  MetricFamily<T> family;
  /// Pieces on which the reduced family is scalar, grouped by merged eigenvalue.
  std::vector<ScalarPiece<T>> pieces;
  std::vector<std::vector<std::size_t>> groups;
};

namespace detail {

/// Linear constraints on the coefficients of a metric in the full family.
template <class T>
class FamilyConstraints {
 public:
  FamilyConstraints(const IsotropyAction<T>& action, const MetricFamily<T>& full)
      : action_(action), full_(full), reducer_(full.size()) {}

  /// Adds the functional A -> f(A), evaluated on every generator.
  template <class F>
  void add(F&& f) {
    Vector<T> row(full_.size());
    for (std::size_t j = 0; j < full_.size(); ++j) row[j] = f(full_.generators[j]);
    reducer_.add(row);
  }

  /// A maps s into s (equivalently, since A is symmetric, s is orthogonal to A(s^perp)).
  void preserves(const Subspace<T>& s) {
    auto whole = Subspace<T>::whole(action_.weights());
    auto comp = s.complement_in(whole);
    for (const auto& u : s.basis())
      for (const auto& w : comp.basis()) add([&](const Matrix<T>& g) { return s.inner(g * u, w); });
  }

  /// A is a multiple of the identity on s.
  void scalar(const Subspace<T>& s) {
    preserves(s);
    if (s.dim() == 0) return;
    const auto& u0 = s.basis()[0];
    const T n0 = s.norms()[0];
    for (std::size_t a = 0; a < s.dim(); ++a) {
      const auto& u = s.basis()[a];
      for (std::size_t b = 0; b < s.dim(); ++b) {
        const auto& v = s.basis()[b];
        if (a == b) {
          if (a == 0) continue;
          add([&](const Matrix<T>& g) { return s.inner(g * u, u) / s.norms()[a] - s.inner(g * u0, u0) / n0; });
        } else {
          add([&](const Matrix<T>& g) { return s.inner(g * u, v); });
        }
      }
    }
  }

  /// The scalars of A on s1 and s2 agree.
  void equal_scalars(const Subspace<T>& s1, const Subspace<T>& s2) {
    const auto& u = s1.basis()[0];
    const auto& v = s2.basis()[0];
    add([&](const Matrix<T>& g) { return s1.inner(g * u, u) / s1.norms()[0] - s2.inner(g * v, v) / s2.norms()[0]; });
  }

  std::vector<Matrix<T>> solutions() const {
    std::vector<Matrix<T>> out;
    for (const auto& c : reducer_.nullspace()) out.push_back(full_.at(c));
    return out;
  }

 private:
  const IsotropyAction<T>& action_;
  const MetricFamily<T>& full_;
  RowReducer<T> reducer_;
};

template <class T>
std::string format_m(const ReductiveSplit<T>& split, const Vector<T>& mc) {
  return split.algebra().format(split.from_m(mc));
}

/// First basis pair (x, y) of p and q whose bracket has a nonzero component
/// in the m-subspace `target`; returns the witness.
template <class T>
std::optional<BracketWitness<T>> find_bracket(const ReductiveSplit<T>& split, const Subspace<T>& p,
                                              const Subspace<T>& q, const Subspace<T>& target,
                                              const std::string& target_name) {
  const auto& g = split.algebra();
  for (const auto& x : p.basis())
    for (const auto& y : q.basis()) {
      auto xg = split.from_m(x), yg = split.from_m(y);
      auto br = g.bracket(xg, yg);
      auto proj = target.project(split.m_coords(br));
      if (!is_zero_vector(proj)) return BracketWitness<T>{xg, yg, br, split.from_m(proj), target_name};
    }
  return std::nullopt;
}

template <class T>
Subspace<T> direct_sum(const std::vector<const Subspace<T>*>& parts, const Vector<T>& weights) {
  std::vector<Vector<T>> vs;
  for (auto* p : parts) vs.insert(vs.end(), p->basis().begin(), p->basis().end());
  return Subspace<T>(std::move(vs), weights);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

/// Checks whether X (g-coordinates) maps the summand s into the member
/// `target` with kernel orthogonal to that member.
template <class T>
bool isolates_member(const ReductiveSplit<T>& split, const Vector<T>& xg, const IsotypicalSummand<T>& s,
                     std::size_t target) {
  const auto& g = split.algebra();
  const auto& mem = s.members[target].space;
  std::size_t cols = 0;
  for (const auto& m : s.members) cols += m.space.dim();
  Matrix<T> img(mem.dim(), cols);
  std::size_t col = 0;
  std::size_t target_begin = 0;
  for (std::size_t l = 0; l < s.members.size(); ++l) {
    if (l == target) target_begin = col;
    for (const auto& v : s.members[l].space.basis()) {
      auto br = g.bracket(xg, split.from_m(v));
      if (!split.in_m(br)) return false;
      auto mc = split.m_coords(br);
      if (!mem.contains(mc)) return false;
      img.set_col(col++, mem.coords(mc));
    }
  }
  for (const auto& k : nullspace(img))
    for (std::size_t i = 0; i < mem.dim(); ++i)
      if (!is_zero(k[target_begin + i])) return false;
  return true;
}

}  // namespace detail

inline constexpr const char* kRuleNormalizer = "bi_invariant_normalizer";
inline constexpr const char* kRuleDiagonal = "bracket_diagonalization";
inline constexpr const char* kRuleScalar = "orthogonal_intertwiner_scalar";
inline constexpr const char* kRuleMerge = "eigenvalue_merge";

/// Applies the reduction rules in fixed order and returns the constrained
/// family with its trace:
///   1. bi-invariant restriction to S0 (arbitrary on the center, scalar on
///      each simple ideal);
///   2. diagonalization of an isotypical summand when, for each member, some
///      X orthogonal to the summand brackets the summand into that member and
///      is injective on it;
///   3. scalar restriction of a summand when bracketing with intertwiner
///      images leaves the summand injectively and orthogonally;
///   4. merging of eigenvalues of scalar pieces whose brackets leave their sum.
template <class T>
ReducedFamily<T> reduce_family(const IsotropyAction<T>& action, const IsotypicalDecomposition<T>& dec,
                               const IdealSplit<T>& ideals, std::uint64_t seed = 1) {
  const auto& split = action.split();
  const auto& g = split.algebra();
  const auto& w = action.weights();
  auto full = full_family(action);
  detail::FamilyConstraints<T> cons(action, full);
  ReducedFamily<T> out;
  auto& trace = out.trace;
  std::mt19937_64 rng(seed);
  std::vector<ScalarPiece<T>> pieces;

  // 1. S0
  if (dec.s0.dim() > 0) {
    ReductionStep<T> step;
    step.rule = kRuleNormalizer;
    cons.preserves(ideals.center);
    step.subspaces.push_back("z(S0)");
    if (ideals.center.dim() == 1) pieces.push_back({"z(S0)", ideals.center});
    std::ostringstream os;
    os << "center dim " << ideals.center.dim();
    for (std::size_t i = 0; i < ideals.simples.size(); ++i) {
      const auto& s = ideals.simples[i];
      std::string name = "s_" + std::to_string(i + 1);
      cons.scalar(s);
      step.subspaces.push_back(name);
      pieces.push_back({name, s});
      os << ", " << name << " dim " << s.dim();
      if (auto wb = detail::find_bracket(split, s, s, s, name)) step.witnesses.push_back(*wb);
    }
    step.detail = os.str();
    if (ideals.center.dim() > 1) trace.notes.push_back("z(S0) has dimension > 1; it is not used as a scalar piece");
    trace.steps.push_back(std::move(step));
  }

  // 2 and 3. nontrivial summands
  for (std::size_t k = 1; k < dec.summands.size(); ++k) {
    const auto& s = dec.summands[k];
    const std::string sname = "S_" + std::to_string(k);
    auto member_name = [&](std::size_t l) { return sname + "/m_" + std::to_string(l + 1); };
    if (s.members.size() == 1) {
      pieces.push_back({sname, s.span});
      continue;
    }
    // candidates X in S_k^perp: h basis, S0 basis, then random combinations
    std::vector<Vector<T>> perp_g;
    for (const auto& hv : split.h().basis()) perp_g.push_back(hv);
    for (std::size_t j = 0; j < dec.summands.size(); ++j) {
      if (j == k) continue;
      for (const auto& v : dec.summands[j].span.basis()) perp_g.push_back(split.from_m(v));
    }
    std::vector<Vector<T>> candidates;
    for (const auto& hv : split.h().basis()) candidates.push_back(hv);
    for (const auto& v : dec.s0.basis()) candidates.push_back(split.from_m(v));
    std::uniform_int_distribution<int> coef(-3, 3);
    for (int att = 0; att < 100; ++att) {
      Vector<T> x(g.dim(), T(0));
      for (const auto& b : perp_g) {
        int c = coef(rng);
        if (c != 0) axpy(from_ratio<T>(c), b, x);
      }
      candidates.push_back(std::move(x));
    }
    ReductionStep<T> diag;
    diag.rule = kRuleDiagonal;
    diag.subspaces.push_back(sname);
    bool all_found = true;
    for (std::size_t l = 0; l < s.members.size() && all_found; ++l) {
      bool found = false;
      for (const auto& xg : candidates) {
        if (is_zero_vector(xg) || !detail::isolates_member(split, xg, s, l)) continue;
        const auto& v = s.members[l].space.basis()[0];
        auto vg = split.from_m(v);
        auto br = g.bracket(xg, vg);
        diag.witnesses.push_back({xg, vg, br, br, member_name(l)});
        found = true;
        break;
      }
      all_found = found;
    }
    if (all_found) {
      for (std::size_t l = 0; l < s.members.size(); ++l) {
        cons.scalar(s.members[l].space);
        diag.subspaces.push_back(member_name(l));
        pieces.push_back({member_name(l), s.members[l].space});
      }
      diag.detail = "A is diagonal on " + sname + " with respect to its " + std::to_string(s.members.size()) +
                    " members";
      trace.steps.push_back(std::move(diag));
      continue;
    }
    trace.notes.push_back(std::string(kRuleDiagonal) + ": no witness found for " + sname);

    // Intertwiner condition on each member.
    auto perp_component = [&](const Vector<T>& br) {
      auto mc = split.m_coords(br);
      auto ms = s.span.project(mc);
      return br - split.from_m(ms);
    };
    ReductionStep<T> sc;
    sc.rule = kRuleScalar;
    sc.subspaces.push_back(sname);
    bool ok_all = true;
    std::ostringstream detail_os;
    for (std::size_t l = 0; l < s.members.size() && ok_all; ++l) {
      const auto& ml = s.members[l].space;
      std::vector<Vector<T>> xl_candidates = ml.basis();
      for (int att = 0; att < 20; ++att) {
        Vector<T> c(ml.dim());
        for (auto& x : c) x = from_ratio<T>(coef(rng));
        if (!is_zero_vector(c)) xl_candidates.push_back(ml.embed(c));
      }
      bool found = false;
      for (const auto& xl : xl_candidates) {
        auto xg = split.from_m(xl);
        auto xc = ml.coords(xl);
        std::vector<std::vector<Vector<T>>> images(s.members.size());
        bool ok = true;
        for (std::size_t m = 0; m < s.members.size() && ok; ++m) {
          if (m == l) continue;
          const auto& mm = s.members[m].space;
          for (const auto& phi : intertwiners(action, ml, mm))
            images[m].push_back(perp_component(g.bracket(xg, split.from_m(mm.embed(phi * xc)))));
          ok = !images[m].empty() && rank_of(images[m], g.dim()) == images[m].size();
        }
        for (std::size_t m1 = 0; m1 < s.members.size() && ok; ++m1)
          for (std::size_t m2 = m1 + 1; m2 < s.members.size() && ok; ++m2) {
            if (m1 == l || m2 == l) continue;
            for (const auto& u : images[m1])
              for (const auto& v : images[m2])
                if (!is_zero(g.inner(u, v))) ok = false;
          }
        if (!ok) continue;
        found = true;
        for (std::size_t m = 0; m < s.members.size(); ++m) {
          if (m == l) continue;
          const auto& mm = s.members[m].space;
          auto phis = intertwiners(action, ml, mm);
          auto yg = split.from_m(mm.embed(phis[0] * xc));
          auto br = g.bracket(xg, yg);
          sc.witnesses.push_back({xg, yg, br, perp_component(br), sname + "^perp"});
        }
        break;
      }
      ok_all = found;
    }
    if (ok_all) {
      cons.scalar(s.span);
      pieces.push_back({sname, s.span});
      sc.detail = "A is scalar on " + sname;
      trace.steps.push_back(std::move(sc));
    } else {
      trace.notes.push_back(std::string(kRuleScalar) + ": hypotheses not met for " + sname);
    }
  }

  // 4. merge eigenvalues of scalar pieces
  detail::UnionFind uf(pieces.size());
  auto record_merge = [&](const std::string& kind, std::vector<std::size_t> idx, BracketWitness<T> wb) {
    ReductionStep<T> step;
    step.rule = kRuleMerge;
    for (auto i : idx) step.subspaces.push_back(pieces[i].name);
    step.detail = kind;
    step.witnesses.push_back(std::move(wb));
    bool changed = false;
    for (std::size_t i = 1; i < idx.size(); ++i) {
      if (uf.find(idx[0]) != uf.find(idx[i])) cons.equal_scalars(pieces[idx[0]].space, pieces[idx[i]].space);
      changed = uf.unite(idx[0], idx[i]) || changed;
    }
    if (!changed) step.detail += " (already merged)";
    trace.steps.push_back(std::move(step));
  };
  const std::size_t np = pieces.size();
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = i + 1; j < np; ++j) {
      auto sum = detail::direct_sum<T>({&pieces[i].space, &pieces[j].space}, w);
      auto outside = sum.complement_in(Subspace<T>::whole(w));
      if (auto wb = detail::find_bracket(split, pieces[i].space, pieces[j].space, outside,
                                         "(" + pieces[i].name + "+" + pieces[j].name + ")^perp"))
        record_merge("pair", {i, j}, *wb);
    }
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = i + 1; j < np; ++j)
      for (std::size_t l = 0; l < np; ++l) {
        if (l == i || l == j) continue;
        if (auto wb = detail::find_bracket(split, pieces[i].space, pieces[j].space, pieces[l].space, pieces[l].name))
          record_merge("triple", {i, j, l}, *wb);
      }
  // iterate on merged groups until stable
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::size_t, std::vector<std::size_t>> grp;
    for (std::size_t i = 0; i < np; ++i) grp[uf.find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> gl;
    for (auto& [r, v] : grp) gl.push_back(v);
    std::vector<Subspace<T>> gs;
    for (const auto& v : gl) {
      std::vector<const Subspace<T>*> parts;
      for (auto i : v) parts.push_back(&pieces[i].space);
      gs.push_back(detail::direct_sum(parts, w));
    }
    for (std::size_t a = 0; a < gl.size() && !changed; ++a)
      for (std::size_t b = a + 1; b < gl.size() && !changed; ++b) {
        auto sum = detail::direct_sum<T>({&gs[a], &gs[b]}, w);
        auto outside = sum.complement_in(Subspace<T>::whole(w));
        if (auto wb = detail::find_bracket(split, gs[a], gs[b], outside, "group complement")) {
          record_merge("pair (groups)", {gl[a][0], gl[b][0]}, *wb);
          changed = true;
        }
        for (std::size_t c = 0; c < gl.size() && !changed; ++c) {
          if (c == a || c == b) continue;
          if (auto wb = detail::find_bracket(split, gs[a], gs[b], gs[c], "group")) {
            record_merge("triple (groups)", {gl[a][0], gl[b][0], gl[c][0]}, *wb);
            changed = true;
          }
        }
      }
  }

  // final family
  auto sols = cons.solutions();
  std::map<std::size_t, std::vector<std::size_t>> grp;
  for (std::size_t i = 0; i < np; ++i) grp[uf.find(i)].push_back(i);
  MetricFamily<T> fam;
  std::size_t covered = 0;
  for (const auto& [r, v] : grp) {
    Matrix<T> proj(action.dim_m(), action.dim_m());
    std::string label;
    for (auto i : v) {
      proj += pieces[i].space.projector();
      covered += pieces[i].space.dim();
      label += (label.empty() ? "" : "+") + pieces[i].name;
    }
    fam.generators.push_back(std::move(proj));
    fam.labels.push_back(label);
    out.groups.push_back(v);
  }
  MetricFamily<T> sol_family{{}, sols};
  bool projector_form = covered == action.dim_m() && fam.size() == sols.size();
  for (std::size_t i = 0; projector_form && i < fam.size(); ++i)
    projector_form = coordinates_in(sol_family, fam.generators[i]).has_value();
  if (!projector_form) {
    // canonical basis: reduced echelon form of the flattened solutions
    RowReducer<T> r(action.dim_m() * action.dim_m());
    for (const auto& s : sols) r.add(s.data());
    fam = MetricFamily<T>{};
    for (const auto& row : r.rref_rows()) {
      Matrix<T> m(action.dim_m(), action.dim_m());
      for (std::size_t e = 0; e < row.size(); ++e) m(e / action.dim_m(), e % action.dim_m()) = row[e];
      fam.generators.push_back(std::move(m));
      fam.labels.push_back("c" + std::to_string(fam.generators.size()));
    }
    out.groups.clear();
  }
  out.family = std::move(fam);
  out.pieces = std::move(pieces);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter search

template <class T>
struct Candidate {
  Vector<T> params;
  bool positive_definite = false;
  std::optional<GOCertificate<T>> certificate;

  bool survived() const { return positive_definite && certificate && certificate->passed(); }
};

template <class T>
struct SearchResult {
  std::vector<Candidate<T>> candidates;
  std::size_t pd_count = 0;
  std::size_t survivors = 0;
  std::size_t falsified = 0;
  std::string note;
};

/// Cartesian grid of parameter vectors, first parameter varying slowest.
template <class T>
std::vector<Vector<T>> grid_points(std::size_t dims, const std::vector<T>& values) {
  std::vector<Vector<T>> out;
  if (dims == 0) return {Vector<T>{}};
  std::vector<std::size_t> idx(dims, 0);
  for (;;) {
    Vector<T> p(dims);
    for (std::size_t i = 0; i < dims; ++i) p[i] = values[idx[i]];
    out.push_back(std::move(p));
    std::size_t i = dims;
    while (i > 0) {
      --i;
      if (++idx[i] < values.size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

/// {step, 2 step, ..., hi}.
template <class T>
std::vector<T> grid_values(const T& step, const T& hi) {
  std::vector<T> v;
  for (T x = step; !(hi < x) || is_zero(x - hi); x += step) v.push_back(x);
  return v;
}

/// Instantiates each parameter point, discards non positive definite ones and
/// runs go_check on the rest. Points are processed in parallel; results are
/// stored by index, so output is independent of the worker count.
template <class T>
SearchResult<T> search_go(const IsotropyAction<T>& action, const MetricFamily<T>& family,
                          const std::vector<Vector<T>>& points, const GoStrategy<T>& strategy, std::size_t jobs = 1) {
  SearchResult<T> res;
  res.candidates.resize(points.size());
  GoStrategy<T> inner = strategy;
  inner.jobs = 1;
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    auto& c = res.candidates[i];
    c.params = points[i];
    auto a = family.at(points[i]);
    c.positive_definite = is_b_positive_definite(a, action.weights());
    if (c.positive_definite) c.certificate = go_check(action, a, inner);
  });
  for (const auto& c : res.candidates) {
    if (!c.positive_definite) continue;
    ++res.pd_count;
    if (c.survived())
      ++res.survivors;
    else
      ++res.falsified;
  }
  if (res.pd_count == 0) res.note = "no positive definite point in the scanned region";
  return res;
}

}  // namespace golab
