#pragma once

#include "golab/stiefel.hpp"

#include "json.hpp"

#include <string>

namespace golab {

using Json = nlohmann::ordered_json;

template <class T>
Json scalar_json(const T& x) {
  return to_string(x);
}

template <class T>
Json vector_json(const Vector<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

template <class T>
T parse_scalar(const Json& j) {
  if (j.is_string()) return ScalarTraits<T>::parse(j.get<std::string>());
  if (j.is_number_integer()) return ScalarTraits<T>::from_int(j.get<long long>());
  if (j.is_number_float()) {
    if constexpr (ScalarTraits<T>::exact)
      throw Error(ErrorKind::Parse, "floating-point literal in exact mode; write rationals as \"p/q\" strings");
    else
      return j.get<double>();
  }
  throw Error(ErrorKind::Parse, "expected a rational, got " + j.dump());
}

template <class T>
Vector<T> parse_vector(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, "expected an array, got " + j.dump());
  Vector<T> v;
  for (const auto& x : j) v.push_back(parse_scalar<T>(x));
  return v;
}

// ---------------------------------------------------------------------------
// algebra serialization

/// { n, basis_labels, structure: [[i, j, k, num, den]], gram: [[i, j, num, den]] }
/// Indices are 0-based; only nonzero entries are listed.
template <class T>
Json algebra_to_json(const MatrixLieAlgebra<T>& g) {
  static_assert(ScalarTraits<T>::exact, "algebra files store exact rationals");
  Json j;
  j["n"] = g.n();
  j["basis_labels"] = g.labels();
  Json st = Json::array();
  for (std::size_t a = 0; a < g.dim(); ++a)
    for (std::size_t b = 0; b < g.dim(); ++b)
      for (const auto& t : g.structure(a, b))
        st.push_back({a, b, t.index, numerator(t.coeff).str(), denominator(t.coeff).str()});
  j["structure"] = std::move(st);
  Json gr = Json::array();
  for (std::size_t a = 0; a < g.dim(); ++a)
    for (std::size_t b = 0; b < g.dim(); ++b)
      if (!is_zero(g.gram()(a, b)))
        gr.push_back({a, b, numerator(g.gram()(a, b)).str(), denominator(g.gram()(a, b)).str()});
  j["gram"] = std::move(gr);
  return j;
}

namespace detail {

template <class T>
T ratio_from(const Json& num, const Json& den) {
  auto text = [](const Json& x) {
    if (x.is_string()) return x.get<std::string>();
    if (x.is_number_integer()) return std::to_string(x.get<long long>());
    throw Error(ErrorKind::Parse, "expected an integer, got " + x.dump());
  };
  return ScalarTraits<T>::parse(text(num) + "/" + text(den));
}

inline std::size_t index_from(const Json& x, std::size_t dim) {
  if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<long long>() >= 0))
    throw Error(ErrorKind::Parse, "expected a basis index, got " + x.dump());
  auto i = x.get<std::size_t>();
  if (i >= dim) throw Error(ErrorKind::Parse, "basis index " + std::to_string(i) + " out of range");
  return i;
}

}  // namespace detail

template <class T>
MatrixLieAlgebra<T> algebra_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "algebra must be a JSON object");
  for (const char* key : {"n", "basis_labels", "structure", "gram"})
    if (!j.contains(key)) throw Error(ErrorKind::Parse, std::string("algebra is missing '") + key + "'");
  auto labels = j.at("basis_labels").get<std::vector<std::string>>();
  const std::size_t d = labels.size();
  typename MatrixLieAlgebra<T>::Table table(d * d);
  for (const auto& e : j.at("structure")) {
    if (!e.is_array() || e.size() != 5) throw Error(ErrorKind::Parse, "structure entries are [i, j, k, num, den]");
    auto a = detail::index_from(e[0], d), b = detail::index_from(e[1], d), k = detail::index_from(e[2], d);
    table[a * d + b].push_back({k, detail::ratio_from<T>(e[3], e[4])});
  }
  Matrix<T> gram(d, d);
  for (const auto& e : j.at("gram")) {
    if (!e.is_array() || e.size() != 4) throw Error(ErrorKind::Parse, "gram entries are [i, j, num, den]");
    gram(detail::index_from(e[0], d), detail::index_from(e[1], d)) = detail::ratio_from<T>(e[2], e[3]);
  }
  return MatrixLieAlgebra<T>(j.at("n").get<std::size_t>(), std::move(labels), std::move(table), std::move(gram));
}

// ---------------------------------------------------------------------------
// reports

template <class T>
Json subspace_json(const ReductiveSplit<T>& split, const Subspace<T>& s) {
  Json b = Json::array();
  for (const auto& v : s.basis()) b.push_back(split.algebra().format(split.from_m(v)));
  return {{"dim", s.dim()}, {"basis", std::move(b)}};
}

template <class T>
Json decomposition_json(const IsotropyAction<T>& action, const IsotypicalDecomposition<T>& dec,
                        const IdealSplit<T>& ideals) {
  const auto& split = action.split();
  Json j;
  j["dim_g"] = split.algebra().dim();
  j["dim_h"] = split.dim_h();
  j["dim_m"] = split.dim_m();
  Json mb = Json::array();
  for (const auto& v : split.m_basis()) mb.push_back(split.algebra().format(v));
  j["m_basis"] = std::move(mb);
  j["s0"] = subspace_json(split, dec.s0);
  Json sums = Json::array();
  for (const auto& s : dec.summands) {
    Json js;
    js["class_id"] = s.class_id;
    js["trivial"] = s.class_id == 0;
    js["dim"] = s.span.dim();
    js["multiplicity"] = s.members.size();
    js["commutant_dim"] = s.division_dim;
    Json mem = Json::array();
    for (const auto& m : s.members) {
      auto sj = subspace_json(split, m.space);
      sj["commutant_dim"] = m.commutant_dim;
      mem.push_back(std::move(sj));
    }
    js["members"] = std::move(mem);
    sums.push_back(std::move(js));
  }
  j["summands"] = std::move(sums);
  j["intertwiner_dims"] = dec.intertwiner_dims;
  Json id;
  id["center"] = subspace_json(split, ideals.center);
  Json simples = Json::array();
  for (const auto& s : ideals.simples) simples.push_back(subspace_json(split, s));
  id["simple_ideals"] = std::move(simples);
  j["s0_ideals"] = std::move(id);
  j["symmetric_commutant_dim"] = dec.block_parameter_count();
  j["seed"] = dec.seed;
  return j;
}

template <class T>
Json witness_json(const IsotropyAction<T>& action, const Witness<T>& w) {
  const auto& split = action.split();
  return {{"x", split.algebra().format(split.from_m(w.x))},
          {"x_coords", vector_json(w.x)},
          {"a", split.algebra().format(w.a)},
          {"residual2", scalar_json(w.residual2)},
          {"witness_from_map", w.from_map}};
}

template <class T>
Json certificate_json(const IsotropyAction<T>& action, const GOCertificate<T>& c, bool with_witnesses = true) {
  Json j;
  j["verdict"] = verdict_name(c.verdict);
  j["tested"] = c.tested;
  j["seed"] = c.seed;
  j["random_count"] = c.random_count;
  j["polarization_complete"] = c.polarization_complete;
  if (c.falsifier) j["falsifier"] = witness_json(action, *c.falsifier);
  if (with_witnesses) {
    Json ws = Json::array();
    for (const auto& w : c.witnesses) ws.push_back(witness_json(action, w));
    j["witnesses"] = std::move(ws);
  } else {
    j["witness_count"] = c.witnesses.size();
  }
  return j;
}

template <class T>
Json trace_json(const MatrixLieAlgebra<T>& g, const ReductionTrace<T>& trace) {
  Json steps = Json::array();
  for (const auto& s : trace.steps) {
    Json js;
    js["rule"] = s.rule;
    js["subspaces"] = s.subspaces;
    js["detail"] = s.detail;
    Json ws = Json::array();
    for (const auto& w : s.witnesses)
      ws.push_back({{"x", g.format(w.x)},
                    {"y", g.format(w.y)},
                    {"bracket", g.format(w.bracket)},
                    {"target", w.target},
                    {"projection", g.format(w.projection)}});
    js["witnesses"] = std::move(ws);
    steps.push_back(std::move(js));
  }
  return {{"steps", std::move(steps)}, {"notes", trace.notes}};
}

/// Per-summand description of A: the scalar when A is a multiple of the
/// identity there, otherwise the restricted matrix.
template <class T>
Json blocks_json(const IsotypicalDecomposition<T>& dec, const Matrix<T>& a) {
  Json out = Json::array();
  for (const auto& s : dec.summands) {
    Json js;
    js["class_id"] = s.class_id;
    js["dim"] = s.span.dim();
    if (s.span.dim() == 0) continue;
    if (auto c = scalar_on(a, s.span)) {
      js["scalar"] = scalar_json(*c);
    } else {
      Json rows = Json::array();
      for (const auto& u : s.span.basis()) {
        auto img = a * u;
        if (!s.span.contains(img)) {
          js["leaves_summand"] = true;
          continue;
        }
        rows.push_back(vector_json(s.span.coords(img)));
      }
      js["matrix_columns"] = std::move(rows);
    }
    out.push_back(std::move(js));
  }
  return out;
}

template <class T>
Json metric_json(const IsotypicalDecomposition<T>& dec, const MetricEndomorphism<T>& m) {
  return {{"params", vector_json(m.params)},
          {"blocks", blocks_json(dec, m.matrix)},
          {"symmetric", m.symmetric},
          {"equivariant", m.equivariant},
          {"pd", m.positive_definite}};
}

template <class T>
Json family_json(const IsotropyAction<T>& action, const MetricFamily<T>& f) {
  Json gens = Json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    Json eig = Json::array();
    for (const auto& e : eigenstructure(action, f.generators[i]))
      eig.push_back({{"value", scalar_json(e.value)}, {"dim", e.space.dim()}});
    gens.push_back({{"label", f.labels[i]}, {"eigenvalues", std::move(eig)}});
  }
  return {{"dim", f.size()}, {"generators", std::move(gens)}};
}

template <class T>
Json family_verification_json(const StiefelSpace<T>& sp, const FamilyVerification<T>& fv) {
  Json ids = Json::array();
  for (const auto& c : fv.identities) ids.push_back({{"identity", c.name}, {"passed", c.passed}, {"checked", c.checked}});
  Json certs = Json::array();
  for (const auto& c : fv.certificates) {
    Json cj = certificate_json(sp.action, c.certificate, false);
    cj["t"] = scalar_json(c.t);
    bool all_zero = true;
    for (const auto& w : c.certificate.witnesses)
      if (!ScalarTraits<T>::is_exact_zero(w.residual2)) all_zero = false;
    cj["all_residuals_exactly_zero"] = all_zero && !c.certificate.falsifier;
    certs.push_back(std::move(cj));
  }
  return {{"identities", std::move(ids)}, {"certificates", std::move(certs)}, {"verified", fv.all_verified()}};
}

template <class T>
Json scan_json(const StiefelSpace<T>& sp, const UniquenessReport<T>& rep) {
  Json j;
  j["reduced_family"] = family_json(sp.action, rep.reduced.family);
  j["reduced_family_is_A_t_cone"] = rep.reduced_matches_family;
  j["grassmannian_symmetric_commutant_dim"] = rep.grassmannian_commutant;
  j["scan_coordinates"] = rep.blocks.labels;
  const auto& s = rep.summary;
  j["summary"] = {{"points", s.points},
                  {"positive_definite", s.positive_definite},
                  {"survivors", s.survivors},
                  {"survivors_proportional_to_A_t", s.survivors_in_family},
                  {"survivors_outside_A_t", s.survivors_outside_family},
                  {"A_t_points", s.family_points},
                  {"A_t_points_passed", s.family_points_passed},
                  {"falsified", s.falsified},
                  {"falsified_with_positive_residual", s.falsified_with_positive_residual}};
  Json table = Json::array();
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const auto& c = rep.search.candidates[i];
    Json row = Json::array();
    row.push_back(rep.points[i].kind);
    row.push_back(vector_json(c.params));
    if (!c.positive_definite) {
      row.push_back("not-pd");
    } else {
      row.push_back(verdict_name(c.certificate->verdict));
      if (c.certificate->falsifier) row.push_back(scalar_json(c.certificate->falsifier->residual2));
    }
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);
  j["consistent"] = rep.consistent();
  j["notes"] = rep.notes;
  return j;
}

}  // namespace golab
