#pragma once

#include "golab/report.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace golab {

enum ExitCode : int { kExitOk = 0, kExitFalsified = 1, kExitInput = 2, kExitInternal = 3 };

struct RunConfig {
  std::string mode = "exact";
  std::uint64_t seed = 1;
  double tol = 1e-9;
  std::string out;
  std::size_t jobs = 1;
  int verbosity = 0;
};

namespace cli_detail {

inline std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) {
      auto q = msg.find(": ", p);
      msg = q == std::string::npos ? msg.substr(p) : msg.substr(q + 2);
    }
    throw Error(ErrorKind::Parse, path + ": " + position(text, e.byte) + ": " + msg);
  }
}

inline void emit(const RunConfig& cfg, const Json& j, std::ostream& out) {
  std::string text = j.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Parse, "cannot write '" + cfg.out + "'");
  f << text;
}

inline std::size_t parse_size(const std::string& s, const std::string& what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw Error(ErrorKind::Parse, what + " must be a non-negative integer, got '" + s + "'");
  return std::stoul(s);
}

/// A homogeneous space ready for analysis: either a builtin Stiefel space or
/// an algebra/subalgebra pair read from a spec file.
template <class T>
struct Loaded {
  std::shared_ptr<StiefelSpace<T>> stiefel;
  std::shared_ptr<IsotropyAction<T>> generic;
  IsotypicalDecomposition<T> dec;
  IdealSplit<T> ideals;
  Json description;

  const IsotropyAction<T>& action() const { return stiefel ? stiefel->action : *generic; }
};

template <class T>
Loaded<T> load_spec(const Json& spec, std::uint64_t seed) {
  if (!spec.is_object() || !spec.contains("algebra") || !spec.contains("h"))
    throw Error(ErrorKind::Parse, "space spec needs 'algebra' and 'h'");
  const auto& ja = spec.at("algebra");
  AlgebraPtr<T> g;
  if (ja.is_object() && ja.contains("builtin")) {
    if (ja.at("builtin") != "u" || !ja.contains("n")) throw Error(ErrorKind::Parse, "only builtin 'u' with 'n' is known");
    g = std::make_shared<const MatrixLieAlgebra<T>>(build_un<T>(ja.at("n").get<std::size_t>()));
  } else {
    g = std::make_shared<const MatrixLieAlgebra<T>>(algebra_from_json<T>(ja));
  }
  auto report = validate_algebra(*g);
  for (const auto& c : report.checks)
    if (!c.passed)
      throw Error(ErrorKind::Parse, "algebra fails '" + c.name + "'" +
                                        (c.counterexample.empty() ? "" : ": " + c.counterexample));
  std::vector<Vector<T>> hb;
  for (const auto& e : spec.at("h")) {
    if (e.is_string()) {
      hb.push_back(g->unit(g->index_of(e.get<std::string>())));
    } else {
      auto v = parse_vector<T>(e);
      if (v.size() != g->dim()) throw Error(ErrorKind::DimensionMismatch, "h vector has wrong length");
      hb.push_back(std::move(v));
    }
  }
  Loaded<T> l;
  l.generic = std::make_shared<IsotropyAction<T>>(reductive_split(Subalgebra<T>(g, std::move(hb))));
  l.dec = decompose_isotypic(*l.generic, seed);
  l.ideals = split_ideals(*l.generic, l.dec.s0, seed);
  l.description = {{"kind", "spec"}, {"dim_g", g->dim()}};
  return l;
}

template <class T>
Loaded<T> load_space(const std::vector<std::string>& tokens, const std::string& spec_path, std::uint64_t seed) {
  if (!spec_path.empty()) {
    if (!tokens.empty()) throw Error(ErrorKind::Parse, "give either a builtin space or --spec, not both");
    auto l = load_spec<T>(read_json_file(spec_path), seed);
    l.description["file"] = spec_path;
    return l;
  }
  if (tokens.size() != 3 || tokens[0] != "stiefel")
    throw Error(ErrorKind::Parse, "expected a space 'stiefel N K' or --spec FILE");
  auto n = parse_size(tokens[1], "N"), k = parse_size(tokens[2], "K");
  Loaded<T> l;
  l.stiefel = std::make_shared<StiefelSpace<T>>(build_stiefel<T>(n, k, seed));
  l.dec = l.stiefel->dec;
  l.ideals = l.stiefel->ideals;
  l.description = {{"kind", "stiefel"}, {"n", n}, {"k", k}};
  return l;
}

template <class T>
struct MetricInput {
  MetricEndomorphism<T> metric;
  std::optional<Matrix<T>> witness_map;
  std::string kind;
};

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Parse, std::string("metric is missing '") + key + "'");
  return parse_scalar<T>(j.at(key));
}

template <class T>
MetricInput<T> load_metric(const Loaded<T>& sp, const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error(ErrorKind::Parse, "metric file needs a 'kind'");
  const auto& action = sp.action();
  const std::size_t d = action.dim_m();
  MetricInput<T> mi;
  mi.kind = j.at("kind").get<std::string>();
  Matrix<T> a;
  auto need_stiefel = [&] {
    if (!sp.stiefel) throw Error(ErrorKind::Parse, "metric kind '" + mi.kind + "' needs a Stiefel space");
  };
  if (mi.kind == "identity") {
    a = Matrix<T>::identity(d);
    mi.witness_map = Matrix<T>(action.algebra().dim(), d);
  } else if (mi.kind == "A_t") {
    need_stiefel();
    T t = field<T>(j, "t");
    if (!ScalarTraits<T>::is_positive(t)) throw Error(ErrorKind::NotPositiveDefinite, "A_t needs t > 0");
    a = family_metric(*sp.stiefel, t);
    mi.witness_map = family_witness_map(*sp.stiefel, t);
  } else if (mi.kind == "stiefel_blocks") {
    need_stiefel();
    T mu = field<T>(j, "mu"), lambda = field<T>(j, "lambda"), lt = field<T>(j, "lambda_tilde");
    a = block_metric(*sp.stiefel, mu, lambda, lt);
    if ((sp.stiefel->k == 1 || is_zero(lambda - lt)) && ScalarTraits<T>::is_positive(lt))
      mi.witness_map = family_witness_map(*sp.stiefel, T(mu / lt));
  } else if (mi.kind == "params") {
    if (!j.contains("params")) throw Error(ErrorKind::Parse, "metric is missing 'params'");
    auto fam = full_family(action);
    a = fam.at(parse_vector<T>(j.at("params")));
  } else if (mi.kind == "matrix") {
    if (!j.contains("rows") || !j.at("rows").is_array() || j.at("rows").size() != d)
      throw Error(ErrorKind::Parse, "metric 'rows' must be a " + std::to_string(d) + " x " + std::to_string(d) +
                                        " array in m-coordinates");
    a = Matrix<T>(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      auto row = parse_vector<T>(j.at("rows")[i]);
      if (row.size() != d) throw Error(ErrorKind::Parse, "metric row " + std::to_string(i) + " has wrong length");
      for (std::size_t c = 0; c < d; ++c) a(i, c) = row[c];
    }
  } else {
    throw Error(ErrorKind::Parse, "unknown metric kind '" + mi.kind + "'");
  }
  mi.metric = make_metric(action, std::move(a));
  if (!mi.metric.symmetric) throw Error(ErrorKind::Parse, "metric is not B-symmetric");
  if (!mi.metric.equivariant) throw Error(ErrorKind::Parse, "metric is not Ad(H)-equivariant");
  if (!mi.metric.positive_definite) throw Error(ErrorKind::NotPositiveDefinite, "metric is not positive definite");
  if (auto c = coordinates_in(full_family(action), mi.metric.matrix)) mi.metric.params = *c;
  return mi;
}

struct Options {
  std::vector<std::string> space;
  std::string spec;
  std::string metric;
  std::string strategy = "basis";
  std::optional<std::size_t> samples;
  std::string resolution = "1/4";
  std::string upper = "4";
  std::size_t scan_samples = 8;
  std::size_t export_n = 0;
  std::size_t export_k = 0;
};

template <class T>
Json header(const char* command, const RunConfig& cfg) {
  return {{"command", command}, {"mode", ScalarTraits<T>::name}, {"seed", cfg.seed}};
}

template <class T>
int cmd_decompose(const RunConfig& cfg, const Options& o, std::ostream& out) {
  auto sp = load_space<T>(o.space, o.spec, cfg.seed);
  Json j = header<T>("decompose", cfg);
  j["space"] = sp.description;
  j["decomposition"] = decomposition_json(sp.action(), sp.dec, sp.ideals);
  emit(cfg, j, out);
  return kExitOk;
}

template <class T>
int cmd_check_go(const RunConfig& cfg, const Options& o, std::ostream& out) {
  auto sp = load_space<T>(o.space, o.spec, cfg.seed);
  if (o.metric.empty()) throw Error(ErrorKind::Parse, "check-go needs --metric FILE");
  auto mi = load_metric(sp, read_json_file(o.metric));
  GoStrategy<T> st;
  st.seed = cfg.seed;
  st.jobs = cfg.jobs;
  if (o.strategy == "basis") {
    st.basis = true;
    st.random_count = o.samples.value_or(0);
  } else if (o.strategy == "random") {
    st.basis = false;
    st.random_count = o.samples.value_or(100);
  } else if (o.strategy == "family") {
    if (!mi.witness_map)
      throw Error(ErrorKind::Parse, "no closed-form witness map is known for metric kind '" + mi.kind + "'");
    st.basis = true;
    st.random_count = o.samples.value_or(100);
    st.witness_map = mi.witness_map;
  } else {
    throw Error(ErrorKind::Parse, "unknown strategy '" + o.strategy + "'");
  }
  auto cert = go_check(sp.action(), mi.metric.matrix, st);
  Json j = header<T>("check-go", cfg);
  j["space"] = sp.description;
  j["metric"] = metric_json(sp.dec, mi.metric);
  j["metric"]["kind"] = mi.kind;
  j["strategy"] = {{"name", o.strategy}, {"basis_and_pairs", st.basis}, {"random", st.random_count}};
  j["normalizer_equivariant"] = check_normalizer_equivariance(sp.action(), mi.metric.matrix, sp.dec.s0);
  j["certificate"] = certificate_json(sp.action(), cert);
  emit(cfg, j, out);
  return cert.passed() ? kExitOk : kExitFalsified;
}

template <class T>
int cmd_reproduce(const RunConfig& cfg, const Options& o, std::ostream& out, std::ostream& err) {
  if (o.space.size() != 2) throw Error(ErrorKind::Parse, "reproduce-theorem needs N K");
  auto n = parse_size(o.space[0], "N"), k = parse_size(o.space[1], "K");
  if (n > 6 || k < 1 || k >= n)
    throw Error(ErrorKind::InvalidDimension, "reproduce-theorem needs 1 <= K < N <= 6, got N=" + std::to_string(n) +
                                                 ", K=" + std::to_string(k));
  T step = ScalarTraits<T>::parse(o.resolution), hi = ScalarTraits<T>::parse(o.upper);
  if (!ScalarTraits<T>::is_positive(step) || hi < step)
    throw Error(ErrorKind::Parse, "resolution must be positive and at most the upper bound");
  auto log = [&](const std::string& s) {
    if (cfg.verbosity > 0) err << s << "\n";
  };
  log("building V_" + std::to_string(k) + "C^" + std::to_string(n));
  auto sp = build_stiefel<T>(n, k, cfg.seed);
  log("verifying the family A_t");
  std::vector<T> ts{from_ratio<T>(1, 2), T(1), T(2), T(3)};
  auto fv = verify_family(sp, ts, o.samples.value_or(100), cfg.seed, cfg.jobs);
  log("scanning the commutant cone");
  auto rep = uniqueness_scan(sp, step, hi, cfg.seed, cfg.jobs, o.scan_samples);
  bool verified = fv.all_verified();
  if constexpr (!ScalarTraits<T>::exact) {
    verified = true;
    for (const auto& c : fv.certificates) verified = verified && c.certificate.passed();
    for (const auto& c : fv.identities) verified = verified && c.passed;
  }
  Json j = header<T>("reproduce-theorem", cfg);
  j["space"] = {{"n", n}, {"k", k}, {"dim_m", sp.dim_m()}};
  j["decomposition"] = decomposition_json(sp.action, sp.dec, sp.ideals);
  j["reduction"] = trace_json(*sp.g, rep.reduced.trace);
  j["family"] = {{"description", "A_t = Id on su(k) + S1, t Id on z(S0), t > 0"},
                 {"witness", "a_t = r (1 - t) sum_{i>k} eb_ii, r = B(X, z0) / B(z0, z0)"}};
  j["verification"] = family_verification_json(sp, fv);
  j["uniqueness"] = scan_json(sp, rep);
  j["resolution"] = {{"step", scalar_json(step)}, {"upper", scalar_json(hi)}, {"scan_random_samples", o.scan_samples}};
  bool ok = verified && rep.consistent();
  j["conclusion"] = ok ? "A_t verified; uniqueness verified at scan resolution (every passing point is a multiple of some A_t)"
                       : "inconsistent: see verification and uniqueness sections";
  emit(cfg, j, out);
  return ok ? kExitOk : kExitFalsified;
}

inline int cmd_export(const RunConfig& cfg, const Options& o, std::ostream& out) {
  auto g = build_un<Rational>(o.export_n);
  Json j;
  j["algebra"] = algebra_to_json(g);
  Json h = Json::array();
  if (o.export_k > 0) {
    auto ptr = std::make_shared<const MatrixLieAlgebra<Rational>>(g);
    auto sub = diagonal_u_nk<Rational>(ptr, o.export_k);
    for (const auto& v : sub.basis())
      for (std::size_t i = 0; i < v.size(); ++i)
        if (!v[i].is_zero()) h.push_back(g.label(i));
  }
  j["h"] = std::move(h);
  emit(cfg, j, out);
  return kExitOk;
}

}  // namespace cli_detail

/// Command-line entry point. Returns the process exit code:
/// 0 pass, 1 falsified or inconsistent, 2 input error, 3 internal error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  RunConfig cfg;
  Options o;
  CLI::App app{"Geodesic orbit metric toolkit for homogeneous spaces G/H"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  app.add_option("--mode", cfg.mode, "Arithmetic backend")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--seed", seed, "Seed for all randomized steps (fallback: GO_METRIC_LAB_SEED, then 1)");
  app.add_option("--tol", tol, "Zero tolerance of the float backend");
  app.add_option("--out", cfg.out, "Write the JSON report to this file");
  app.add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", cfg.verbosity, "Progress messages on stderr");

  auto* dec = app.add_subcommand("decompose", "Isotypical decomposition of the isotropy representation");
  dec->add_option("space", o.space, "stiefel N K");
  dec->add_option("--spec", o.spec, "JSON file with 'algebra' and 'h'");

  auto* chk = app.add_subcommand("check-go", "Test the GO equation for one metric");
  chk->add_option("space", o.space, "stiefel N K");
  chk->add_option("--spec", o.spec, "JSON file with 'algebra' and 'h'");
  chk->add_option("--metric", o.metric, "JSON metric file")->required();
  chk->add_option("--strategy", o.strategy, "basis | random | family")
      ->check(CLI::IsMember({"basis", "random", "family"}));
  chk->add_option("--samples", o.samples, "Number of random X");

  auto* rep = app.add_subcommand("reproduce-theorem", "Classification pipeline for U(n)/U(n-k)");
  rep->add_option("nk", o.space, "N K")->expected(2)->required();
  rep->add_option("--resolution", o.resolution, "Grid step of the scan (rational)");
  rep->add_option("--upper", o.upper, "Upper end of the scan grid (rational)");
  rep->add_option("--samples", o.samples, "Random X per t when verifying A_t");
  rep->add_option("--scan-samples", o.scan_samples, "Random X per scanned metric");

  auto* exp = app.add_subcommand("export-algebra", "Write u(n) (and diagonal u(n-k)) as a spec file");
  exp->add_option("n", o.export_n, "n")->required()->check(CLI::PositiveNumber);
  exp->add_option("--k", o.export_k, "Include h = diagonal u(n-k)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (seed) {
      cfg.seed = *seed;
    } else if (const char* env = std::getenv("GO_METRIC_LAB_SEED"); env && *env) {
      cfg.seed = parse_size(env, "GO_METRIC_LAB_SEED");
    }
    if (tol) {
      if (!(*tol > 0)) throw Error(ErrorKind::Parse, "--tol must be positive");
      cfg.tol = *tol;
    }
    set_float_tolerance(cfg.tol);
    const bool exact = cfg.mode == "exact";
    if (app.got_subcommand(dec))
      return exact ? cmd_decompose<Rational>(cfg, o, out) : cmd_decompose<double>(cfg, o, out);
    if (app.got_subcommand(chk))
      return exact ? cmd_check_go<Rational>(cfg, o, out) : cmd_check_go<double>(cfg, o, out);
    if (app.got_subcommand(rep))
      return exact ? cmd_reproduce<Rational>(cfg, o, out, err) : cmd_reproduce<double>(cfg, o, out, err);
    return cmd_export(cfg, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return (e.kind() == ErrorKind::Internal || e.kind() == ErrorKind::Ambiguous) ? kExitInternal : kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace golab
