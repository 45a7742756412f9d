// Copyright 2026 The entcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "entcert/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include <yaml-cpp/yaml.h>

#include "entcert/certifier.hpp"
#include "entcert/contraction.hpp"
#include "entcert/gff.hpp"
#include "entcert/langevin.hpp"
#include "entcert/sphere.hpp"
#include "entcert/transport.hpp"

namespace entcert {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// YAML

json scalar_value(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") {
    return nullptr;
  }
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (s[0] != '+') {
    long long i = 0;
    auto [p, ec] = std::from_chars(begin, end, i);
    if (ec == std::errc() && p == end) return i;
  }
  char* stop = nullptr;
  double d = std::strtod(s.c_str(), &stop);
  if (stop == end && std::isfinite(d)) return d;
  return s;
}

json from_yaml(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Scalar:
      return scalar_value(node);
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(from_yaml(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = from_yaml(kv.second);
      return out;
    }
    default:
      return nullptr;
  }
}

// ---------------------------------------------------------------------------
// Field access with dotted names in error messages.

class Fields {
 public:
  Fields(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object() && !j_.is_null()) {
      throw ParseError((path_.empty() ? std::string("config") : path_) +
                       ": expected a mapping");
    }
  }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const {
    return j_.is_object() && j_.contains(key) && !j_.at(key).is_null();
  }
  const json& at(const std::string& key) const {
    if (!has(key)) throw ParseError(name(key) + ": missing");
    return j_.at(key);
  }
  const json& raw() const { return j_; }

  std::size_t size(const std::string& key) const {
    const json& v = at(key);
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::size_t>(v.get<long long>());
    }
    if (v.is_number_float() && v.get<double>() >= 0 &&
        v.get<double>() == std::floor(v.get<double>()) && v.get<double>() < 1e15) {
      return static_cast<std::size_t>(v.get<double>());
    }
    throw ParseError(name(key) + ": expected a nonnegative integer");
  }
  std::size_t size_or(const std::string& key, std::size_t def) const {
    return has(key) ? size(key) : def;
  }
  std::uint64_t seed_or(const std::string& key, std::uint64_t def) const {
    return has(key) ? static_cast<std::uint64_t>(size(key)) : def;
  }
  double number(const std::string& key) const {
    const json& v = at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        return static_cast<double>(parse_rational(v.get<std::string>()));
      } catch (const ParseError&) {
      }
    }
    throw ParseError(name(key) + ": expected a number");
  }
  double number_or(const std::string& key, double def) const {
    return has(key) ? number(key) : def;
  }
  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ParseError(name(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const std::string& key, const std::string& def) const {
    return has(key) ? string(key) : def;
  }
  bool boolean_or(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_boolean()) throw ParseError(name(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ParseError(name(key) + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ParseError(name(key) + ": expected a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Fields child(const std::string& key) const {
    static const json kEmpty = json::object();
    return has(key) ? Fields(at(key), name(key)) : Fields(kEmpty, name(key));
  }
  void allow(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) return;
    for (const auto& item : j_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || item.key() == k;
      if (!known) throw ParseError(name(item.key()) + ": unknown field");
    }
  }

 private:
  json j_;
  std::string path_;
};

template <class S>
S scalar_from(const json& v, const std::string& where) {
  if (v.is_number_integer()) return S(v.get<long long>());
  if (v.is_number_float()) {
    if constexpr (ScalarTraits<S>::exact) {
      // Shortest round-trip text, so 0.1 reads as 1/10.
      try {
        return parse_rational(v.dump());
      } catch (const ParseError&) {
        return Rational(v.get<double>());
      }
    } else {
      return v.get<double>();
    }
  }
  if (v.is_string()) {
    try {
      Rational r = parse_rational(v.get<std::string>());
      if constexpr (ScalarTraits<S>::exact) {
        return r;
      } else {
        return static_cast<double>(r);
      }
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  throw ParseError(where + ": expected a number");
}

template <class S>
std::vector<S> scalars_from(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected a list of numbers");
  std::vector<S> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(scalar_from<S>(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <class S>
std::vector<S> matrix_from(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) {
    throw ParseError(where + ": expected " + std::to_string(n) + " rows");
  }
  std::vector<S> out;
  out.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = scalars_from<S>(v[i], where + "[" + std::to_string(i) + "]");
    if (row.size() != n) {
      throw ParseError(where + "[" + std::to_string(i) + "]: expected " +
                       std::to_string(n) + " entries");
    }
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

template <class S>
json scalar_json(const S& v) {
  return to_double(v);
}

template <class S>
void put_exact(json& out, const std::string& key, const S& v) {
  if constexpr (ScalarTraits<S>::exact) out[key] = rational_to_string(v);
}

// ---------------------------------------------------------------------------
// Blocks and weights

std::vector<Mask> parse_blocks(const Fields& f, std::size_t n) {
  if (!f.has("blocks")) return block_pattern(n, "singletons");
  const json& b = f.at("blocks");
  if (b.is_string()) {
    try {
      return block_pattern(n, b.get<std::string>());
    } catch (const Error& e) {
      throw ParseError(f.name("blocks") + ": " + e.what());
    }
  }
  if (!b.is_array() || b.empty()) {
    throw ParseError(f.name("blocks") + ": expected a pattern name or a list of index lists");
  }
  std::vector<Mask> out;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const std::string where = f.name("blocks") + "[" + std::to_string(k) + "]";
    if (!b[k].is_array() || b[k].empty()) {
      throw ParseError(where + ": expected a nonempty list of coordinates");
    }
    Mask m = 0;
    for (const auto& i : b[k]) {
      if (!i.is_number_integer() || i.get<long long>() < 0 ||
          static_cast<std::size_t>(i.get<long long>()) >= n) {
        throw ParseError(where + ": coordinates must be integers in [0, " +
                         std::to_string(n) + ")");
      }
      m |= Mask(1) << i.get<long long>();
    }
    out.push_back(m);
  }
  return out;
}

template <class S>
BasicBlockWeights<S> parse_weights(const Fields& f, const std::string& key,
                                   std::size_t count) {
  if (!f.has(key) || (f.at(key).is_string() && f.at(key) == "uniform")) {
    return BasicBlockWeights<S>::uniform(count);
  }
  auto w = scalars_from<S>(f.at(key), f.name(key));
  if (w.size() != count) {
    throw ParseError(f.name(key) + ": expected " + std::to_string(count) +
                     " weights, got " + std::to_string(w.size()));
  }
  return BasicBlockWeights<S>(std::move(w));
}

template <class S>
BasicBlockFamily<S> parse_family(const Fields& f, std::size_t n) {
  if (n == 0 || n > kMaxCoordinates) {
    throw ParseError(f.name("n") + ": block families need 1.." +
                     std::to_string(kMaxCoordinates) + " coordinates");
  }
  auto blocks = parse_blocks(f, n);
  auto theta = parse_weights<S>(f, "theta", blocks.size());
  try {
    return BasicBlockFamily<S>(n, std::move(blocks), std::move(theta));
  } catch (const UsageError& e) {
    throw ParseError(f.name("blocks") + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Finite models

template <class S>
BasicModel<S> build_custom(const Fields& f) {
  const json& states = f.at("states");
  if (!states.is_array() || states.empty()) {
    throw ParseError(f.name("states") + ": expected a list of labels");
  }
  std::vector<std::string> labels;
  for (const auto& s : states) {
    if (!s.is_string()) throw ParseError(f.name("states") + ": labels must be strings");
    labels.push_back(s.get<std::string>());
  }
  const std::size_t n = labels.size();
  SpacePtr<S> space;
  if (!f.has("P") || (f.at("P").is_string() && f.at("P") == "uniform")) {
    space = std::make_shared<const BasicFiniteSpace<S>>(
        BasicFiniteSpace<S>::uniform(labels));
  } else {
    auto probs = scalars_from<S>(f.at("P"), f.name("P"));
    space = std::make_shared<const BasicFiniteSpace<S>>(labels, std::move(probs));
  }
  const json& ks = f.at("kernels");
  if (!ks.is_array() || ks.empty()) {
    throw ParseError(f.name("kernels") + ": expected a list of matrices");
  }
  std::vector<BasicMarkovKernel<S>> kernels;
  for (std::size_t k = 0; k < ks.size(); ++k) {
    kernels.push_back(BasicMarkovKernel<S>::from_dense(
        space, matrix_from<S>(ks[k], n, f.name("kernels") + "[" + std::to_string(k) + "]")));
  }
  auto theta = parse_weights<S>(f, "theta", kernels.size());

  Fields mf = f.child("metric");
  mf.allow({"matrix", "edges", "lengths"});
  auto endpoint = [&](const json& v, const std::string& where) -> std::size_t {
    if (v.is_number_integer() && v.get<long long>() >= 0 &&
        static_cast<std::size_t>(v.get<long long>()) < n) {
      return static_cast<std::size_t>(v.get<long long>());
    }
    if (v.is_string()) {
      if (auto idx = space->find(v.get<std::string>())) return *idx;
    }
    throw ParseError(where + ": unknown state");
  };
  std::optional<std::vector<Edge>> edges;
  if (mf.has("edges")) {
    const json& e = mf.at("edges");
    if (!e.is_array()) throw ParseError(mf.name("edges") + ": expected a list of pairs");
    edges.emplace();
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string where = mf.name("edges") + "[" + std::to_string(i) + "]";
      if (!e[i].is_array() || e[i].size() != 2) throw ParseError(where + ": expected a pair");
      edges->push_back({endpoint(e[i][0], where), endpoint(e[i][1], where)});
    }
  }
  std::optional<BasicMetric<S>> metric;
  if (mf.has("matrix")) {
    metric = BasicMetric<S>::from_matrix(n, matrix_from<S>(mf.at("matrix"), n, mf.name("matrix")),
                                         edges);
  } else if (edges) {
    std::vector<S> lengths;
    if (mf.has("lengths")) lengths = scalars_from<S>(mf.at("lengths"), mf.name("lengths"));
    metric = BasicMetric<S>::from_edges(n, *edges, std::move(lengths));
  } else {
    throw ParseError(mf.name("matrix") + ": metric needs a matrix or an edge list");
  }
  return BasicModel<S>{"custom", space, std::move(kernels), std::move(theta),
                       std::move(*metric), std::nullopt, {}};
}

template <class S>
BasicModel<S> build_finite(const std::string& kind, const Fields& f) {
  if (kind == "product") {
    f.allow({"kind", "n", "sizes", "marginals", "blocks", "theta"});
    std::vector<std::size_t> sizes;
    if (f.has("sizes")) {
      const json& s = f.at("sizes");
      if (!s.is_array() || s.empty()) throw ParseError(f.name("sizes") + ": expected a list");
      for (const auto& v : s) {
        if (!v.is_number_integer() || v.get<long long>() < 1) {
          throw ParseError(f.name("sizes") + ": sizes must be positive integers");
        }
        sizes.push_back(static_cast<std::size_t>(v.get<long long>()));
      }
      if (f.has("n") && f.size("n") != sizes.size()) {
        throw ParseError(f.name("n") + ": disagrees with sizes");
      }
    } else {
      sizes.assign(f.size("n"), 2);
    }
    std::vector<std::vector<S>> marginals;
    if (f.has("marginals")) {
      const json& m = f.at("marginals");
      if (!m.is_array()) throw ParseError(f.name("marginals") + ": expected a list");
      for (std::size_t i = 0; i < m.size(); ++i) {
        marginals.push_back(scalars_from<S>(m[i], f.name("marginals") + "[" + std::to_string(i) + "]"));
      }
    }
    auto family = parse_family<S>(f, sizes.size());
    return build_product<S>(sizes, family, marginals);
  }
  if (kind == "nsets") {
    f.allow({"kind", "N", "n", "k", "mixture"});
    const std::size_t N = f.size("N"), n = f.size("n");
    if (f.has("mixture")) {
      auto w = scalars_from<S>(f.at("mixture"), f.name("mixture"));
      if (w.size() != n) {
        throw ParseError(f.name("mixture") + ": expected one weight per k = 1..n");
      }
      return build_nsets_mixture<S>(N, n, BasicBlockWeights<S>(std::move(w)));
    }
    return build_nsets<S>(N, n, f.size("k"));
  }
  if (kind == "permutations") {
    f.allow({"kind", "n", "blocks", "theta"});
    const std::size_t n = f.size("n");
    return build_permutations<S>(n, parse_family<S>(f, n));
  }
  if (kind == "custom") {
    f.allow({"kind", "states", "P", "kernels", "theta", "metric"});
    return build_custom<S>(f);
  }
  throw ParseError(f.name("kind") + ": unknown model '" + kind + "'");
}

Model numeric_copy(const ExactModel& e) {
  Model m{e.kind, to_double(*e.space), {}, to_double(e.theta), to_double(e.metric),
          std::nullopt, e.theory};
  for (const auto& k : e.kernels) m.kernels.push_back(to_double(k, m.space));
  if (e.family) {
    m.family.emplace(e.family->coordinates(), e.family->blocks(),
                     to_double(e.family->theta()));
  }
  return m;
}

bool is_finite_kind(const std::string& k) {
  return k == "product" || k == "nsets" || k == "permutations" || k == "custom";
}
bool is_gff_kind(const std::string& k) {
  return k == "gff" || k == "lattice" || k == "random-gff";
}

// ---------------------------------------------------------------------------
// Report helpers

template <class S>
json cert_json(const BasicCertReport<S>& r, const BasicFiniteSpace<S>& space) {
  json out;
  out["kappa"] = scalar_json(r.kappa);
  put_exact(out, "kappa_exact", r.kappa);
  json ell = json::array(), ell_exact = json::array(), worst = json::array();
  for (std::size_t i = 0; i < r.ell.size(); ++i) {
    ell.push_back(scalar_json(r.ell[i]));
    if constexpr (ScalarTraits<S>::exact) ell_exact.push_back(rational_to_string(r.ell[i]));
    worst.push_back({space.label(r.ell_worst_pairs[i].first),
                     space.label(r.ell_worst_pairs[i].second)});
  }
  out["ell"] = ell;
  if constexpr (ScalarTraits<S>::exact) out["ell_exact"] = ell_exact;
  out["ell_worst_pairs"] = worst;
  out["max_ratio"] = scalar_json(r.max_ratio);
  put_exact(out, "max_ratio_exact", r.max_ratio);
  out["worst_pair"] = r.worst_pair_labels;
  out["pair_mode"] = pair_mode_name(r.pair_mode);
  out["pair_count"] = r.pair_count;
  out["spot_checks"] = r.spot_checks;
  out["scalar"] = ScalarTraits<S>::name();
  return out;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

class Assertions {
 public:
  void add(const std::string& name, bool ok, double value, double bound,
           const std::string& relation) {
    list_.push_back({{"name", name},
                     {"passed", ok},
                     {"value", value},
                     {"relation", relation},
                     {"bound", bound}});
    if (!ok) failed_.push_back(name);
  }
  void at_most(const std::string& name, double value, double bound) {
    add(name, value <= bound, value, bound, "<=");
  }
  void at_least(const std::string& name, double value, double bound) {
    add(name, value >= bound, value, bound, ">=");
  }
  void greater(const std::string& name, double value, double bound) {
    add(name, value > bound, value, bound, ">");
  }
  const json& list() const { return list_; }
  const std::vector<std::string>& failed() const { return failed_; }

 private:
  json list_ = json::array();
  std::vector<std::string> failed_;
};

struct Tolerances {
  double sandwich = 1e-6;
  double spectral = 1e-9;
  double exactness = 1e-9;
  double lipschitz = 1e-9;
  double duality = 1e-10;
  double gff_identity = 1e-8;
  double gff_curvature = 1e-9;
  double lattice = 1e-10;
  double sphere = 1e-9;
  double rate = 0.05;
  double ou_rate = 0.01;
  double envelope = 1.2;

  json to_json() const {
    return {{"sandwich", sandwich},         {"spectral", spectral},
            {"exactness", exactness},       {"lipschitz", lipschitz},
            {"duality", duality},           {"gff_identity", gff_identity},
            {"gff_curvature", gff_curvature}, {"lattice", lattice},
            {"sphere", sphere},             {"rate", rate},
            {"ou_rate", ou_rate},           {"envelope", envelope}};
  }
};

Tolerances parse_tolerances(const Fields& f) {
  f.allow({"sandwich", "spectral", "exactness", "lipschitz", "duality", "gff_identity",
           "gff_curvature", "lattice", "sphere", "rate", "ou_rate", "envelope"});
  Tolerances t;
  t.sandwich = f.number_or("sandwich", t.sandwich);
  t.spectral = f.number_or("spectral", t.spectral);
  t.exactness = f.number_or("exactness", t.exactness);
  t.lipschitz = f.number_or("lipschitz", t.lipschitz);
  t.duality = f.number_or("duality", t.duality);
  t.gff_identity = f.number_or("gff_identity", t.gff_identity);
  t.gff_curvature = f.number_or("gff_curvature", t.gff_curvature);
  t.lattice = f.number_or("lattice", t.lattice);
  t.sphere = f.number_or("sphere", t.sphere);
  t.rate = f.number_or("rate", t.rate);
  t.ou_rate = f.number_or("ou_rate", t.ou_rate);
  t.envelope = f.number_or("envelope", t.envelope);
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------

json parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  json out = from_yaml(root);
  if (!out.is_object()) throw ParseError("config: top level must be a mapping");
  return out;
}

LoadedModel load_model(const json& descriptor, bool exact) {
  Fields f(descriptor, "model");
  LoadedModel lm;
  lm.kind = f.string("kind");
  lm.descriptor = descriptor;
  lm.exact = exact;
  if (!is_finite_kind(lm.kind)) {
    throw ParseError(f.name("kind") + ": '" + lm.kind + "' is not a finite model");
  }
  if (exact) {
    lm.exact_model = build_finite<Rational>(lm.kind, f);
    lm.model = numeric_copy(*lm.exact_model);
  } else {
    lm.model = build_finite<double>(lm.kind, f);
  }
  return lm;
}

TaskOutput certify_task(const LoadedModel& m, const json& options) {
  Fields o(options, "certify");
  o.allow({"pair_mode", "spot_checks", "seed", "ell"});
  const auto mode = parse_pair_mode(o.string_or("pair_mode", "exhaustive"));
  const auto t0 = Clock::now();
  TaskOutput out;
  if (m.exact) {
    const auto& em = *m.exact_model;
    CertifyOptions<Rational> opts;
    opts.spot_checks = o.size_or("spot_checks", opts.spot_checks);
    opts.seed = o.seed_or("seed", opts.seed);
    if (o.has("ell")) opts.ell_override = scalars_from<Rational>(o.at("ell"), o.name("ell"));
    auto rep = certify_kappa(em.kernels, em.theta, em.metric,
                             pair_set(*em.space, em.metric, mode), opts);
    out.report = cert_json(rep, *em.space);
    out.kappa = to_double(rep.kappa);
  } else {
    const auto& nm = *m.model;
    CertifyOptions<double> opts;
    opts.spot_checks = o.size_or("spot_checks", opts.spot_checks);
    opts.seed = o.seed_or("seed", opts.seed);
    if (o.has("ell")) opts.ell_override = scalars_from<double>(o.at("ell"), o.name("ell"));
    auto rep = certify_kappa(nm.kernels, nm.theta, nm.metric,
                             pair_set(*nm.space, nm.metric, mode), opts);
    out.report = cert_json(rep, *nm.space);
    out.kappa = rep.kappa;
  }
  out.seconds = since(t0);
  return out;
}

TaskOutput estimate_task(const LoadedModel& m, const json& options) {
  Fields o(options, "estimate");
  o.allow({"restarts", "max_iters", "step", "tol", "clamp", "seed_epsilon",
           "lambda_iters", "seed", "witness"});
  EstimateConfig cfg;
  cfg.restarts = o.size_or("restarts", cfg.restarts);
  cfg.max_iters = o.size_or("max_iters", cfg.max_iters);
  cfg.step = o.number_or("step", cfg.step);
  cfg.tol = o.number_or("tol", cfg.tol);
  cfg.clamp = o.number_or("clamp", cfg.clamp);
  cfg.seed_epsilon = o.number_or("seed_epsilon", cfg.seed_epsilon);
  cfg.lambda_iters = o.size_or("lambda_iters", cfg.lambda_iters);
  cfg.seed = o.seed_or("seed", cfg.seed);
  const auto t0 = Clock::now();
  const auto& nm = m.numeric();
  KernelFamily family(nm.kernels, nm.theta);
  auto rep = estimate_rho(family, cfg, &nm.metric);
  TaskOutput out;
  out.seconds = since(t0);
  out.report = {{"rho_est", rep.rho_est},
                {"spectral_factor", rep.spectral_factor},
                {"iterations", rep.iterations},
                {"converged", rep.converged},
                {"best_restart", rep.best_restart},
                {"best_method", rep.best_method},
                {"restart_values", rep.restart_values},
                {"lambda_iteration_value", rep.lambda_iteration_value}};
  if (o.boolean_or("witness", false)) out.report["witness"] = rep.witness;
  return out;
}

TaskOutput spectral_task(const LoadedModel& m) {
  const auto t0 = Clock::now();
  const auto& nm = m.numeric();
  KernelFamily family(nm.kernels, nm.theta);
  auto r = variance_contraction_spectral(family);
  TaskOutput out;
  out.seconds = since(t0);
  out.report = {{"factor", r.factor}, {"method", r.dense ? "dense" : "power-iteration"}};
  return out;
}

TaskOutput duality_task(const LoadedModel& m, double kappa, const json& options) {
  Fields o(options, "duality");
  o.allow({"trials", "seed", "range"});
  TaskOutput out;
  out.report["kappa"] = kappa;
  if (!(kappa > 0 && kappa < 1)) {
    out.report["skipped"] = "needs 0 < kappa < 1";
    return out;
  }
  const auto t0 = Clock::now();
  const auto& nm = m.numeric();
  KernelFamily family(nm.kernels, nm.theta);
  auto r = bl_duality_check(family, kappa, o.size_or("trials", 1000), o.seed_or("seed", 1),
                            o.number_or("range", 2.0));
  out.seconds = since(t0);
  out.report["max_violation"] = r.max_violation;
  out.report["trials"] = r.trials;
  out.report["exponents"] = r.exponents;
  out.report["worst_log_lhs"] = r.worst_lhs;
  out.report["worst_log_rhs"] = r.worst_rhs;
  return out;
}

TaskOutput lipschitz_task(const LoadedModel& m, double kappa, const json& options) {
  Fields o(options, "lipschitz");
  o.allow({"samples", "seed", "pair_mode"});
  const auto t0 = Clock::now();
  const auto& nm = m.numeric();
  KernelFamily family(nm.kernels, nm.theta);
  auto pairs = pair_set(*nm.space, nm.metric,
                        parse_pair_mode(o.string_or("pair_mode", "exhaustive")));
  auto r = lambda_contraction_check(family, nm.metric, pairs, kappa,
                                    o.size_or("samples", 1000), o.seed_or("seed", 1));
  TaskOutput out;
  out.seconds = since(t0);
  out.report = {{"kappa", kappa},
                {"samples", r.samples},
                {"max_excess", r.max_excess},
                {"worst_ratio", r.worst_ratio}};
  return out;
}

namespace {

template <class S>
json wasserstein_impl(const Fields& f, bool plans) {
  const json& d = f.at("dist");
  if (!d.is_array() || d.empty()) throw ParseError(f.name("dist") + ": expected a square matrix");
  const std::size_t n = d.size();
  auto metric = BasicMetric<S>::from_matrix(n, matrix_from<S>(d, n, f.name("dist")));
  auto mu = scalars_from<S>(f.at("mu"), f.name("mu"));
  auto nu = scalars_from<S>(f.at("nu"), f.name("nu"));
  auto a = w1<S>(mu, nu, metric);
  auto b = winf<S>(mu, nu, metric);
  json out;
  out["states"] = n;
  out["scalar"] = ScalarTraits<S>::name();
  out["w1"] = scalar_json(a.value);
  put_exact(out, "w1_exact", a.value);
  out["winf"] = scalar_json(b.value);
  put_exact(out, "winf_exact", b.value);
  if (plans) {
    auto plan_json = [](const BasicTransportPlan<S>& p) {
      json rows = json::array();
      for (const auto& e : p.entries) {
        json row = {{"from", e.from}, {"to", e.to}, {"mass", scalar_json(e.mass)}};
        put_exact(row, "mass_exact", e.mass);
        rows.push_back(row);
      }
      return rows;
    };
    out["plans"] = {{"w1", plan_json(a.plan)}, {"winf", plan_json(b.plan)}};
  }
  return out;
}

}  // namespace

json wasserstein_request(const json& request) {
  Fields f(request, "wasserstein");
  f.allow({"dist", "mu", "nu", "exact", "plans"});
  const bool plans = f.boolean_or("plans", false);
  return f.boolean_or("exact", false) ? wasserstein_impl<Rational>(f, plans)
                                      : wasserstein_impl<double>(f, plans);
}

// ---------------------------------------------------------------------------
// Runs

namespace {

const std::set<std::string> kTopLevel = {
    "schema_version", "name", "model", "tasks", "seed", "tolerances", "output",
    "exact", "certify", "estimate", "spectral", "duality", "lipschitz", "gff",
    "sphere", "langevin"};

const std::set<std::string> kFiniteTasks = {"certify", "estimate", "spectral",
                                            "duality", "lipschitz"};

// Options for a task with the run seed filled in.
json task_options(const json& config, const std::string& task, std::uint64_t seed) {
  json o = json::object();
  if (config.contains(task) && !config.at(task).is_null()) {
    if (!config.at(task).is_object()) throw ParseError(task + ": expected a mapping");
    o = config.at(task);
  }
  if (!o.contains("seed")) o["seed"] = seed;
  return o;
}

std::pair<json, std::string> model_descriptor(const json& config) {
  if (!config.contains("model")) throw ParseError("model: missing");
  const json& m = config.at("model");
  if (m.is_object()) {
    for (const auto& item : config.items()) {
      if (!kTopLevel.count(item.key())) throw ParseError(item.key() + ": unknown field");
    }
    return {m, "model"};
  }
  if (!m.is_string()) throw ParseError("model: expected a model name or a mapping");
  json desc = json::object();
  desc["kind"] = m;
  for (const auto& item : config.items()) {
    if (!kTopLevel.count(item.key())) desc[item.key()] = item.value();
  }
  return {desc, ""};
}

void run_finite(const json& config, const json& desc, bool exact,
                const std::vector<std::string>& tasks, std::uint64_t seed,
                const Tolerances& tol, json& report, json& timing, Assertions& checks) {
  auto has_task = [&](const char* t) {
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
  };
  const auto t0 = Clock::now();
  auto m = load_model(desc, exact);
  timing["build"] = since(t0);
  const auto& nm = m.numeric();
  json info = {{"kind", m.kind},
               {"states", nm.space->size()},
               {"kernels", nm.kernels.size()},
               {"exact", exact}};
  json theory = json::object();
  for (const auto& [k, v] : nm.theory) theory[k] = v;
  info["theory"] = theory;
  report["model"] = info;

  std::optional<double> kappa;
  const bool need_kappa = has_task("certify") || has_task("duality") || has_task("lipschitz");
  if (need_kappa) {
    auto c = certify_task(m, task_options(config, "certify", seed));
    report["tasks"]["certify"] = c.report;
    timing["certify"] = c.seconds;
    kappa = c.kappa;
    checks.add("certify.kappa_in_unit_interval", c.kappa >= 0 && c.kappa <= 1, c.kappa, 1,
               "in [0, 1]");
    if (m.kind == "product" && nm.family) {
      if (exact) {
        Rational ts = theta_star(*m.exact_model->family);
        Rational k = parse_rational(c.report["kappa_exact"].get<std::string>());
        checks.add("certify.kappa_equals_theta_star", k == ts, c.kappa, to_double(ts),
                   "== (exact)");
      } else {
        double ts = theta_star(*nm.family);
        checks.add("certify.kappa_equals_theta_star",
                   std::abs(c.kappa - ts) <= tol.exactness, c.kappa, ts, "==");
      }
    } else if (m.kind == "permutations" && nm.theory.count("theta_star_star")) {
      checks.at_least("certify.kappa_at_least_theta_star_star", c.kappa,
                      nm.theory.at("theta_star_star") - tol.exactness);
    } else if (m.kind == "nsets" && nm.theory.count("kappa_theory")) {
      checks.at_least("certify.kappa_at_least_theory", c.kappa,
                      nm.theory.at("kappa_theory") - tol.exactness);
      Fields f(desc, "model");
      if (f.has("k") && !f.has("mixture")) {
        const double k = static_cast<double>(f.size("k"));
        const double n = static_cast<double>(f.size("n"));
        if (k < n) checks.greater("certify.kappa_exceeds_k_over_n", c.kappa, k / n);
      }
    }
  }
  if (has_task("spectral")) {
    auto s = spectral_task(m);
    report["tasks"]["spectral"] = s.report;
    timing["spectral"] = s.seconds;
    if (kappa) {
      checks.at_most("spectral.kappa_plus_factor", *kappa + s.report["factor"].get<double>(),
                     1 + tol.spectral);
    }
  }
  if (has_task("estimate")) {
    auto e = estimate_task(m, task_options(config, "estimate", seed));
    report["tasks"]["estimate"] = e.report;
    timing["estimate"] = e.seconds;
    if (kappa) {
      checks.at_most("estimate.kappa_plus_rho",
                     *kappa + e.report["rho_est"].get<double>(), 1 + tol.sandwich);
      checks.at_most("estimate.kappa_plus_spectral",
                     *kappa + e.report["spectral_factor"].get<double>(), 1 + tol.spectral);
    }
  }
  if (has_task("lipschitz")) {
    auto l = lipschitz_task(m, *kappa, task_options(config, "lipschitz", seed));
    report["tasks"]["lipschitz"] = l.report;
    timing["lipschitz"] = l.seconds;
    checks.at_most("lipschitz.max_excess", l.report["max_excess"].get<double>(),
                   tol.lipschitz);
  }
  if (has_task("duality")) {
    auto d = duality_task(m, *kappa, task_options(config, "duality", seed));
    report["tasks"]["duality"] = d.report;
    timing["duality"] = d.seconds;
    if (!d.report.contains("skipped")) {
      checks.at_most("duality.max_violation", d.report["max_violation"].get<double>(),
                     tol.duality);
    }
  }
}

void run_gff(const json& config, const json& desc, const std::string& path,
             std::uint64_t seed, const Tolerances& tol, json& report, json& timing,
             Assertions& checks) {
  Fields f(desc, path);
  const std::string kind = f.string("kind");
  const auto t0 = Clock::now();
  std::optional<GffInstance> g;
  json lattice_json;
  if (kind == "gff") {
    f.allow({"kind", "P", "blocks", "theta"});
    const json& p = f.at("P");
    if (!p.is_array() || p.empty()) throw ParseError(f.name("P") + ": expected a square matrix");
    const std::size_t n = p.size();
    auto flat = matrix_from<double>(p, n, f.name("P"));
    Matrix P(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) P(i, j) = flat[i * n + j];
    }
    g = build_gff(P);
  } else if (kind == "lattice") {
    f.allow({"kind", "dims", "hop_weight", "blocks", "theta"});
    std::vector<std::size_t> dims;
    const json& d = f.at("dims");
    if (d.is_number_integer()) {
      dims.push_back(f.size("dims"));
    } else if (d.is_array()) {
      for (const auto& v : d) {
        if (!v.is_number_integer() || v.get<long long>() < 1) {
          throw ParseError(f.name("dims") + ": side lengths must be positive integers");
        }
        dims.push_back(static_cast<std::size_t>(v.get<long long>()));
      }
    } else {
      throw ParseError(f.name("dims") + ": expected an integer or a list");
    }
    double h = f.number_or("hop_weight", 1.0 / (2.0 * static_cast<double>(dims.size())));
    auto ld = lattice_delta(dims, h);
    lattice_json = {{"dims", dims},
                    {"hop_weight", h},
                    {"sites", ld.states},
                    {"delta", ld.delta},
                    {"closed_form", ld.closed_form},
                    {"separable", ld.separable},
                    {"displayed", ld.displayed}};
    checks.at_most("gff.lattice_closed_form", std::abs(ld.delta - ld.closed_form),
                   tol.lattice);
    g = build_gff(lattice_matrix(dims, h));
  } else {
    f.allow({"kind", "n", "seed", "mass", "blocks", "theta"});
    std::mt19937_64 rng(f.seed_or("seed", seed));
    g = random_gff(f.size("n"), rng, f.number_or("mass", 0.95));
  }
  timing["build"] = since(t0);

  Fields o(task_options(config, "gff", seed), "gff");
  o.allow({"samples", "seed", "identities", "sigma"});
  const std::size_t n = g->size();
  json r;
  r["sites"] = n;
  r["delta_min"] = g->delta_min;
  if (n <= 64) r["psi"] = vector_json(g->psi);
  if (!lattice_json.is_null()) r["lattice"] = lattice_json;
  bool zero_diagonal = g->P.diagonal().cwiseAbs().maxCoeff() == 0;
  r["zero_diagonal"] = zero_diagonal;

  std::optional<BlockFamily> family;
  if (n <= kMaxCoordinates) family = parse_family<double>(f, n);
  auto gc = glauber_constants(*g, family ? &*family : nullptr);
  r["glauber"] = {{"kappa", gc.kappa}, {"lambda", gc.lambda}};
  if (gc.lower_bound) r["glauber"]["family_lower_bound"] = *gc.lower_bound;
  double linear = lambda_upper_linear(*g);
  r["lambda_upper_linear"] = linear;
  if (zero_diagonal) {
    checks.at_most("gff.linear_bound_matches_glauber", std::abs(linear - gc.lambda), 1e-9);
  }

  if (!family) {
    r["skipped"] = "block-family checks need at most " + std::to_string(kMaxCoordinates) +
                   " sites";
  } else {
    const auto t1 = Clock::now();
    std::string which = o.string_or("identities", n <= 10 ? "all" : "family");
    std::vector<Mask> blocks;
    if (which == "all") {
      if (n > 16) throw ParseError(o.name("identities") + ": 'all' needs at most 16 sites");
      for (Mask a = 1; a < (Mask(1) << n); ++a) blocks.push_back(a);
    } else if (which == "family") {
      blocks = family->blocks();
    } else if (which != "none") {
      throw ParseError(o.name("identities") + ": expected all, family or none");
    }
    if (!blocks.empty()) {
      auto id = check_matrix_identities(*g, blocks);
      r["identities"] = {{"blocks", id.blocks},
                         {"idempotent", id.idempotent},
                         {"delta_m_symmetric", id.delta_m_symmetric},
                         {"min_id_minus_mt", id.min_id_minus_mt},
                         {"maga_offblock", id.maga_offblock},
                         {"psi_lower_gap", id.psi_lower_gap},
                         {"psi_outside", id.psi_outside},
                         {"neumann", id.neumann},
                         {"neumann_terms", id.neumann_terms}};
      checks.add("gff.matrix_identities", id.ok(tol.gff_identity), id.idempotent,
                 tol.gff_identity, "all residuals within");
    }
    timing["identities"] = since(t1);

    const auto t2 = Clock::now();
    auto cv = check_distorted_curvature(*g, *family, o.size_or("samples", 10000),
                                        o.seed_or("seed", seed));
    r["curvature"] = {{"samples", cv.samples},
                      {"blocks", cv.blocks},
                      {"max_violation", cv.max_violation},
                      {"worst_block", mask_to_string(cv.worst_block)},
                      {"aggregate_violation", cv.aggregate_violation},
                      {"theta_star", cv.theta_star},
                      {"contraction", cv.contraction},
                      {"kappa_lower_bound", g->delta_min * cv.theta_star}};
    checks.at_most("gff.curvature_violation", cv.max_violation, tol.gff_curvature);
    checks.at_most("gff.aggregate_violation", cv.aggregate_violation, tol.gff_curvature);
    timing["curvature"] = since(t2);

    if (o.boolean_or("sigma", true)) {
      auto s = sigma_quantities(g->Gamma, *family);
      r["sigma"] = {{"sigma", s.sigma}, {"kappa_low", s.kappa_low}, {"kappa_high", s.kappa_high}};
      if (n <= 16) r["sigma"]["Sigma"] = matrix_json(s.Sigma);
      checks.at_most("gff.sigma_sandwich", s.kappa_low, s.kappa_high + 1e-15);
    }
  }
  report["model"] = {{"kind", kind}, {"sites", n}};
  report["tasks"]["curvature-gff"] = r;
}

void run_sphere(const json& config, const json& desc, const std::string& path,
                std::uint64_t seed, const Tolerances& tol, json& report, json& timing,
                Assertions& checks) {
  Fields f(desc, path);
  f.allow({"kind", "n", "p", "blocks", "theta"});
  const std::size_t n = f.size("n");
  const double p = f.number("p");
  auto family = parse_family<double>(f, n);
  Fields o(task_options(config, "sphere", seed), "sphere");
  o.allow({"pairs", "seed", "csv"});
  const auto t0 = Clock::now();
  auto r = contraction_check(family, p, n, o.size_or("pairs", 100000), o.seed_or("seed", seed));
  timing["sphere-check"] = since(t0);
  json kinds = json::object();
  for (const auto& [k, v] : r.kind_max) kinds[k] = v;
  report["model"] = {{"kind", "sphere"}, {"n", n}, {"p", p}};
  report["tasks"]["sphere-check"] = {{"theta_star", r.theta_star},
                                     {"theta_star_star", r.theta_star_star},
                                     {"bound", r.bound},
                                     {"max_ratio", r.max_ratio},
                                     {"worst_kind", r.worst_kind},
                                     {"worst_x", r.worst_x.coords},
                                     {"worst_y", r.worst_y.coords},
                                     {"basis_max", r.basis_max},
                                     {"kind_max", kinds},
                                     {"pairs_checked", r.pairs_checked}};
  checks.at_most("sphere.max_ratio", r.max_ratio, r.bound + tol.sphere);
  checks.at_most("sphere.basis_attains_bound", std::abs(r.basis_max - r.bound), tol.sphere);
  if (o.has("csv")) {
    std::string csv = "kind,max_ratio,bound\n";
    for (const auto& [k, v] : r.kind_max) {
      csv += k + "," + json(v).dump() + "," + json(r.bound).dump() + "\n";
    }
    write_text(o.string("csv"), csv);
  }
}

void run_langevin(const json& config, const json& desc, const std::string& path,
                  std::uint64_t seed, const Tolerances& tol, json& report, json& timing,
                  Assertions& checks) {
  Fields f(desc, path);
  f.allow({"kind", "potential", "dim", "rho", "slope"});
  const std::string name = f.string_or("potential", "quadratic");
  const std::size_t dim = f.size_or("dim", 1);
  const double rho = f.number("rho");
  Potential v;
  if (name == "quadratic") {
    v = quadratic_potential(dim, rho);
  } else if (name == "quadratic-plus-logcosh") {
    v = logcosh_potential(dim, rho, f.number_or("slope", 1.0));
  } else {
    throw ParseError(f.name("potential") + ": unknown potential '" + name + "'");
  }
  Fields o(task_options(config, "langevin", seed), "langevin");
  o.allow({"x0", "y0", "dt", "t_end", "seed", "probes", "entropy", "csv"});
  const std::uint64_t s = o.seed_or("seed", seed);
  json r;
  r["potential"] = {{"name", v.name}, {"dim", dim}, {"rho", rho}};
  if (name != "quadratic") r["potential"]["slope"] = f.number_or("slope", 1.0);

  auto t0 = Clock::now();
  auto probe = check_potential(v, o.size_or("probes", 10000), s);
  r["probes"] = {{"probes", probe.probes},
                 {"min_monotonicity_gap", probe.min_monotonicity_gap},
                 {"max_gradient_error", probe.max_gradient_error}};
  checks.at_least("langevin.monotonicity", probe.min_monotonicity_gap, -1e-8);
  checks.at_most("langevin.gradient_error", probe.max_gradient_error, 1e-5);
  timing["probes"] = since(t0);

  std::vector<double> x0(dim, 0.0), y0(dim, 0.0);
  x0[0] = 1;
  y0[0] = -1;
  if (o.has("x0")) x0 = o.numbers("x0");
  if (o.has("y0")) y0 = o.numbers("y0");
  const double dt = o.number_or("dt", 1e-3);
  t0 = Clock::now();
  auto paths = coupled_paths(v, x0, y0, dt, o.number_or("t_end", 5.0), s);
  double rate = decay_rate_fit(paths.times, paths.distance);
  double worst_excess = 0;
  for (std::size_t k = 0; k < paths.times.size(); ++k) {
    double env = std::exp(-rho * paths.times[k]) * paths.distance[0];
    worst_excess = std::max(worst_excess, paths.distance[k] / env - 1);
  }
  r["coupling"] = {{"steps", paths.times.size() - 1},
                   {"dt", dt},
                   {"initial_distance", paths.distance.front()},
                   {"final_distance", paths.distance.back()},
                   {"fitted_rate", rate},
                   {"max_step_increase", paths.max_step_increase},
                   {"max_envelope_excess", worst_excess}};
  checks.at_least("langevin.fitted_rate", rate, rho - tol.rate);
  if (name == "quadratic") {
    checks.at_most("langevin.ou_rate_error", std::abs(rate - rho), tol.ou_rate * rho);
  }
  checks.at_most("langevin.distance_envelope", worst_excess, 1e-9);
  checks.at_most("langevin.step_increase", paths.max_step_increase, dt * dt * 1e3);
  timing["coupling"] = since(t0);

  Fields csv = o.child("csv");
  csv.allow({"distance", "entropy"});
  if (csv.has("distance")) {
    std::ofstream out(csv.string("distance"));
    if (!out) throw UsageError("cannot write '" + csv.string("distance") + "'");
    write_distance_csv(out, paths);
  }

  if (o.has("entropy")) {
    Fields e = o.child("entropy");
    e.allow({"mean", "sd", "particles", "bins", "times", "t_max", "points", "dt"});
    std::vector<double> grid;
    if (e.has("times")) {
      grid = e.numbers("times");
    } else {
      const double t_max = e.number_or("t_max", 2.0);
      const std::size_t points = e.size_or("points", 9);
      if (points < 2) throw ParseError(e.name("points") + ": need at least 2");
      for (std::size_t k = 0; k < points; ++k) {
        grid.push_back(t_max * static_cast<double>(k) / static_cast<double>(points - 1));
      }
    }
    t0 = Clock::now();
    auto curve = entropy_decay_estimate(
        v, gaussian_sampler(e.number_or("mean", 2.0), e.number_or("sd", 1.0)), grid,
        e.size_or("particles", kMinParticles), e.size_or("bins", 200), s,
        e.number_or("dt", 1e-3));
    double worst = 0;
    for (std::size_t k = 1; k < curve.times.size(); ++k) {
      if (curve.envelope[k] > 0) worst = std::max(worst, curve.entropy[k] / curve.envelope[k]);
    }
    r["entropy"] = {{"times", curve.times},
                    {"entropy", curve.entropy},
                    {"envelope", curve.envelope},
                    {"bins", curve.bins},
                    {"particles", curve.particles},
                    {"bias", curve.bias},
                    {"max_envelope_ratio", worst}};
    if (!curve.warning.empty()) r["entropy"]["warning"] = curve.warning;
    checks.at_most("langevin.entropy_envelope", worst, tol.envelope);
    timing["entropy"] = since(t0);
    if (csv.has("entropy")) {
      std::ofstream out(csv.string("entropy"));
      if (!out) throw UsageError("cannot write '" + csv.string("entropy") + "'");
      write_entropy_csv(out, curve);
    }
  }
  report["model"] = {{"kind", "potential"}, {"dim", dim}};
  report["tasks"]["langevin"] = r;
}

}  // namespace

ExperimentResult run_experiment(const json& config) {
  if (!config.is_object()) throw ParseError("config: top level must be a mapping");
  Fields top(config, "");
  if (top.has("schema_version") && top.size("schema_version") != kSchemaVersion) {
    throw ParseError("schema_version: unsupported version");
  }
  const std::uint64_t seed = top.seed_or("seed", 1);
  const bool exact = top.boolean_or("exact", false);
  auto tol = parse_tolerances(top.child("tolerances"));
  auto [desc, path] = model_descriptor(config);
  Fields mf(desc, path);
  const std::string kind = mf.string("kind");

  std::vector<std::string> tasks;
  if (top.has("tasks")) {
    const json& t = top.at("tasks");
    if (t.is_string()) {
      tasks.push_back(t.get<std::string>());
    } else if (t.is_array()) {
      for (const auto& v : t) {
        if (!v.is_string()) throw ParseError("tasks: expected task names");
        tasks.push_back(v.get<std::string>());
      }
    } else {
      throw ParseError("tasks: expected a list of task names");
    }
  } else if (is_finite_kind(kind)) {
    tasks = {"certify"};
  } else if (is_gff_kind(kind)) {
    tasks = {"curvature-gff"};
  } else if (kind == "sphere") {
    tasks = {"sphere-check"};
  } else if (kind == "potential") {
    tasks = {"langevin"};
  }
  for (const auto& t : tasks) {
    bool ok = false;
    if (is_finite_kind(kind)) ok = kFiniteTasks.count(t) > 0;
    else if (is_gff_kind(kind)) ok = t == "curvature-gff";
    else if (kind == "sphere") ok = t == "sphere-check";
    else if (kind == "potential") ok = t == "langevin";
    else throw ParseError(mf.name("kind") + ": unknown model '" + kind + "'");
    if (!ok) {
      throw ParseError("tasks: '" + t + "' does not apply to model kind '" + kind + "'");
    }
  }
  if (exact && !is_finite_kind(kind)) {
    throw ParseError("exact: only finite models support exact mode");
  }

  ExperimentResult result;
  json& report = result.report;
  report["schema_version"] = kSchemaVersion;
  report["config"] = config;
  report["seed"] = seed;
  report["tolerances"] = tol.to_json();
  report["model"] = json::object();
  report["tasks"] = json::object();
  result.timing = json::object();
  Assertions checks;
  if (is_finite_kind(kind)) {
    run_finite(config, desc, exact, tasks, seed, tol, report, result.timing, checks);
  } else if (is_gff_kind(kind)) {
    run_gff(config, desc, path, seed, tol, report, result.timing, checks);
  } else if (kind == "sphere") {
    run_sphere(config, desc, path, seed, tol, report, result.timing, checks);
  } else {
    run_langevin(config, desc, path, seed, tol, report, result.timing, checks);
  }
  report["assertions"] = checks.list();
  report["passed"] = checks.failed().empty();
  result.failures = checks.failed();
  return result;
}

}  // namespace entcert
