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

// entcert command line front end. Talks to the library through the C API only.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "entcert/entcert.h"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int exit_code(entcert_status s) {
  switch (s) {
    case ENTCERT_OK: return kExitOk;
    case ENTCERT_ERR_PARSE:
    case ENTCERT_ERR_USAGE: return kExitUsage;
    case ENTCERT_ERR_ASSERTION: return kExitAssertion;
    default: return kExitRuntime;
  }
}

int report_error(entcert_status s) {
  std::cerr << "error (" << entcert_status_name(s) << "): " << entcert_last_error() << "\n";
  return exit_code(s);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  return static_cast<bool>(out);
}

// Numbers stay exact strings when they look like fractions.
json number_token(const std::string& tok) {
  if (tok.find('/') != std::string::npos) return tok;
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used == tok.size()) return tok.find_first_of(".eE") == std::string::npos
                                       ? json(static_cast<long long>(v))
                                       : json(v);
  } catch (const std::exception&) {
  }
  return tok;
}

std::vector<std::string> split_numbers(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != '[' && c != ']') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

json number_list(const std::string& text) {
  json out = json::array();
  for (const auto& t : split_numbers(text)) out.push_back(number_token(t));
  return out;
}

// JSON matrix, or one row per line separated by commas or blanks.
bool parse_matrix(const std::string& text, json& out) {
  try {
    out = json::parse(text);
    if (out.is_array()) return true;
  } catch (const json::exception&) {
  }
  out = json::array();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto row = number_list(line);
    if (!row.empty()) out.push_back(row);
  }
  return !out.empty();
}

// A measure on the command line: "0.7,0.3" or a file holding one.
json measure_arg(const std::string& arg) {
  std::string text;
  if (read_file(arg, text)) return number_list(text);
  return number_list(arg);
}

struct Common {
  unsigned threads = 0;
  bool json_out = false;
  bool exact = false;
  std::uint64_t seed = 1;
  std::string output;
};

struct ModelArgs {
  std::string kind;
  std::size_t n = 0;
  std::size_t big_n = 0;
  std::size_t k = 0;
  std::string blocks;
  std::string theta;
  std::string sizes;
  std::string mixture;

  json descriptor() const {
    json d;
    d["kind"] = kind;
    if (kind == "nsets") {
      d["N"] = big_n;
      d["n"] = n;
      if (!mixture.empty()) {
        d["mixture"] = number_list(mixture);
      } else {
        d["k"] = k;
      }
      return d;
    }
    if (!sizes.empty()) {
      d["sizes"] = number_list(sizes);
    } else {
      d["n"] = n;
    }
    if (!blocks.empty()) d["blocks"] = blocks;
    if (!theta.empty()) d["theta"] = number_list(theta);
    return d;
  }
};

void add_model_options(CLI::App* app, ModelArgs& m) {
  app->add_option("--model", m.kind, "product, nsets or permutations")
      ->required()
      ->check(CLI::IsMember({"product", "nsets", "permutations"}));
  app->add_option("--n", m.n, "coordinates, subset size or permutation size");
  app->add_option("--N", m.big_n, "ground set size (nsets)");
  app->add_option("--k", m.k, "resampled elements per step (nsets)");
  app->add_option("--blocks", m.blocks, "block pattern: singletons, pairs, all-but-one, full, size-L");
  app->add_option("--theta", m.theta, "block weights, comma separated");
  app->add_option("--sizes", m.sizes, "coordinate sizes, comma separated (product)");
  app->add_option("--mixture", m.mixture, "weights for k = 1..n (nsets)");
}

// Runs a config through the library and prints the report.
int run_config(const std::string& text, const Common& c,
               const std::function<void(const json&)>& summary) {
  entcert_set_threads(c.threads);
  entcert_report* rep = nullptr;
  entcert_status s = entcert_run(text.c_str(), &rep);
  if (s != ENTCERT_OK) return report_error(s);
  const std::string body = entcert_report_json(rep);
  const bool passed = entcert_report_passed(rep) != 0;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < entcert_report_failure_count(rep); ++i) {
    failures.emplace_back(entcert_report_failure(rep, i));
  }
  const std::string timing = entcert_report_timing_json(rep);
  entcert_report_free(rep);

  if (!c.output.empty()) {
    if (!write_file(c.output, body)) {
      std::cerr << "error: cannot write " << c.output << "\n";
      return kExitUsage;
    }
    if (!write_file(c.output + ".timing.json", timing)) {
      std::cerr << "error: cannot write " << c.output << ".timing.json\n";
      return kExitUsage;
    }
  }
  if (c.json_out || (!summary && c.output.empty())) {
    std::cout << body << "\n";
  } else if (summary) {
    summary(json::parse(body));
  }
  for (const auto& f : failures) std::cerr << "assertion failed: " << f << "\n";
  if (passed) return kExitOk;
  return kExitAssertion;
}

json base_config(const json& model, const json& tasks, const Common& c) {
  json cfg;
  cfg["model"] = model;
  cfg["tasks"] = tasks;
  cfg["seed"] = c.seed;
  if (c.exact) cfg["exact"] = true;
  return cfg;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_kappa(const json& r) {
  const auto& c = r["tasks"]["certify"];
  std::cout << "kappa = " << fmt(c["kappa"].get<double>());
  if (c.contains("kappa_exact")) std::cout << " (" << c["kappa_exact"].get<std::string>() << ")";
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entcert: entropy contraction certificates"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--threads", c.threads, "worker thread cap (0 = all cores)");
  app.add_flag("--json", c.json_out, "print the full JSON report");
  app.add_option("--seed", c.seed, "random seed");
  app.add_flag("--version", [](std::int64_t) {
    std::cout << entcert_version() << "\n";
    throw CLI::Success();
  }, "print the library version");

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config (YAML or JSON)");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("-o,--output", c.output, "write the report here");

  // certify / estimate / duality
  ModelArgs cert_model, est_model, dual_model;
  std::string pair_mode = "exhaustive";
  auto* certify = app.add_subcommand("certify", "certified contraction lower bound");
  add_model_options(certify, cert_model);
  certify->add_option("--pair-mode", pair_mode, "exhaustive or generator-edges");
  certify->add_flag("--exact", c.exact, "rational arithmetic");

  std::size_t restarts = 8, max_iters = 500;
  auto* estimate = app.add_subcommand("estimate", "entropy-ratio upper estimate");
  add_model_options(estimate, est_model);
  estimate->add_option("--restarts", restarts);
  estimate->add_option("--max-iters", max_iters);

  std::size_t trials = 1000;
  auto* duality = app.add_subcommand("duality", "Brascamp-Lieb dual inequality check");
  add_model_options(duality, dual_model);
  duality->add_option("--trials", trials);

  // gff
  std::string lattice;
  double hop = -1;
  std::size_t random_n = 0, gff_samples = 10000;
  std::string gff_matrix;
  auto* gff = app.add_subcommand("gff", "Gaussian free field constants");
  auto* lat_opt = gff->add_option("--lattice", lattice, "box sides, e.g. 3 or 3x3");
  gff->add_option("--hop", hop, "per-neighbour weight (default 1/(2d))");
  auto* rnd_opt = gff->add_option("--random", random_n, "random sparse field on n sites");
  auto* mat_opt = gff->add_option("--matrix", gff_matrix, "file with the matrix P");
  gff->add_option("--samples", gff_samples, "curvature samples");
  lat_opt->excludes(rnd_opt)->excludes(mat_opt);
  rnd_opt->excludes(mat_opt);

  // sphere
  std::size_t sphere_n = 4, sphere_pairs = 100000;
  double sphere_p = 2;
  std::string sphere_blocks = "pairs", sphere_theta, sphere_csv;
  auto* sphere = app.add_subcommand("sphere", "coupling contraction on the lp sphere");
  sphere->add_option("--n", sphere_n);
  sphere->add_option("--p", sphere_p);
  sphere->add_option("--blocks", sphere_blocks);
  sphere->add_option("--theta", sphere_theta);
  sphere->add_option("--pairs", sphere_pairs);
  sphere->add_option("--csv", sphere_csv, "write per-kind maxima");

  // langevin
  std::string potential = "quadratic", distance_csv, entropy_csv;
  std::size_t dim = 1, particles = 100000;
  double rho = 1, slope = 1, t_end = 5, dt = 1e-3;
  bool entropy = false;
  auto* langevin = app.add_subcommand("langevin", "synchronous coupling of Langevin paths");
  langevin->add_option("--potential", potential)
      ->check(CLI::IsMember({"quadratic", "quadratic-plus-logcosh"}));
  langevin->add_option("--dim", dim);
  langevin->add_option("--rho", rho);
  langevin->add_option("--slope", slope);
  langevin->add_option("--t-end", t_end);
  langevin->add_option("--dt", dt);
  langevin->add_flag("--entropy", entropy, "also estimate the entropy decay curve");
  langevin->add_option("--particles", particles);
  langevin->add_option("--distance-csv", distance_csv);
  langevin->add_option("--entropy-csv", entropy_csv);

  // wasserstein
  std::string dist_file, mu_arg, nu_arg;
  bool plans = false, w_exact = false;
  auto* wass = app.add_subcommand("wasserstein", "W1 and Winf between two measures");
  wass->add_option("dist-file", dist_file, "distance matrix (JSON or rows)")->required();
  wass->add_option("mu", mu_arg, "first measure, e.g. 0.7,0.3")->required();
  wass->add_option("nu", nu_arg, "second measure")->required();
  wass->add_flag("--plans", plans, "print optimal plans");
  wass->add_flag("--exact", w_exact, "rational arithmetic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*run) {
    std::string text;
    if (!read_file(config_path, text)) {
      std::cerr << "error: cannot read " << config_path << "\n";
      return kExitUsage;
    }
    return run_config(text, c, nullptr);
  }
  if (*certify) {
    json cfg = base_config(cert_model.descriptor(), {"certify"}, c);
    cfg["certify"] = {{"pair_mode", pair_mode}};
    return run_config(cfg.dump(), c, print_kappa);
  }
  if (*estimate) {
    json cfg = base_config(est_model.descriptor(), {"certify", "spectral", "estimate"}, c);
    cfg["estimate"] = {{"restarts", restarts}, {"max_iters", max_iters}};
    return run_config(cfg.dump(), c, [](const json& r) {
      print_kappa(r);
      const auto& e = r["tasks"]["estimate"];
      std::cout << "rho_est = " << fmt(e["rho_est"].get<double>()) << "\n"
                << "spectral = " << fmt(r["tasks"]["spectral"]["factor"].get<double>()) << "\n";
    });
  }
  if (*duality) {
    json cfg = base_config(dual_model.descriptor(), {"certify", "duality"}, c);
    cfg["duality"] = {{"trials", trials}};
    return run_config(cfg.dump(), c, [](const json& r) {
      print_kappa(r);
      const auto& d = r["tasks"]["duality"];
      if (d.contains("skipped")) {
        std::cout << "duality skipped: " << d["skipped"].get<std::string>() << "\n";
      } else {
        std::cout << "max_violation = " << fmt(d["max_violation"].get<double>()) << "\n";
      }
    });
  }
  if (*gff) {
    json model;
    if (!lattice.empty()) {
      json dims = json::array();
      std::string part;
      std::istringstream in(lattice);
      while (std::getline(in, part, 'x')) {
        try {
          dims.push_back(std::stoul(part));
        } catch (const std::exception&) {
          std::cerr << "error: --lattice expects sides like 3 or 3x4\n";
          return kExitUsage;
        }
      }
      model = {{"kind", "lattice"}, {"dims", dims}};
      if (hop >= 0) model["hop_weight"] = hop;
    } else if (random_n > 0) {
      model = {{"kind", "random-gff"}, {"n", random_n}, {"seed", c.seed}};
    } else if (!gff_matrix.empty()) {
      std::string text;
      json p;
      if (!read_file(gff_matrix, text) || !parse_matrix(text, p)) {
        std::cerr << "error: cannot read a matrix from " << gff_matrix << "\n";
        return kExitUsage;
      }
      model = {{"kind", "gff"}, {"P", p}};
    } else {
      std::cerr << "error: gff needs --lattice, --random or --matrix\n";
      return kExitUsage;
    }
    json cfg = base_config(model, {"curvature-gff"}, c);
    cfg["gff"] = {{"samples", gff_samples}};
    return run_config(cfg.dump(), c, [](const json& r) {
      const auto& g = r["tasks"]["curvature-gff"];
      std::cout << "delta = " << fmt(g["delta_min"].get<double>()) << "\n";
      if (g.contains("lattice")) {
        std::cout << "closed_form = " << fmt(g["lattice"]["closed_form"].get<double>()) << "\n";
      }
      std::cout << "glauber_kappa = " << fmt(g["glauber"]["kappa"].get<double>()) << "\n";
      if (g.contains("curvature")) {
        std::cout << "curvature_max_violation = "
                  << fmt(g["curvature"]["max_violation"].get<double>()) << "\n";
      }
    });
  }
  if (*sphere) {
    json model = {{"kind", "sphere"}, {"n", sphere_n}, {"p", sphere_p}, {"blocks", sphere_blocks}};
    if (!sphere_theta.empty()) model["theta"] = number_list(sphere_theta);
    json cfg = base_config(model, {"sphere-check"}, c);
    cfg["sphere"] = {{"pairs", sphere_pairs}};
    if (!sphere_csv.empty()) cfg["sphere"]["csv"] = sphere_csv;
    return run_config(cfg.dump(), c, [](const json& r) {
      const auto& s = r["tasks"]["sphere-check"];
      std::cout << "theta_star_star = " << fmt(s["theta_star_star"].get<double>()) << "\n"
                << "bound = " << fmt(s["bound"].get<double>()) << "\n"
                << "max_ratio = " << fmt(s["max_ratio"].get<double>()) << " ("
                << s["worst_kind"].get<std::string>() << ")\n";
    });
  }
  if (*langevin) {
    json model = {{"kind", "potential"}, {"potential", potential}, {"dim", dim}, {"rho", rho}};
    if (potential != "quadratic") model["slope"] = slope;
    json cfg = base_config(model, {"langevin"}, c);
    cfg["langevin"] = {{"t_end", t_end}, {"dt", dt}};
    if (entropy) cfg["langevin"]["entropy"] = {{"particles", particles}};
    json csv = json::object();
    if (!distance_csv.empty()) csv["distance"] = distance_csv;
    if (!entropy_csv.empty()) csv["entropy"] = entropy_csv;
    if (!csv.empty()) cfg["langevin"]["csv"] = csv;
    return run_config(cfg.dump(), c, [](const json& r) {
      const auto& l = r["tasks"]["langevin"];
      std::cout << "fitted_rate = " << fmt(l["coupling"]["fitted_rate"].get<double>()) << "\n"
                << "final_distance = " << fmt(l["coupling"]["final_distance"].get<double>())
                << "\n";
      if (l.contains("entropy")) {
        std::cout << "entropy_envelope_ratio = "
                  << fmt(l["entropy"]["max_envelope_ratio"].get<double>()) << "\n";
      }
    });
  }
  if (*wass) {
    entcert_set_threads(c.threads);
    std::string text;
    json dist;
    if (!read_file(dist_file, text) || !parse_matrix(text, dist)) {
      std::cerr << "error: cannot read a distance matrix from " << dist_file << "\n";
      return kExitUsage;
    }
    json req = {{"dist", dist},
                {"mu", measure_arg(mu_arg)},
                {"nu", measure_arg(nu_arg)},
                {"exact", w_exact},
                {"plans", plans}};
    char* out = nullptr;
    entcert_status s = entcert_wasserstein(req.dump().c_str(), &out);
    if (s != ENTCERT_OK) return report_error(s);
    json r = json::parse(out);
    entcert_string_free(out);
    if (c.json_out) {
      std::cout << r.dump(2) << "\n";
      return kExitOk;
    }
    std::cout << "W1 = " << fmt(r["w1"].get<double>());
    if (r.contains("w1_exact")) std::cout << " (" << r["w1_exact"].get<std::string>() << ")";
    std::cout << "\nWinf = " << fmt(r["winf"].get<double>());
    if (r.contains("winf_exact")) std::cout << " (" << r["winf_exact"].get<std::string>() << ")";
    std::cout << "\n";
    if (plans) {
      for (const char* which : {"w1", "winf"}) {
        std::cout << which << " plan:\n";
        for (const auto& e : r["plans"][which]) {
          std::cout << "  " << e["from"].get<std::size_t>() << " -> "
                    << e["to"].get<std::size_t>() << "  "
                    << (e.contains("mass_exact") ? e["mass_exact"].get<std::string>()
                                                 : fmt(e["mass"].get<double>()))
                    << "\n";
        }
      }
    }
    return kExitOk;
  }
  return kExitUsage;
}
