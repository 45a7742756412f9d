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

#include "entcert/entcert.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "entcert/common.hpp"
#include "entcert/experiment.hpp"
#include "entcert/gff.hpp"
#include "entcert/transport.hpp"

struct entcert_report {
  std::string json;
  std::string timing;
  bool passed = false;
  std::vector<std::string> failures;
};

struct entcert_model {
  entcert::LoadedModel model;
};

namespace {

thread_local std::string g_last_error;

entcert_status fail(entcert_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
entcert_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return ENTCERT_OK;
  } catch (const entcert::ParseError& e) {
    return fail(ENTCERT_ERR_PARSE, e.what());
  } catch (const entcert::UsageError& e) {
    return fail(ENTCERT_ERR_USAGE, e.what());
  } catch (const entcert::DomainError& e) {
    return fail(ENTCERT_ERR_DOMAIN, e.what());
  } catch (const entcert::ContractViolation& e) {
    return fail(ENTCERT_ERR_CONTRACT, e.what());
  } catch (const entcert::NumericalError& e) {
    return fail(ENTCERT_ERR_NUMERIC, e.what());
  } catch (const entcert::json::exception& e) {
    return fail(ENTCERT_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ENTCERT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ENTCERT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ENTCERT_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw entcert::UsageError(what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

entcert::json parse_options(const char* text) {
  if (!text || !*text) return entcert::json::object();
  return entcert::json::parse(text);
}

void emit(char** out, const entcert::json& j) {
  if (out) *out = copy_string(j.dump(2));
}

template <bool Inf>
entcert_status dense_transport(size_t n, const double* dist, const double* mu,
                               const double* nu, double* out) {
  return guarded([&] {
    require(n > 0 && dist && mu && nu && out, "null argument or empty space");
    auto metric = entcert::Metric::from_matrix(n, std::vector<double>(dist, dist + n * n));
    std::span<const double> a(mu, n), b(nu, n);
    *out = Inf ? entcert::winf<double>(a, b, metric).value
               : entcert::w1<double>(a, b, metric).value;
  });
}

}  // namespace

extern "C" {

const char* entcert_version(void) { return "1.0.0"; }

const char* entcert_status_name(entcert_status status) {
  switch (status) {
    case ENTCERT_OK: return "ok";
    case ENTCERT_ERR_USAGE: return "usage";
    case ENTCERT_ERR_DOMAIN: return "domain";
    case ENTCERT_ERR_CONTRACT: return "contract";
    case ENTCERT_ERR_NUMERIC: return "numeric";
    case ENTCERT_ERR_PARSE: return "parse";
    case ENTCERT_ERR_ASSERTION: return "assertion";
    case ENTCERT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* entcert_last_error(void) { return g_last_error.c_str(); }

void entcert_set_threads(unsigned threads) { entcert::set_max_threads(threads); }

void entcert_string_free(char* s) { std::free(s); }

entcert_status entcert_run(const char* config_text, entcert_report** out) {
  return guarded([&] {
    require(config_text && out, "null argument");
    *out = nullptr;
    auto result = entcert::run_experiment(entcert::parse_config_text(config_text));
    auto* r = new entcert_report;
    r->json = result.report.dump(2);
    r->timing = result.timing.dump(2);
    r->passed = result.passed();
    r->failures = result.failures;
    *out = r;
  });
}

const char* entcert_report_json(const entcert_report* r) { return r ? r->json.c_str() : ""; }

const char* entcert_report_timing_json(const entcert_report* r) {
  return r ? r->timing.c_str() : "";
}

int entcert_report_passed(const entcert_report* r) { return r && r->passed ? 1 : 0; }

size_t entcert_report_failure_count(const entcert_report* r) {
  return r ? r->failures.size() : 0;
}

const char* entcert_report_failure(const entcert_report* r, size_t i) {
  return r && i < r->failures.size() ? r->failures[i].c_str() : nullptr;
}

void entcert_report_free(entcert_report* r) { delete r; }

entcert_status entcert_model_build(const char* descriptor_json, int exact,
                                   entcert_model** out) {
  return guarded([&] {
    require(descriptor_json && out, "null argument");
    *out = nullptr;
    auto m = entcert::load_model(entcert::json::parse(descriptor_json), exact != 0);
    *out = new entcert_model{std::move(m)};
  });
}

size_t entcert_model_states(const entcert_model* m) {
  return m ? m->model.numeric().space->size() : 0;
}

size_t entcert_model_kernels(const entcert_model* m) {
  return m ? m->model.numeric().kernels.size() : 0;
}

const char* entcert_model_label(const entcert_model* m, size_t i) {
  if (!m || i >= entcert_model_states(m)) return nullptr;
  return m->model.numeric().space->label(i).c_str();
}

entcert_status entcert_model_kernel_dense(const entcert_model* m, size_t k, double* out,
                                          size_t out_len) {
  return guarded([&] {
    require(m && out, "null argument");
    const auto& nm = m->model.numeric();
    require(k < nm.kernels.size(), "kernel index out of range");
    auto d = nm.kernels[k].dense();
    require(out_len >= d.size(), "output buffer too small");
    std::copy(d.begin(), d.end(), out);
  });
}

entcert_status entcert_model_certify(const entcert_model* m, const char* options_json,
                                     double* kappa, char** report_json) {
  return guarded([&] {
    require(m, "null model");
    auto r = entcert::certify_task(m->model, parse_options(options_json));
    if (kappa) *kappa = r.kappa;
    emit(report_json, r.report);
  });
}

entcert_status entcert_model_estimate(const entcert_model* m, const char* options_json,
                                      double* rho, char** report_json) {
  return guarded([&] {
    require(m, "null model");
    auto r = entcert::estimate_task(m->model, parse_options(options_json));
    if (rho) *rho = r.report["rho_est"].get<double>();
    emit(report_json, r.report);
  });
}

entcert_status entcert_model_duality(const entcert_model* m, double kappa,
                                     const char* options_json, double* max_violation,
                                     char** report_json) {
  return guarded([&] {
    require(m, "null model");
    if (!(kappa > 0 && kappa < 1)) {
      throw entcert::DomainError("duality check needs 0 < kappa < 1");
    }
    auto r = entcert::duality_task(m->model, kappa, parse_options(options_json));
    if (max_violation) *max_violation = r.report["max_violation"].get<double>();
    emit(report_json, r.report);
  });
}

void entcert_model_free(entcert_model* m) { delete m; }

entcert_status entcert_wasserstein(const char* request_json, char** result_json) {
  return guarded([&] {
    require(request_json && result_json, "null argument");
    *result_json = nullptr;
    emit(result_json, entcert::wasserstein_request(entcert::json::parse(request_json)));
  });
}

entcert_status entcert_w1_dense(size_t n, const double* dist, const double* mu,
                                const double* nu, double* out) {
  return dense_transport<false>(n, dist, mu, nu, out);
}

entcert_status entcert_winf_dense(size_t n, const double* dist, const double* mu,
                                  const double* nu, double* out) {
  return dense_transport<true>(n, dist, mu, nu, out);
}

entcert_status entcert_lattice_delta(const size_t* dims, size_t ndims, double hop_weight,
                                     double* delta, double* closed_form) {
  return guarded([&] {
    require(dims && ndims > 0, "lattice needs at least one dimension");
    std::vector<std::size_t> d(dims, dims + ndims);
    double h = hop_weight < 0 ? 1.0 / (2.0 * static_cast<double>(ndims)) : hop_weight;
    auto r = entcert::lattice_delta(d, h);
    if (delta) *delta = r.delta;
    if (closed_form) *closed_form = r.closed_form;
  });
}

}  // extern "C"
