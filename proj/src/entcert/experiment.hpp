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

// Configuration-driven runs: model descriptors, task execution and JSON
// reports. Reports never contain timings; those go to a separate object so
// identical configs give byte-identical reports.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "entcert/models.hpp"

namespace entcert {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// YAML or JSON text to a JSON value. Quoted YAML scalars stay strings.
json parse_config_text(const std::string& text);

// A finite model ready for certification. Exact models carry both forms.
struct LoadedModel {
  std::string kind;
  json descriptor;
  bool exact = false;
  std::optional<Model> model;
  std::optional<ExactModel> exact_model;

  const Model& numeric() const { return *model; }
};

// Finite descriptors: product, nsets, permutations, custom.
LoadedModel load_model(const json& descriptor, bool exact);

struct TaskOutput {
  json report;
  double seconds = 0;
  double kappa = 0;  // certify only
};

TaskOutput certify_task(const LoadedModel& m, const json& options);
TaskOutput estimate_task(const LoadedModel& m, const json& options);
TaskOutput spectral_task(const LoadedModel& m);
TaskOutput duality_task(const LoadedModel& m, double kappa, const json& options);
TaskOutput lipschitz_task(const LoadedModel& m, double kappa, const json& options);

// {dist: [[..]], mu: [..], nu: [..], exact?: bool, plans?: bool}
json wasserstein_request(const json& request);

struct ExperimentResult {
  json report;
  json timing;
  std::vector<std::string> failures;  // names of failed assertions

  bool passed() const { return failures.empty(); }
};

ExperimentResult run_experiment(const json& config);

}  // namespace entcert
