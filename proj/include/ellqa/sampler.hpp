// Copyright 2026 The ellqa Authors.
//
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

// Single-task and joint training mixtures.
//
// A mixture keeps every main-task instance and adds, per auxiliary task,
// min(|aux pool|, |main pool|) instances drawn uniformly without replacement.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ellqa/corpus.hpp"
#include "ellqa/rng.hpp"
#include "json.hpp"

namespace ellqa {

struct SamplingPlan {
  Task main_task = Task::kSluice;
  std::vector<Task> auxiliary_tasks;
  std::uint64_t seed = 0;
  bool resample_each_epoch = false;

  bool operator==(const SamplingPlan&) const = default;
};

struct JointDataset {
  std::vector<QAInstance> instances;
  std::map<Task, std::size_t> provenance;
};

using TaskPools = std::map<Task, std::vector<QAInstance>>;

inline void validate(const SamplingPlan& plan) {
  std::set<Task> seen;
  for (Task t : plan.auxiliary_tasks) {
    if (t == plan.main_task) {
      throw Error("sampling plan: main task " + to_string(t) +
                  " also listed as auxiliary");
    }
    if (!seen.insert(t).second) {
      throw Error("sampling plan: auxiliary task " + to_string(t) +
                  " listed twice");
    }
  }
}

// Sluice main with VP ellipsis auxiliary data.
inline SamplingPlan sluice_joint_plan(std::uint64_t seed = 0) {
  return {Task::kSluice, {Task::kVpe}, seed, false};
}

// VP ellipsis main with every other dataset as auxiliary data.
inline SamplingPlan vpe_joint_plan(std::uint64_t seed = 0) {
  return {Task::kVpe,
          {Task::kSluice, Task::kCorefOntoNotes, Task::kCorefWikiCoref,
           Task::kSquad},
          seed,
          false};
}

namespace detail {

inline JointDataset mixture_with_seed(const SamplingPlan& plan,
                                      const TaskPools& pools,
                                      std::uint64_t seed) {
  validate(plan);
  auto main_it = pools.find(plan.main_task);
  if (main_it == pools.end() || main_it->second.empty()) {
    throw Error("sampling plan: empty pool for main task " +
                to_string(plan.main_task));
  }
  for (const auto& [task, pool] : pools) {
    for (const QAInstance& inst : pool) {
      if (inst.split != Split::kTrain) {
        throw Error("sampling pool for " + to_string(task) +
                    " contains non-TRAIN instance " + inst.instance_id);
      }
    }
  }

  const std::vector<QAInstance>& main_pool = main_it->second;
  JointDataset out;
  out.instances = main_pool;
  out.provenance[plan.main_task] = main_pool.size();

  Rng rng(seed);
  for (Task aux : plan.auxiliary_tasks) {
    auto it = pools.find(aux);
    if (it == pools.end()) {
      throw Error("sampling plan: no pool for auxiliary task " +
                  to_string(aux));
    }
    const auto& pool = it->second;
    const std::size_t take = std::min(pool.size(), main_pool.size());
    // Partial Fisher-Yates over indices.
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    for (std::size_t i = 0; i < take; ++i) {
      out.instances.push_back(pool[idx[i]]);
    }
    out.provenance[aux] = take;
  }
  rng.shuffle(out.instances);

  std::set<std::string> ids;
  for (const QAInstance& inst : out.instances) {
    if (!ids.insert(inst.instance_id).second) {
      throw Error("mixture contains duplicate instance_id " +
                  inst.instance_id);
    }
  }
  return out;
}

}  // namespace detail

inline JointDataset build_mixture(const SamplingPlan& plan,
                                  const TaskPools& pools) {
  return detail::mixture_with_seed(plan, pools, plan.seed);
}

// Per-epoch mixture. Epoch 0 reproduces build_mixture.
inline JointDataset resample(const SamplingPlan& plan, const TaskPools& pools,
                             std::uint64_t epoch) {
  if (!plan.resample_each_epoch) {
    throw Error("resample called on a plan without resample_each_epoch");
  }
  const std::uint64_t seed = epoch == 0 ? plan.seed : mix_seed(plan.seed, epoch);
  return detail::mixture_with_seed(plan, pools, seed);
}

// Groups TRAIN instances by task.
inline TaskPools train_pools(const std::vector<QAInstance>& instances) {
  TaskPools pools;
  for (const QAInstance& inst : instances) {
    if (inst.split == Split::kTrain) pools[inst.task].push_back(inst);
  }
  return pools;
}

// Plan config: either a preset name ("sluice-joint", "vpe-joint") or an
// object {"main_task", "auxiliary_tasks", "seed", "resample_each_epoch"}.
inline SamplingPlan plan_from_json(const nlohmann::json& j) {
  SamplingPlan plan;
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "sluice-joint") return sluice_joint_plan();
    if (name == "vpe-joint") return vpe_joint_plan();
    throw Error("unknown preset plan '" + name + "'");
  }
  if (!j.is_object()) throw Error("sampling plan must be an object or preset");
  static const std::set<std::string> kKeys = {
      "main_task", "auxiliary_tasks", "seed", "resample_each_epoch", "preset"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw Error("sampling plan: unknown field '" + k + "'");
  }
  if (j.contains("preset")) {
    plan = plan_from_json(j.at("preset"));
  } else if (!j.contains("main_task")) {
    throw Error("sampling plan: missing main_task");
  }
  if (j.contains("main_task")) {
    plan.main_task = parse_task(j.at("main_task").get<std::string>());
  }
  if (j.contains("auxiliary_tasks")) {
    plan.auxiliary_tasks.clear();
    for (const auto& t : j.at("auxiliary_tasks")) {
      plan.auxiliary_tasks.push_back(parse_task(t.get<std::string>()));
    }
  }
  plan.seed = j.value("seed", plan.seed);
  plan.resample_each_epoch =
      j.value("resample_each_epoch", plan.resample_each_epoch);
  validate(plan);
  return plan;
}

inline nlohmann::json to_json(const SamplingPlan& plan) {
  nlohmann::json aux = nlohmann::json::array();
  for (Task t : plan.auxiliary_tasks) aux.push_back(to_string(t));
  return {{"main_task", to_string(plan.main_task)},
          {"auxiliary_tasks", aux},
          {"seed", plan.seed},
          {"resample_each_epoch", plan.resample_each_epoch}};
}

}  // namespace ellqa
