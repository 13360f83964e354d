#pragma once

#include "json.hpp"
#include "kgforge/eval.hpp"

namespace kgforge::eval::report_json {

inline nlohmann::ordered_json config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = model_kind_name(c.model);
  j["dim"] = c.dim;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["margin"] = c.margin;
  j["negatives_per_positive"] = c.negatives_per_positive;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["norm"] = c.norm == Norm::kL1 ? "L1" : "L2";
  j["l2_reg"] = c.l2_reg;
  return j;
}

inline nlohmann::ordered_json metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["n_queries"] = m.n_queries;
  j["mr"] = m.mr;
  j["mrr"] = m.mrr;
  j["hits1"] = m.hits1;
  j["hits3"] = m.hits3;
  j["hits10"] = m.hits10;
  return j;
}

}  // namespace kgforge::eval::report_json
