#include <algorithm>
#include <cstdio>
#include <set>

#include "eval_json.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/eval.hpp"

namespace kgforge::eval {
namespace {

std::multiset<kg::NamedTriple> named_split(const kg::KnowledgeGraph& kg, kg::Split s) {
  std::multiset<kg::NamedTriple> out;
  for (const auto& t : kg.split(s).triples) out.insert(kg.named(t));
  return out;
}

void require_shared_eval_data(const kg::KnowledgeGraph& a, const kg::KnowledgeGraph& b) {
  std::set<std::string> ea(a.entity_ids().begin(), a.entity_ids().end());
  std::set<std::string> eb(b.entity_ids().begin(), b.entity_ids().end());
  if (ea != eb) throw InvalidArgument("ab_compare: graphs have different entity sets");
  for (auto s : {kg::Split::kValid, kg::Split::kTest}) {
    if (named_split(a, s) != named_split(b, s) || a.split(s).labels != b.split(s).labels) {
      throw InvalidArgument("ab_compare: " + std::string(kg::split_name(s)) +
                            " splits differ between base and augmented graphs");
    }
  }
}

Metrics delta(const Metrics& base, const Metrics& aug) {
  Metrics d;
  d.n_queries = base.n_queries;
  d.mr = aug.mr - base.mr;
  d.mrr = aug.mrr - base.mrr;
  d.hits1 = aug.hits1 - base.hits1;
  d.hits3 = aug.hits3 - base.hits3;
  d.hits10 = aug.hits10 - base.hits10;
  return d;
}

template <typename Pick>
Metrics median_of(const std::vector<SeedRow>& rows, Pick pick) {
  auto field = [&](double Metrics::*f) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(pick(r).*f);
    return median(std::move(v));
  };
  Metrics m;
  m.n_queries = pick(rows.front()).n_queries;
  m.mr = field(&Metrics::mr);
  m.mrr = field(&Metrics::mrr);
  m.hits1 = field(&Metrics::hits1);
  m.hits3 = field(&Metrics::hits3);
  m.hits10 = field(&Metrics::hits10);
  return m;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return values[n / 2 - 1] / 2.0 + values[n / 2] / 2.0;
}

ComparisonReport ab_compare(const kg::KnowledgeGraph& base, const kg::KnowledgeGraph& augmented,
                            const TrainConfig& cfg, std::size_t n_seeds) {
  if (n_seeds < 1) throw InvalidArgument("ab_compare needs n_seeds >= 1");
  cfg.validate();
  require_shared_eval_data(base, augmented);

  ComparisonReport report;
  report.config = cfg;
  report.base_fingerprint = kg::dataset_fingerprint(base);
  report.augmented_fingerprint = kg::dataset_fingerprint(augmented);
  report.base_train = base.train().size();
  report.augmented_train = augmented.train().size();

  for (std::size_t i = 0; i < n_seeds; ++i) {
    TrainConfig run = cfg;
    run.seed = cfg.seed + i;
    SeedRow row;
    row.seed = run.seed;
    row.base = link_prediction(train(base, run).model, base, kg::Split::kTest).metrics;
    row.augmented = link_prediction(train(augmented, run).model, augmented, kg::Split::kTest).metrics;
    row.delta = delta(row.base, row.augmented);
    report.rows.push_back(row);
  }
  report.median_base = median_of(report.rows, [](const SeedRow& r) { return r.base; });
  report.median_augmented = median_of(report.rows, [](const SeedRow& r) { return r.augmented; });
  report.median_delta = median_of(report.rows, [](const SeedRow& r) { return r.delta; });
  return report;
}

std::string ComparisonReport::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = report_json::config_json(config);
  j["base_fingerprint"] = base_fingerprint;
  j["augmented_fingerprint"] = augmented_fingerprint;
  j["base_train_triples"] = base_train;
  j["augmented_train_triples"] = augmented_train;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"seed", r.seed},
                         {"base", report_json::metrics_json(r.base)},
                         {"augmented", report_json::metrics_json(r.augmented)},
                         {"delta", report_json::metrics_json(r.delta)}});
  }
  j["median"] = {{"base", report_json::metrics_json(median_base)},
                 {"augmented", report_json::metrics_json(median_augmented)},
                 {"delta", report_json::metrics_json(median_delta)}};
  return j.dump(2) + "\n";
}

std::string ComparisonReport::to_table() const {
  struct Column {
    const char* name;
    double Metrics::*field;
    const char* spec;
    const char* delta_spec;
  };
  static const Column kColumns[] = {
      {"MR", &Metrics::mr, "%.2f", "%+.2f"},
      {"MRR", &Metrics::mrr, "%.4f", "%+.4f"},
      {"H@1", &Metrics::hits1, "%.4f", "%+.4f"},
      {"H@3", &Metrics::hits3, "%.4f", "%+.4f"},
      {"H@10", &Metrics::hits10, "%.4f", "%+.4f"},
  };
  constexpr std::size_t kSeedWidth = 8;
  constexpr std::size_t kWidth = 10;

  std::string out = "model " + std::string(model_kind_name(config.model)) + ", dim " +
                    std::to_string(config.dim) + ", epochs " + std::to_string(config.epochs) +
                    ", train " + std::to_string(base_train) + " -> " +
                    std::to_string(augmented_train) + " triples\n";
  out += pad("seed", kSeedWidth);
  for (const auto& c : kColumns) {
    out += pad(std::string(c.name), kWidth);
    out += pad(std::string(c.name) + "+", kWidth);
    out += pad("d" + std::string(c.name), kWidth);
  }
  out += '\n';
  auto line = [&](const std::string& label, const Metrics& b, const Metrics& a, const Metrics& d) {
    out += pad(label, kSeedWidth);
    for (const auto& c : kColumns) {
      out += pad(fmt(c.spec, b.*c.field), kWidth);
      out += pad(fmt(c.spec, a.*c.field), kWidth);
      out += pad(fmt(c.delta_spec, d.*c.field), kWidth);
    }
    out += '\n';
  };
  for (const auto& r : rows) line(std::to_string(r.seed), r.base, r.augmented, r.delta);
  line("median", median_base, median_augmented, median_delta);
  return out;
}

}  // namespace kgforge::eval
