#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "eval_json.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/eval.hpp"
#include "rng.hpp"

namespace kgforge::eval {
namespace {

std::vector<ScoredTriple> score_split(const EmbeddingModel& model, const kg::KnowledgeGraph& kg,
                                      const KnownTriples& known, kg::Split split,
                                      kgforge::detail::Rng& rng) {
  const auto& data = kg.split(split);
  std::vector<ScoredTriple> out;
  if (data.labeled()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& t = data.triples[i];
      out.push_back({t.relation, model.score(t.head, t.relation, t.tail), data.is_positive(i)});
    }
    return out;
  }
  const std::size_t n = kg.entity_count();
  for (const auto& t : data.triples) {
    out.push_back({t.relation, model.score(t.head, t.relation, t.tail), true});
    if (n < 2) continue;
    kg::Triple neg = t;
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto c = static_cast<kg::EntityIndex>(kgforge::detail::uniform_index(rng, n - 1));
      if (c >= t.tail) ++c;
      neg.tail = c;
      if (!known.contains(neg)) break;
    }
    out.push_back({t.relation, model.score(neg.head, neg.relation, neg.tail), false});
  }
  return out;
}

}  // namespace

ThresholdChoice choose_threshold(std::span<const ScoredTriple> scored) {
  if (scored.empty()) throw InvalidArgument("choose_threshold needs at least one scored triple");
  std::vector<ScoredTriple> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredTriple& a, const ScoredTriple& b) { return a.score > b.score; });

  // Start above everything (all predicted negative) and lower the cut one
  // distinct score at a time.
  std::size_t correct = 0;
  for (const auto& s : sorted) correct += !s.positive;
  const auto n = static_cast<double>(sorted.size());
  ThresholdChoice best{sorted.front().score, static_cast<double>(correct) / n};
  std::size_t best_correct = correct;

  std::size_t i = 0;
  while (i < sorted.size()) {
    const double group = sorted[i].score;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].score == group; ++j) {
      if (sorted[j].positive) {
        ++correct;
      } else {
        --correct;
      }
    }
    double cut;
    if (j < sorted.size()) {
      cut = group / 2.0 + sorted[j].score / 2.0;
    } else {
      cut = std::min(group - 1.0, std::nextafter(group, -std::numeric_limits<double>::infinity()));
    }
    if (correct > best_correct) {
      best_correct = correct;
      best = {cut, static_cast<double>(correct) / n};
    }
    i = j;
  }
  return best;
}

ClassificationReport classify(std::span<const ScoredTriple> valid,
                              std::span<const ScoredTriple> test) {
  if (valid.empty()) throw InvalidArgument("triplet classification needs validation triples");
  if (test.empty()) throw InvalidArgument("triplet classification needs test triples");
  ClassificationReport report;
  report.global_threshold = choose_threshold(valid).threshold;

  std::map<kg::RelationIndex, std::vector<ScoredTriple>> by_relation;
  for (const auto& s : valid) by_relation[s.relation].push_back(s);
  for (const auto& [r, items] : by_relation) report.thresholds[r] = choose_threshold(items).threshold;

  std::set<kg::RelationIndex> fallback;
  std::size_t correct = 0;
  for (const auto& s : test) {
    auto it = report.thresholds.find(s.relation);
    double thr = report.global_threshold;
    if (it != report.thresholds.end()) {
      thr = it->second;
    } else {
      fallback.insert(s.relation);
    }
    correct += (s.score > thr) == s.positive;
  }
  report.n_test = test.size();
  report.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  report.fallback_relations = fallback.size();
  return report;
}

ClassificationReport triplet_classification(const EmbeddingModel& model,
                                            const kg::KnowledgeGraph& kg,
                                            std::uint64_t negatives_seed) {
  if (kg.valid().size() == 0 || kg.test().size() == 0) {
    throw InvalidArgument("triplet classification needs non-empty valid and test splits");
  }
  const KnownTriples known(kg);
  kgforge::detail::Rng rng(negatives_seed);
  const auto valid = score_split(model, kg, known, kg::Split::kValid, rng);
  const auto test = score_split(model, kg, known, kg::Split::kTest, rng);
  return classify(valid, test);
}

std::string ClassificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["n_test"] = n_test;
  j["global_threshold"] = global_threshold;
  j["fallback_relations"] = fallback_relations;
  j["thresholds"] = nlohmann::ordered_json::array();
  for (const auto& [r, thr] : thresholds) j["thresholds"].push_back({{"relation", r}, {"threshold", thr}});
  return j.dump(2) + "\n";
}

}  // namespace kgforge::eval
