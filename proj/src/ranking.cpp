#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "eval_json.hpp"
#include "kgforge/errors.hpp"
#include "kgforge/eval.hpp"

namespace kgforge::eval {
namespace {

std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

const std::vector<kg::EntityIndex> kNone;

// Scores every entity in the missing slot. Each candidate is evaluated with
// the same arithmetic as EmbeddingModel::score so ranks agree with a direct
// per-triple evaluation.
void candidate_scores(const EmbeddingModel& m, const kg::Triple& q, Direction dir,
                      std::vector<double>& scores) {
  const std::size_t n = m.entity_count();
  const std::size_t d = m.dim();
  scores.resize(n);
  auto r = m.relation(q.relation);
  const bool l1 = m.norm() == Norm::kL1;
  if (dir == Direction::kPredictTail) {
    auto h = m.entity(q.head);
    for (std::size_t c = 0; c < n; ++c) {
      auto t = m.entity(static_cast<kg::EntityIndex>(c));
      double s = 0.0;
      if (m.kind() == ModelKind::kDistMult) {
        for (std::size_t i = 0; i < d; ++i) s += h[i] * r[i] * t[i];
        scores[c] = s;
        continue;
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double x = h[i] + r[i] - t[i];
        s += l1 ? std::abs(x) : x * x;
      }
      scores[c] = l1 ? -s : -std::sqrt(s);
    }
  } else {
    auto t = m.entity(q.tail);
    for (std::size_t c = 0; c < n; ++c) {
      auto h = m.entity(static_cast<kg::EntityIndex>(c));
      double s = 0.0;
      if (m.kind() == ModelKind::kDistMult) {
        for (std::size_t i = 0; i < d; ++i) s += h[i] * r[i] * t[i];
        scores[c] = s;
        continue;
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double x = h[i] + r[i] - t[i];
        s += l1 ? std::abs(x) : x * x;
      }
      scores[c] = l1 ? -s : -std::sqrt(s);
    }
  }
}

RankRecord rank_with_buffers(const EmbeddingModel& model, const KnownTriples& known,
                             const kg::Triple& triple, Direction direction,
                             std::vector<double>& scores, std::vector<std::uint8_t>& mask) {
  if (triple.head >= model.entity_count() || triple.tail >= model.entity_count() ||
      triple.relation >= model.relation_count()) {
    throw InvalidArgument("rank_entities: query references an unknown entity or relation");
  }
  candidate_scores(model, triple, direction, scores);
  RankRecord rec;
  rec.direction = direction;
  rec.triple = triple;
  rec.gold = direction == Direction::kPredictTail ? triple.tail : triple.head;
  auto filtered = direction == Direction::kPredictTail ? known.tails(triple.head, triple.relation)
                                                       : known.heads(triple.relation, triple.tail);
  mask.resize(scores.size(), 0);
  for (kg::EntityIndex e : filtered) mask[e] = 1;
  Ranks ranks = rank_from_scores(scores, rec.gold, mask);
  for (kg::EntityIndex e : filtered) mask[e] = 0;
  rec.raw_rank = ranks.raw;
  rec.filtered_rank = ranks.filtered;
  return rec;
}

}  // namespace

KnownTriples::KnownTriples(const kg::KnowledgeGraph& kg) {
  for (auto s : {kg::Split::kTrain, kg::Split::kValid, kg::Split::kTest}) {
    for (const auto& t : kg.split(s).positives()) {
      tails_[pack(t.head, t.relation)].push_back(t.tail);
      heads_[pack(t.relation, t.tail)].push_back(t.head);
    }
  }
  for (auto* index : {&tails_, &heads_}) {
    for (auto& [_, v] : *index) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }
}

bool KnownTriples::contains(const kg::Triple& t) const {
  auto v = tails(t.head, t.relation);
  return std::binary_search(v.begin(), v.end(), t.tail);
}

std::span<const kg::EntityIndex> KnownTriples::tails(kg::EntityIndex h, kg::RelationIndex r) const {
  auto it = tails_.find(pack(h, r));
  return it == tails_.end() ? std::span<const kg::EntityIndex>(kNone) : std::span(it->second);
}

std::span<const kg::EntityIndex> KnownTriples::heads(kg::RelationIndex r, kg::EntityIndex t) const {
  auto it = heads_.find(pack(r, t));
  return it == heads_.end() ? std::span<const kg::EntityIndex>(kNone) : std::span(it->second);
}

Ranks rank_from_scores(std::span<const double> scores, std::size_t gold,
                       std::span<const std::uint8_t> exclude) {
  if (gold >= scores.size()) throw InvalidArgument("rank_from_scores: gold index out of range");
  if (!exclude.empty() && exclude.size() != scores.size()) {
    throw InvalidArgument("rank_from_scores: exclude mask size mismatch");
  }
  const double g = scores[gold];
  Ranks r;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (c == gold || !(scores[c] >= g)) continue;
    ++r.raw;
    if (exclude.empty() || !exclude[c]) ++r.filtered;
  }
  return r;
}

RankRecord rank_entities(const EmbeddingModel& model, const KnownTriples& known,
                         const kg::Triple& triple, Direction direction) {
  std::vector<double> scores;
  std::vector<std::uint8_t> mask;
  return rank_with_buffers(model, known, triple, direction, scores, mask);
}

Metrics metrics_from_ranks(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw InvalidArgument("metrics need at least one rank");
  Metrics m;
  m.n_queries = ranks.size();
  double sum_rank = 0.0, sum_rr = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (std::size_t r : ranks) {
    if (r < 1) throw InvalidArgument("ranks start at 1");
    sum_rank += static_cast<double>(r);
    sum_rr += 1.0 / static_cast<double>(r);
    h1 += r <= 1;
    h3 += r <= 3;
    h10 += r <= 10;
  }
  const auto n = static_cast<double>(ranks.size());
  m.mr = sum_rank / n;
  m.mrr = sum_rr / n;
  m.hits1 = static_cast<double>(h1) / n;
  m.hits3 = static_cast<double>(h3) / n;
  m.hits10 = static_cast<double>(h10) / n;
  return m;
}

EvalReport link_prediction(const EmbeddingModel& model, const kg::KnowledgeGraph& kg,
                           kg::Split split, FilterMode filter, std::vector<RankRecord>* records) {
  const std::vector<kg::Triple> queries = kg.split(split).positives();
  if (queries.empty()) {
    throw InvalidArgument("link_prediction: split '" + std::string(kg::split_name(split)) +
                          "' has no positive triples");
  }
  if (model.entity_count() != kg.entity_count() || model.relation_count() != kg.relation_count()) {
    throw InvalidArgument("link_prediction: model was trained on a different graph");
  }
  const KnownTriples known(kg);

  // Query 2i predicts the tail of triple i, query 2i+1 its head.
  std::vector<RankRecord> out(queries.size() * 2);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    std::vector<double> scores;
    std::vector<std::uint8_t> mask;
    for (std::size_t q = next.fetch_add(1); q < out.size(); q = next.fetch_add(1)) {
      const Direction dir = q % 2 == 0 ? Direction::kPredictTail : Direction::kPredictHead;
      out[q] = rank_with_buffers(model, known, queries[q / 2], dir, scores, mask);
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1,
                                                        std::max<std::size_t>(1, out.size() / 64));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
  }

  std::vector<std::size_t> ranks;
  ranks.reserve(out.size());
  for (const auto& r : out) ranks.push_back(r.rank(filter));

  EvalReport report;
  report.metrics = metrics_from_ranks(ranks);
  report.filter = filter;
  report.split = std::string(kg::split_name(split));
  report.config = model.config();
  report.dataset_fingerprint = kg::dataset_fingerprint(kg);
  if (records) *records = std::move(out);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["split"] = split;
  j["filter"] = filter == FilterMode::kRaw ? "raw" : "filtered";
  j["metrics"] = report_json::metrics_json(metrics);
  j["config"] = report_json::config_json(config);
  j["seed"] = config.seed;
  j["dataset_fingerprint"] = dataset_fingerprint;
  return j.dump(2) + "\n";
}

}  // namespace kgforge::eval
