#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgforge/graph.hpp"

namespace kgforge::eval {

enum class ModelKind { kTransE, kDistMult };
enum class Norm { kL1, kL2 };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct TrainConfig {
  ModelKind model = ModelKind::kTransE;
  std::size_t dim = 50;
  std::size_t epochs = 100;
  double learning_rate = 0.01;
  double margin = 1.0;  // TransE only
  std::size_t negatives_per_positive = 1;
  std::size_t batch_size = 128;
  std::uint64_t seed = 7;
  Norm norm = Norm::kL1;  // TransE distance
  double l2_reg = 0.0;    // DistMult weight decay

  void validate() const;
};

// Entity and relation vectors stored row-major, one row per graph index.
class EmbeddingModel {
 public:
  EmbeddingModel(const kg::KnowledgeGraph& kg, const TrainConfig& config);

  ModelKind kind() const { return config_.model; }
  Norm norm() const { return config_.norm; }
  std::size_t dim() const { return config_.dim; }
  const TrainConfig& config() const { return config_; }
  std::size_t entity_count() const { return entity_ids_.size(); }
  std::size_t relation_count() const { return relation_ids_.size(); }

  std::span<double> entity(kg::EntityIndex e);
  std::span<const double> entity(kg::EntityIndex e) const;
  std::span<double> relation(kg::RelationIndex r);
  std::span<const double> relation(kg::RelationIndex r) const;

  // Higher is more plausible for both model kinds.
  double score(kg::EntityIndex h, kg::RelationIndex r, kg::EntityIndex t) const;
  // Same, addressed by ids. Throws InvalidArgument on an unknown id.
  double score(std::string_view h, std::string_view r, std::string_view t) const;

  bool all_finite() const;

  const std::vector<double>& entity_data() const { return entities_; }
  const std::vector<double>& relation_data() const { return relations_; }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&);

 private:
  TrainConfig config_;
  std::vector<std::string> entity_ids_;
  std::vector<std::string> relation_ids_;
  std::unordered_map<std::string, kg::EntityIndex> entity_index_;
  std::unordered_map<std::string, kg::RelationIndex> relation_index_;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

struct TrainResult {
  EmbeddingModel model;
  std::vector<double> epoch_losses;  // summed loss per epoch
};

TrainResult train(const kg::KnowledgeGraph& kg, const TrainConfig& cfg);

double score_triple(const EmbeddingModel& model, std::string_view h, std::string_view r,
                    std::string_view t);

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

enum class Direction { kPredictTail, kPredictHead };
enum class FilterMode { kRaw, kFiltered };

// Positive triples from every split, indexed for filtered ranking.
class KnownTriples {
 public:
  explicit KnownTriples(const kg::KnowledgeGraph& kg);
  bool contains(const kg::Triple& t) const;
  // Known tails of (h, r, ?) / heads of (?, r, t).
  std::span<const kg::EntityIndex> tails(kg::EntityIndex h, kg::RelationIndex r) const;
  std::span<const kg::EntityIndex> heads(kg::RelationIndex r, kg::EntityIndex t) const;

 private:
  std::unordered_map<std::uint64_t, std::vector<kg::EntityIndex>> tails_;
  std::unordered_map<std::uint64_t, std::vector<kg::EntityIndex>> heads_;
};

struct Ranks {
  std::size_t raw = 1;
  std::size_t filtered = 1;
};

// 1 + number of candidates scoring at least as high as gold (ties count
// against gold). The filtered rank ignores candidates flagged in `exclude`;
// an empty span excludes nothing. Gold itself is never excluded.
Ranks rank_from_scores(std::span<const double> scores, std::size_t gold,
                       std::span<const std::uint8_t> exclude = {});

struct RankRecord {
  Direction direction = Direction::kPredictTail;
  kg::Triple triple;
  kg::EntityIndex gold = 0;
  std::size_t raw_rank = 1;
  std::size_t filtered_rank = 1;

  std::size_t rank(FilterMode mode) const {
    return mode == FilterMode::kRaw ? raw_rank : filtered_rank;
  }
};

RankRecord rank_entities(const EmbeddingModel& model, const KnownTriples& known,
                         const kg::Triple& triple, Direction direction);

struct Metrics {
  double mr = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t n_queries = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Throws InvalidArgument on an empty rank list or a rank below 1.
Metrics metrics_from_ranks(std::span<const std::size_t> ranks);

struct EvalReport {
  Metrics metrics;
  FilterMode filter = FilterMode::kFiltered;
  std::string split;
  TrainConfig config;
  std::string dataset_fingerprint;

  std::string to_json() const;
};

// Ranks both directions of every positive triple in `split`
// (2 * |split| queries, pooled).
EvalReport link_prediction(const EmbeddingModel& model, const kg::KnowledgeGraph& kg,
                           kg::Split split, FilterMode filter = FilterMode::kFiltered,
                           std::vector<RankRecord>* records = nullptr);

// ---------------------------------------------------------------------------
// Triplet classification
// ---------------------------------------------------------------------------

struct ScoredTriple {
  kg::RelationIndex relation = 0;
  double score = 0.0;
  bool positive = false;
};

struct ThresholdChoice {
  double threshold = 0.0;
  double accuracy = 0.0;
};

// Picks the cut that maximizes accuracy of "positive iff score > threshold".
// Cuts sit at midpoints between consecutive distinct scores; among equally
// good cuts the highest threshold wins.
ThresholdChoice choose_threshold(std::span<const ScoredTriple> scored);

struct ClassificationReport {
  double accuracy = 0.0;
  std::size_t n_test = 0;
  double global_threshold = 0.0;
  std::map<kg::RelationIndex, double> thresholds;  // relations seen in validation
  std::size_t fallback_relations = 0;              // test relations using the global cut

  std::string to_json() const;
};

// Per-relation thresholds fitted on `valid`, applied to `test`.
ClassificationReport classify(std::span<const ScoredTriple> valid,
                              std::span<const ScoredTriple> test);

// Scores valid/test. Unlabeled splits get one tail-corrupted negative per
// positive, drawn with `negatives_seed`.
ClassificationReport triplet_classification(const EmbeddingModel& model,
                                            const kg::KnowledgeGraph& kg,
                                            std::uint64_t negatives_seed);

// ---------------------------------------------------------------------------
// A/B comparison
// ---------------------------------------------------------------------------

struct SeedRow {
  std::uint64_t seed = 0;
  Metrics base;
  Metrics augmented;
  Metrics delta;  // augmented - base
};

struct ComparisonReport {
  TrainConfig config;
  std::string base_fingerprint;
  std::string augmented_fingerprint;
  std::size_t base_train = 0;
  std::size_t augmented_train = 0;
  std::vector<SeedRow> rows;
  Metrics median_base;
  Metrics median_augmented;
  Metrics median_delta;

  std::string to_json() const;
  std::string to_table() const;
};

// Trains on each graph with seeds cfg.seed .. cfg.seed + n_seeds - 1 and
// evaluates filtered link prediction on the shared test split. Throws
// InvalidArgument when the graphs differ in entities, valid or test.
ComparisonReport ab_compare(const kg::KnowledgeGraph& base, const kg::KnowledgeGraph& augmented,
                            const TrainConfig& cfg, std::size_t n_seeds);

double median(std::vector<double> values);

}  // namespace kgforge::eval
