#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

#include "kgforge/errors.hpp"
#include "kgforge/eval.hpp"
#include "rng.hpp"

namespace kgforge::eval {
namespace {

using detail::Rng;

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void normalize(std::span<double> v) {
  const double n = l2_norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

kg::EntityIndex other_entity(Rng& rng, std::size_t n_entities, kg::EntityIndex avoid) {
  auto c = static_cast<kg::EntityIndex>(detail::uniform_index(rng, n_entities - 1));
  if (c >= avoid) ++c;
  return c;
}

// Dense gradient buffer that remembers which rows it touched, so clearing it
// costs O(touched rows) rather than O(|E| * dim).
class SparseGrad {
 public:
  SparseGrad(std::size_t rows, std::size_t dim) : dim_(dim), data_(rows * dim, 0.0), mark_(rows, 0) {}

  std::span<double> row(std::size_t r) {
    if (!mark_[r]) {
      mark_[r] = 1;
      touched_.push_back(r);
    }
    return {data_.data() + r * dim_, dim_};
  }

  template <typename Fn>
  void apply_and_clear(Fn&& fn) {
    for (std::size_t r : touched_) {
      std::span<double> g(data_.data() + r * dim_, dim_);
      fn(r, g);
      std::fill(g.begin(), g.end(), 0.0);
      mark_[r] = 0;
    }
    touched_.clear();
  }

 private:
  std::size_t dim_;
  std::vector<double> data_;
  std::vector<std::uint8_t> mark_;
  std::vector<std::size_t> touched_;
};

struct Pair {
  kg::Triple pos;
  kg::Triple neg;
};

double transe_pair(EmbeddingModel& m, const Pair& p, SparseGrad& ge, SparseGrad& gr,
                   std::vector<double>& dp, std::vector<double>& dn) {
  const std::size_t d = m.dim();
  auto diff = [&](const kg::Triple& t, std::vector<double>& out) {
    auto h = m.entity(t.head);
    auto r = m.relation(t.relation);
    auto tl = m.entity(t.tail);
    double dist = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      out[i] = h[i] + r[i] - tl[i];
      dist += m.norm() == Norm::kL1 ? std::abs(out[i]) : out[i] * out[i];
    }
    return m.norm() == Norm::kL1 ? dist : std::sqrt(dist);
  };
  const double d_pos = diff(p.pos, dp);
  const double d_neg = diff(p.neg, dn);
  const double loss = m.config().margin + d_pos - d_neg;
  if (loss <= 0.0) return 0.0;

  // d(dist)/d(diff), written back into dp / dn.
  auto to_grad = [&](std::vector<double>& v, double dist) {
    if (m.norm() == Norm::kL1) {
      for (double& x : v) x = static_cast<double>((x > 0.0) - (x < 0.0));
    } else {
      const double inv = 1.0 / std::max(dist, 1e-12);
      for (double& x : v) x *= inv;
    }
  };
  to_grad(dp, d_pos);
  to_grad(dn, d_neg);

  auto gh = ge.row(p.pos.head);
  for (std::size_t i = 0; i < d; ++i) gh[i] += dp[i];
  auto grp = gr.row(p.pos.relation);
  for (std::size_t i = 0; i < d; ++i) grp[i] += dp[i];
  auto gt = ge.row(p.pos.tail);
  for (std::size_t i = 0; i < d; ++i) gt[i] -= dp[i];
  auto nh = ge.row(p.neg.head);
  for (std::size_t i = 0; i < d; ++i) nh[i] -= dn[i];
  auto nr = gr.row(p.neg.relation);
  for (std::size_t i = 0; i < d; ++i) nr[i] -= dn[i];
  auto nt = ge.row(p.neg.tail);
  for (std::size_t i = 0; i < d; ++i) nt[i] += dn[i];
  return loss;
}

// Logistic loss on one triple; `sign` is +1 for positives, -1 for negatives.
double distmult_triple(EmbeddingModel& m, const kg::Triple& t, double sign, SparseGrad& ge,
                       SparseGrad& gr) {
  const std::size_t d = m.dim();
  auto h = m.entity(t.head);
  auto r = m.relation(t.relation);
  auto tl = m.entity(t.tail);
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += h[i] * r[i] * tl[i];
  double loss = softplus(-sign * s);
  const double c = -sign * sigmoid(-sign * s);
  const double reg = m.config().l2_reg;

  auto gh = ge.row(t.head);
  auto grr = gr.row(t.relation);
  auto gt = ge.row(t.tail);
  for (std::size_t i = 0; i < d; ++i) {
    gh[i] += c * r[i] * tl[i];
    grr[i] += c * h[i] * tl[i];
    gt[i] += c * h[i] * r[i];
  }
  if (reg > 0.0) {
    for (std::size_t i = 0; i < d; ++i) {
      loss += reg * (h[i] * h[i] + r[i] * r[i] + tl[i] * tl[i]);
      gh[i] += 2.0 * reg * h[i];
      grr[i] += 2.0 * reg * r[i];
      gt[i] += 2.0 * reg * tl[i];
    }
  }
  return loss;
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  return kind == ModelKind::kTransE ? "TransE" : "DistMult";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "transe") return ModelKind::kTransE;
  if (lower == "distmult") return ModelKind::kDistMult;
  throw InvalidArgument("unknown model kind: " + std::string(name));
}

void TrainConfig::validate() const {
  if (dim < 1) throw InvalidArgument("dim must be >= 1");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be a positive finite number");
  }
  if (model == ModelKind::kTransE && (!(margin > 0.0) || !std::isfinite(margin))) {
    throw InvalidArgument("margin must be a positive finite number");
  }
  if (negatives_per_positive < 1) throw InvalidArgument("negatives_per_positive must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(l2_reg >= 0.0) || !std::isfinite(l2_reg)) throw InvalidArgument("l2_reg must be >= 0");
}

EmbeddingModel::EmbeddingModel(const kg::KnowledgeGraph& kg, const TrainConfig& config)
    : config_(config),
      entity_ids_(kg.entity_ids().begin(), kg.entity_ids().end()),
      relation_ids_(kg.relation_ids().begin(), kg.relation_ids().end()),
      entities_(entity_ids_.size() * config.dim, 0.0),
      relations_(relation_ids_.size() * config.dim, 0.0) {
  if (config_.dim < 1) throw InvalidArgument("dim must be >= 1");
  for (std::size_t i = 0; i < entity_ids_.size(); ++i) {
    entity_index_.emplace(entity_ids_[i], static_cast<kg::EntityIndex>(i));
  }
  for (std::size_t i = 0; i < relation_ids_.size(); ++i) {
    relation_index_.emplace(relation_ids_[i], static_cast<kg::RelationIndex>(i));
  }
}

std::span<double> EmbeddingModel::entity(kg::EntityIndex e) {
  return {entities_.data() + static_cast<std::size_t>(e) * config_.dim, config_.dim};
}
std::span<const double> EmbeddingModel::entity(kg::EntityIndex e) const {
  return {entities_.data() + static_cast<std::size_t>(e) * config_.dim, config_.dim};
}
std::span<double> EmbeddingModel::relation(kg::RelationIndex r) {
  return {relations_.data() + static_cast<std::size_t>(r) * config_.dim, config_.dim};
}
std::span<const double> EmbeddingModel::relation(kg::RelationIndex r) const {
  return {relations_.data() + static_cast<std::size_t>(r) * config_.dim, config_.dim};
}

double EmbeddingModel::score(kg::EntityIndex h, kg::RelationIndex r, kg::EntityIndex t) const {
  if (h >= entity_count() || t >= entity_count() || r >= relation_count()) {
    throw InvalidArgument("score: index out of range");
  }
  auto vh = entity(h);
  auto vr = relation(r);
  auto vt = entity(t);
  double s = 0.0;
  if (config_.model == ModelKind::kDistMult) {
    for (std::size_t i = 0; i < config_.dim; ++i) s += vh[i] * vr[i] * vt[i];
    return s;
  }
  for (std::size_t i = 0; i < config_.dim; ++i) {
    const double x = vh[i] + vr[i] - vt[i];
    s += config_.norm == Norm::kL1 ? std::abs(x) : x * x;
  }
  return config_.norm == Norm::kL1 ? -s : -std::sqrt(s);
}

double EmbeddingModel::score(std::string_view h, std::string_view r, std::string_view t) const {
  auto find_e = [&](std::string_view id) {
    auto it = entity_index_.find(std::string(id));
    if (it == entity_index_.end()) throw InvalidArgument("unknown entity: " + std::string(id));
    return it->second;
  };
  auto it = relation_index_.find(std::string(r));
  if (it == relation_index_.end()) throw InvalidArgument("unknown relation: " + std::string(r));
  return score(find_e(h), it->second, find_e(t));
}

bool EmbeddingModel::all_finite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(entities_.begin(), entities_.end(), finite) &&
         std::all_of(relations_.begin(), relations_.end(), finite);
}

bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
  auto same_bits = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() &&
           (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  };
  return a.config_.model == b.config_.model && a.config_.dim == b.config_.dim &&
         a.config_.norm == b.config_.norm && a.entity_ids_ == b.entity_ids_ &&
         a.relation_ids_ == b.relation_ids_ && same_bits(a.entities_, b.entities_) &&
         same_bits(a.relations_, b.relations_);
}

double score_triple(const EmbeddingModel& model, std::string_view h, std::string_view r,
                    std::string_view t) {
  return model.score(h, r, t);
}

TrainResult train(const kg::KnowledgeGraph& kg, const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<kg::Triple> positives = kg.train().positives();
  if (positives.empty()) throw InvalidArgument("training split has no positive triples");
  if (kg.entity_count() < 2) throw InvalidArgument("training needs at least two entities");

  TrainResult result{EmbeddingModel(kg, cfg), {}};
  EmbeddingModel& m = result.model;
  Rng rng(cfg.seed);

  const double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));
  for (kg::EntityIndex e = 0; e < m.entity_count(); ++e) {
    for (double& x : m.entity(e)) x = detail::uniform_real(rng, -bound, bound);
    normalize(m.entity(e));
  }
  for (kg::RelationIndex r = 0; r < m.relation_count(); ++r) {
    for (double& x : m.relation(r)) x = detail::uniform_real(rng, -bound, bound);
    if (cfg.model == ModelKind::kTransE) normalize(m.relation(r));
  }

  const std::size_t n_ent = m.entity_count();
  SparseGrad ge(n_ent, cfg.dim);
  SparseGrad gr(m.relation_count(), cfg.dim);
  std::vector<double> dp(cfg.dim), dn(cfg.dim);
  std::vector<std::size_t> order(positives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Pair> pairs;
  std::vector<std::uint8_t> seen(n_ent, 0);
  std::vector<kg::EntityIndex> batch_entities;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    detail::shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      pairs.clear();
      for (std::size_t i = start; i < end; ++i) {
        const kg::Triple& pos = positives[order[i]];
        for (std::size_t n = 0; n < cfg.negatives_per_positive; ++n) {
          kg::Triple neg = pos;
          if (detail::uniform_index(rng, 2) == 0) {
            neg.head = other_entity(rng, n_ent, pos.head);
          } else {
            neg.tail = other_entity(rng, n_ent, pos.tail);
          }
          pairs.push_back({pos, neg});
        }
      }

      // Entities are kept on the unit sphere; renormalize the ones this
      // batch is about to read.
      batch_entities.clear();
      auto note = [&](kg::EntityIndex e) {
        if (!seen[e]) {
          seen[e] = 1;
          batch_entities.push_back(e);
        }
      };
      for (const auto& p : pairs) {
        note(p.pos.head);
        note(p.pos.tail);
        note(p.neg.head);
        note(p.neg.tail);
      }
      for (kg::EntityIndex e : batch_entities) {
        normalize(m.entity(e));
        seen[e] = 0;
      }

      double batch_loss = 0.0;
      for (const auto& p : pairs) {
        if (cfg.model == ModelKind::kTransE) {
          batch_loss += transe_pair(m, p, ge, gr, dp, dn);
        } else {
          batch_loss += distmult_triple(m, p.pos, 1.0, ge, gr);
          batch_loss += distmult_triple(m, p.neg, -1.0, ge, gr);
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(batch + 1) + " (" + std::string(model_kind_name(cfg.model)) +
                            ", lr " + std::to_string(cfg.learning_rate) + ")");
      }
      epoch_loss += batch_loss;

      ge.apply_and_clear([&](std::size_t row, std::span<double> g) {
        auto v = m.entity(static_cast<kg::EntityIndex>(row));
        for (std::size_t i = 0; i < cfg.dim; ++i) v[i] -= cfg.learning_rate * g[i];
      });
      gr.apply_and_clear([&](std::size_t row, std::span<double> g) {
        auto v = m.relation(static_cast<kg::RelationIndex>(row));
        for (std::size_t i = 0; i < cfg.dim; ++i) v[i] -= cfg.learning_rate * g[i];
      });
    }
    result.epoch_losses.push_back(epoch_loss);
  }
  if (!m.all_finite()) throw TrainingError("training produced non-finite embeddings");
  return result;
}

}  // namespace kgforge::eval
