#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jointkg/params.hpp"
#include "jointkg/text_encoder.hpp"
#include "jointkg/transe.hpp"
#include "jointkg/vocab.hpp"

namespace jointkg {

// Hits@10 per (direction x relation class) plus the two overall averages,
// mirroring the entity-prediction table layout.
struct EntityPredictionReport {
  bool filtered = true;
  // [0] = predicting head, [1] = predicting tail; class order
  // 1-to-1, 1-to-N, N-to-1, N-to-N; percentages in [0, 100]
  double hits10[2][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}};
  double triple_avg = 0.0;    // over all (triple, direction) pairs
  double relation_avg = 0.0;  // unweighted mean of per-relation Hits@10

  void save(const std::string& path) const;
};

struct RelationPredictionReport {
  bool filtered = true;
  double per_class[4] = {0, 0, 0, 0};  // Top-1 accuracy, percent
  double overall = 0.0;

  void save(const std::string& path) const;
};

// (recall, precision) points swept over the ranked candidate list.
struct PrCurve {
  std::vector<std::pair<double, double>> points;
  int total_candidates = 0;
  int total_correct = 0;
  int excluded_pairs = 0;  // candidate pairs with zero sentences

  void save_csv(const std::string& path) const;
};

// Rank of the gold entity when the head (predict_head) or tail slot of
// `gold` is replaced by every entity. Filtered mode drops candidates that
// form a known triple other than the gold one. Ties are optimistic:
// rank = 1 + number of strictly better candidates.
int rank_entities(const EmbeddingBank& bank, const TripleStore& store,
                  const Triple& gold, bool predict_head, bool filtered,
                  const ScoreOptions& opts = {});

int rank_relations(const EmbeddingBank& bank, const TripleStore& store,
                   const Triple& gold, bool filtered,
                   const ScoreOptions& opts = {});

EntityPredictionReport entity_prediction_eval(
    const EmbeddingBank& bank, const TripleStore& store,
    const std::vector<RelationClass>& classes, bool filtered, int threads = 1,
    const ScoreOptions& opts = {});

RelationPredictionReport relation_prediction_eval(
    const EmbeddingBank& bank, const TripleStore& store,
    const std::vector<RelationClass>& classes, bool filtered, int threads = 1,
    const ScoreOptions& opts = {});

struct RelationClassificationOptions {
  int top_k_relations = 100;
  bool mean_aggregation = false;  // default: min distance over a pair's sentences
  int max_sentence_len = 120;
};

// Ranks (entity pair, relation) candidates by CNN sentence scores alone and
// sweeps the ranked list against KG membership, producing a PR curve.
PrCurve relation_classification_eval(
    const EmbeddingBank& bank, const ConvParams& conv,
    const std::vector<AlignedSentence>& test_sentences, const TripleStore& store,
    const RelationClassificationOptions& opts = {});

}  // namespace jointkg
