#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jointkg/common.hpp"
#include "jointkg/params.hpp"
#include "jointkg/vocab.hpp"

namespace jointkg {

enum class Slot { Head, Relation, Tail };

struct Corruption {
  Triple triple;
  Slot slot = Slot::Head;
};

// One positive/negative pair per entry; each negative differs from its
// positive in exactly the marked slot.
struct KgBatch {
  std::vector<Triple> positives;
  std::vector<Corruption> negatives;
};

struct CorruptionOptions {
  // relative weights for corrupting head / relation / tail
  double head_weight = 1.0;
  double relation_weight = 1.0;
  double tail_weight = 1.0;
  // When set, an entity-slot corruption picks head vs tail with the
  // per-relation Bernoulli probability tph/(tph+hpt) instead of the weights.
  bool bernoulli = false;
  const std::vector<double>* bern_head_prob = nullptr;  // indexed by relation
  int max_attempts = 100;
};

// Per-relation probability of corrupting the head under the "bern" scheme.
std::vector<double> bernoulli_head_probs(const TripleStore& store,
                                         int num_relations);

// t - h, the latent relation embedding of an entity pair.
std::vector<double> latent_relation(std::span<const double> h_vec,
                                    std::span<const double> t_vec);

struct ScoreOptions {
  bool squared = false;  // squared-L2 switch; default is plain L2
};

// ||(t - h) - r||_2; lower is better.
double score_triple(const EmbeddingBank& bank, const Triple& t,
                    const ScoreOptions& opts = {});

// Draws a corrupted counterpart of `positive`: slot chosen by the weight
// mixture, replacement uniform over E or R excluding the original, resampled
// while the result is a train triple. Returns nullopt when max_attempts
// resamples all collide with train.
std::optional<Corruption> sample_corruption(Rng& rng, const Triple& positive,
                                            const TripleStore& store,
                                            int num_entities, int num_relations,
                                            const CorruptionOptions& opts = {});

struct KgStepOptions {
  double lr = 0.001;   // alpha_k
  double margin = 1.0;  // gamma
  ScoreOptions score;
};

// Analytic gradients of one hinge term, exposed for gradient checking.
// Entries pair an embedding row id with its accumulated dLoss/dRow.
struct KgGradients {
  double hinge = 0.0;
  std::vector<std::pair<int, std::vector<double>>> entity_grads;
  std::vector<std::pair<int, std::vector<double>>> relation_grads;
};

KgGradients kg_pair_gradients(const EmbeddingBank& bank, const Triple& positive,
                              const Triple& negative, double margin,
                              const ScoreOptions& opts = {});

// One margin-ranking SGD step over the batch: for every pair with positive
// hinge, update all touched embeddings and renormalize the touched entity
// rows. Returns the sum of hinges before the update.
double kg_batch_step(EmbeddingBank& bank, const KgBatch& batch,
                     const KgStepOptions& opts, Rng& rng);

}  // namespace jointkg
