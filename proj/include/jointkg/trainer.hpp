#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jointkg/params.hpp"
#include "jointkg/text_encoder.hpp"
#include "jointkg/transe.hpp"
#include "jointkg/vocab.hpp"

namespace jointkg {

struct TrainConfig {
  double lr_kg = 0.001;   // alpha_k
  double lr_text = 0.025; // alpha_t
  double tau = 0.0001;
  double lambda = 1.0;
  double margin = 1.0;    // gamma, shared by both losses
  int dim = 150;          // k
  int kg_rounds = 3000;
  int text_rounds = 10;
  std::uint64_t seed = 42;
  int batch_size = 1;
  CorruptionOptions corruption;
  bool squared_score = false;
  int k_p = 5;
  int conv_window = 3;
  int d_max = 30;
  int max_sentence_len = 120;
  int threads = 1;  // evaluation-side parallelism; training stays single-threaded

  void validate() const;
};

struct LossHistory {
  struct Row {
    int epoch = 0;
    double kg_loss = 0.0;
    double text_loss = 0.0;
  };
  std::vector<Row> rows;

  // one line per epoch: epoch<TAB>kg_loss<TAB>text_loss
  void save(const std::string& path) const;
};

// Interleaved SGD over L(G) and tau * L(D): each outer step runs the side
// whose completed fraction lags (error diffusion), until the KG train set
// has been traversed kg_rounds times and the corpus text_rounds times.
// Deterministic for a fixed seed.
LossHistory joint_train(const TrainConfig& config, const TripleStore& store,
                        const std::vector<AlignedSentence>& corpus,
                        EmbeddingBank& bank, ConvParams& conv);

}  // namespace jointkg
