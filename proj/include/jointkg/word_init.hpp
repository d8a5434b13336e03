#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jointkg/vocab.hpp"

namespace jointkg {

struct SkipGramOptions {
  int dim = 150;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
};

struct SkipGramResult {
  std::vector<double> vectors;      // |V| x dim center (input) vectors
  std::vector<double> epoch_loss;   // mean SGNS loss per epoch
};

// Skip-Gram with negative sampling over a tokenized corpus (one sentence per
// inner vector). Negatives come from the unigram^0.75 distribution; the
// learning rate decays linearly over processed centers. Deterministic per
// seed, single-threaded.
SkipGramResult train_skipgram(const std::vector<std::vector<int>>& corpus,
                              int vocab_size, const SkipGramOptions& opts);

// Whitespace tokenization of a plain-text corpus against `vocab`
// (tokens added on sight).
std::vector<std::vector<int>> tokenize_corpus(const std::string& path,
                                              Vocabulary& vocab);

}  // namespace jointkg
