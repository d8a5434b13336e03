#pragma once

#include <map>
#include <span>
#include <vector>

#include "jointkg/common.hpp"
#include "jointkg/params.hpp"
#include "jointkg/vocab.hpp"

namespace jointkg {

// CNN input: one row per token, [word ; pos_head ; pos_tail] of width k_w.
struct InputMatrix {
  int n = 0;
  int k_w = 0;
  std::vector<double> data;  // n x k_w, row-major

  std::span<double> row(int i) {
    return {data.data() + static_cast<std::size_t>(i) * k_w, static_cast<std::size_t>(k_w)};
  }
  std::span<const double> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * k_w, static_cast<std::size_t>(k_w)};
  }
};

// Forward-pass record kept for backprop: hidden vectors y_i, the pooled
// output r_s, and the per-coordinate argmax of the pooling.
struct EncodeTrace {
  InputMatrix input;
  int k_c = 0;
  std::vector<double> hidden;  // n x k_c, row-major
  std::vector<int> argmax;     // k_c, index into [0, n)
  std::vector<double> output;  // r_s, k_c

  std::span<const double> hidden_row(int i) const {
    return {hidden.data() + static_cast<std::size_t>(i) * k_c, static_cast<std::size_t>(k_c)};
  }
};

// Returns a copy truncated around the entity span when the sentence exceeds
// max_len tokens; mention positions are remapped.
AlignedSentence truncate_sentence(const AlignedSentence& s, int max_len);

InputMatrix build_input(const EmbeddingBank& bank, const ConvParams& conv,
                        const AlignedSentence& s);

// Window-m convolution with zero padding at the ends, tanh nonlinearity,
// componentwise max pooling.
EncodeTrace encode_sentence(const EmbeddingBank& bank, const ConvParams& conv,
                            const AlignedSentence& s);

// ||r_s - r||_2
double sentence_score(const EncodeTrace& trace, std::span<const double> r_vec);

// Analytic gradients of the hinge max(0, margin + f_r(s) - f_{r'}(s)) with
// respect to every parameter group, exposed for gradient checking.
struct TextGradients {
  double hinge = 0.0;
  double pos_score = 0.0;
  double neg_score = 0.0;
  std::vector<double> kernel_grad;
  std::vector<double> bias_grad;
  std::map<int, std::vector<double>> pos_head_grads;  // table cell -> k_p grad
  std::map<int, std::vector<double>> pos_tail_grads;
  std::map<int, std::vector<double>> word_grads;      // word id -> k grad
  std::map<int, std::vector<double>> relation_grads;  // relation id -> k grad
};

TextGradients text_gradients(const EmbeddingBank& bank, const ConvParams& conv,
                             const AlignedSentence& s, int neg_relation,
                             double margin);

struct TextStepOptions {
  double lr_text = 0.025;    // alpha_t
  double tau = 0.0001;       // harmonic factor scaling the text side
  double margin = 1.0;       // gamma
  double weight_decay = 1.0; // lambda, applied to kernel and bias only
  int max_len = 120;
};

// One SGD step on a sentence: samples a negative relation, backpropagates
// through pooling, tanh, kernel, position tables, word rows (and via sharing
// into entity rows) and the two relation rows. Returns the hinge.
double text_batch_step(EmbeddingBank& bank, ConvParams& conv,
                       const AlignedSentence& s, Rng& rng,
                       const TextStepOptions& opts);

}  // namespace jointkg
