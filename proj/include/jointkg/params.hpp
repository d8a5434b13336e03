#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jointkg/common.hpp"
#include "jointkg/vocab.hpp"

namespace jointkg {

struct Dims {
  int num_entities = 0;
  int num_relations = 0;
  int num_words = 0;
  int k = 150;
};

// Dense parameter matrices for entities, relations and words. Anchored
// mention words do not own a row: their reads and writes go through the
// redirect straight into the entity matrix, so both views are literally the
// same storage.
class EmbeddingBank {
 public:
  EmbeddingBank() = default;
  EmbeddingBank(const Dims& dims, const Vocabulary* vocab_for_sharing = nullptr);

  int k() const { return k_; }
  int num_entities() const { return num_entities_; }
  int num_relations() const { return num_relations_; }
  int num_words() const { return num_words_; }

  std::span<double> entity_row(int id) {
    return {entity_.data() + static_cast<std::size_t>(id) * k_, static_cast<std::size_t>(k_)};
  }
  std::span<const double> entity_row(int id) const {
    return {entity_.data() + static_cast<std::size_t>(id) * k_, static_cast<std::size_t>(k_)};
  }
  std::span<double> relation_row(int id) {
    return {relation_.data() + static_cast<std::size_t>(id) * k_, static_cast<std::size_t>(k_)};
  }
  std::span<const double> relation_row(int id) const {
    return {relation_.data() + static_cast<std::size_t>(id) * k_, static_cast<std::size_t>(k_)};
  }
  std::span<double> word_row(int id) {
    int e = word_redirect_[id];
    if (e >= 0) return entity_row(e);
    return {word_.data() + static_cast<std::size_t>(id) * k_, static_cast<std::size_t>(k_)};
  }
  std::span<const double> word_row(int id) const {
    int e = word_redirect_[id];
    if (e >= 0) return entity_row(e);
    return {word_.data() + static_cast<std::size_t>(id) * k_, static_cast<std::size_t>(k_)};
  }

  // entity id backing a word row, or -1 when the word owns its own row
  int word_redirect(int id) const { return word_redirect_[id]; }

  bool all_finite() const;

  void save(std::ostream& out) const;
  static EmbeddingBank load(std::istream& in);

 private:
  int k_ = 0, num_entities_ = 0, num_relations_ = 0, num_words_ = 0;
  std::vector<double> entity_, relation_, word_;
  std::vector<int> word_redirect_;
};

// Convolution kernel, bias, and the two position-embedding tables. The
// pooled output dimension k_c equals the embedding dimension k so that it
// can be compared against relation embeddings directly.
struct ConvParams {
  int window = 3;     // m
  int k_c = 0;
  int k_w = 0;        // k + 2 * k_p
  int k_p = 5;
  int d_max = 30;
  std::vector<double> kernel;    // k_c x (window * k_w), row-major
  std::vector<double> bias;      // k_c
  std::vector<double> pos_head;  // (2 * d_max + 1) x k_p
  std::vector<double> pos_tail;  // (2 * d_max + 1) x k_p

  std::span<double> kernel_row(int c) {
    std::size_t w = static_cast<std::size_t>(window) * k_w;
    return {kernel.data() + c * w, w};
  }
  std::span<const double> kernel_row(int c) const {
    std::size_t w = static_cast<std::size_t>(window) * k_w;
    return {kernel.data() + c * w, w};
  }
  std::span<double> pos_head_row(int cell) {
    return {pos_head.data() + static_cast<std::size_t>(cell) * k_p, static_cast<std::size_t>(k_p)};
  }
  std::span<const double> pos_head_row(int cell) const {
    return {pos_head.data() + static_cast<std::size_t>(cell) * k_p, static_cast<std::size_t>(k_p)};
  }
  std::span<double> pos_tail_row(int cell) {
    return {pos_tail.data() + static_cast<std::size_t>(cell) * k_p, static_cast<std::size_t>(k_p)};
  }
  std::span<const double> pos_tail_row(int cell) const {
    return {pos_tail.data() + static_cast<std::size_t>(cell) * k_p, static_cast<std::size_t>(k_p)};
  }

  // distance clipped to [-d_max, d_max], shifted to a table index
  int clip_cell(int distance) const {
    if (distance < -d_max) distance = -d_max;
    if (distance > d_max) distance = d_max;
    return distance + d_max;
  }

  void save(std::ostream& out) const;
  static ConvParams load(std::istream& in);
};

struct InitOptions {
  int window = 3;
  int k_p = 5;
  int d_max = 30;
};

struct ModelParams {
  EmbeddingBank bank;
  ConvParams conv;
};

// Uniform [-6/sqrt(k), 6/sqrt(k)] init for all embedding tables and the
// kernel; bias starts at zero; entity rows then normalized to unit L2.
ModelParams init_params(const Dims& dims, std::uint64_t seed,
                        const Vocabulary* vocab = nullptr,
                        const InitOptions& opts = {});

// Overwrites theta_V rows (and, through sharing, anchored entity rows) from a
// word-vector file. Returns the number of rows loaded.
int load_word_vectors(const std::string& path, EmbeddingBank& bank,
                      const Vocabulary& vocab);

void save_word_vectors(const std::string& path,
                       const std::vector<double>& vectors, int dim,
                       const Vocabulary& vocab);

// Renormalizes every entity row to unit L2; zero rows are replaced by a
// random unit vector drawn from `rng`.
void normalize_entities(EmbeddingBank& bank, Rng& rng);
void normalize_entity_row(EmbeddingBank& bank, int id, Rng& rng);

void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace jointkg
