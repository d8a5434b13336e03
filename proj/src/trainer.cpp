#include "jointkg/trainer.hpp"

#include <fstream>
#include <stdexcept>

namespace jointkg {

void TrainConfig::validate() const {
  if (lr_kg <= 0.0 || lr_text <= 0.0 || tau <= 0.0)
    throw std::invalid_argument("TrainConfig: rates must be positive");
  if (margin <= 0.0) throw std::invalid_argument("TrainConfig: margin must be positive");
  if (kg_rounds < 0 || text_rounds < 0)
    throw std::invalid_argument("TrainConfig: negative round count");
  if (dim <= 0 || batch_size <= 0)
    throw std::invalid_argument("TrainConfig: non-positive dimension or batch");
}

void LossHistory::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.precision(17);
  for (const auto& r : rows)
    out << r.epoch << "\t" << r.kg_loss << "\t" << r.text_loss << "\n";
}

namespace {

template <typename T>
void shuffle_order(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.uniform_index(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

LossHistory joint_train(const TrainConfig& config, const TripleStore& store,
                        const std::vector<AlignedSentence>& corpus,
                        EmbeddingBank& bank, ConvParams& conv) {
  config.validate();
  if (config.text_rounds > 0 && corpus.empty())
    throw std::runtime_error("joint_train: empty corpus with text_rounds > 0");
  if (config.kg_rounds > 0 && store.train().empty())
    throw std::runtime_error("joint_train: empty train split with kg_rounds > 0");

  Rng rng(config.seed);

  const auto& train = store.train();
  std::int64_t batches_per_round =
      train.empty() ? 0
                    : (static_cast<std::int64_t>(train.size()) +
                       config.batch_size - 1) /
                          config.batch_size;
  std::int64_t total_kg = static_cast<std::int64_t>(config.kg_rounds) * batches_per_round;
  std::int64_t total_text =
      static_cast<std::int64_t>(config.text_rounds) * static_cast<std::int64_t>(corpus.size());

  KgStepOptions kg_opts;
  kg_opts.lr = config.lr_kg;
  kg_opts.margin = config.margin;
  kg_opts.score.squared = config.squared_score;

  TextStepOptions text_opts;
  text_opts.lr_text = config.lr_text;
  text_opts.tau = config.tau;
  text_opts.margin = config.margin;
  text_opts.weight_decay = config.lambda;
  text_opts.max_len = config.max_sentence_len;

  std::vector<std::size_t> kg_order(train.size()), text_order(corpus.size());
  for (std::size_t i = 0; i < kg_order.size(); ++i) kg_order[i] = i;
  for (std::size_t i = 0; i < text_order.size(); ++i) text_order[i] = i;

  std::int64_t kg_done = 0, text_done = 0;
  std::size_t kg_cursor = kg_order.size();      // force a shuffle at round start
  std::size_t text_cursor = text_order.size();

  LossHistory history;
  double kg_loss_sum = 0.0, text_loss_sum = 0.0;
  std::int64_t kg_pos_count = 0, text_count = 0;
  std::int64_t kg_round_boundary = batches_per_round;
  std::int64_t text_round_boundary = static_cast<std::int64_t>(corpus.size());
  int epoch = 0;
  bool rows_follow_kg = total_kg > 0;

  auto flush_row = [&] {
    LossHistory::Row row;
    row.epoch = ++epoch;
    row.kg_loss = kg_pos_count ? kg_loss_sum / static_cast<double>(kg_pos_count) : 0.0;
    row.text_loss = text_count ? text_loss_sum / static_cast<double>(text_count) : 0.0;
    history.rows.push_back(row);
    kg_loss_sum = text_loss_sum = 0.0;
    kg_pos_count = text_count = 0;
  };

  KgBatch batch;
  while (kg_done < total_kg || text_done < total_text) {
    double kg_frac = total_kg ? static_cast<double>(kg_done) / static_cast<double>(total_kg) : 1.0;
    double text_frac =
        total_text ? static_cast<double>(text_done) / static_cast<double>(total_text) : 1.0;
    bool run_kg = kg_done < total_kg && (kg_frac <= text_frac || text_done >= total_text);

    if (run_kg) {
      batch.positives.clear();
      batch.negatives.clear();
      for (int b = 0; b < config.batch_size && !train.empty(); ++b) {
        if (kg_cursor >= kg_order.size()) {
          shuffle_order(kg_order, rng);
          kg_cursor = 0;
          if (b > 0) break;  // keep rounds aligned with the train set
        }
        const Triple& pos = train[kg_order[kg_cursor++]];
        auto neg = sample_corruption(rng, pos, store, bank.num_entities(),
                                     bank.num_relations(), config.corruption);
        if (!neg) continue;  // no valid corruption; skip this positive
        batch.positives.push_back(pos);
        batch.negatives.push_back(*neg);
      }
      kg_loss_sum += kg_batch_step(bank, batch, kg_opts, rng);
      kg_pos_count += static_cast<std::int64_t>(batch.positives.size());
      ++kg_done;
      if (rows_follow_kg && kg_done >= kg_round_boundary &&
          !(kg_done == total_kg && text_done < total_text)) {
        // the final row also absorbs any text steps still owed
        kg_round_boundary += batches_per_round;
        flush_row();
      }
    } else {
      if (text_cursor >= text_order.size()) {
        shuffle_order(text_order, rng);
        text_cursor = 0;
      }
      const AlignedSentence& s = corpus[text_order[text_cursor++]];
      text_loss_sum += text_batch_step(bank, conv, s, rng, text_opts);
      ++text_count;
      ++text_done;
      if (!rows_follow_kg && text_done >= text_round_boundary) {
        text_round_boundary += static_cast<std::int64_t>(corpus.size());
        flush_row();
      }
    }
  }
  if (kg_pos_count || text_count || history.rows.empty()) flush_row();
  return history;
}

}  // namespace jointkg
