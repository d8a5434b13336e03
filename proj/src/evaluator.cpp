#include "jointkg/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace jointkg {

using nlohmann::json;

namespace {

const char* kClassNames[4] = {"1-to-1", "1-to-N", "N-to-1", "N-to-N"};

double pct(std::int64_t hits, std::int64_t total) {
  return total ? 100.0 * static_cast<double>(hits) / static_cast<double>(total)
               : 0.0;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

int rank_entities(const EmbeddingBank& bank, const TripleStore& store,
                  const Triple& gold, bool predict_head, bool filtered,
                  const ScoreOptions& opts) {
  Triple query = gold;
  int* slot = predict_head ? &query.head : &query.tail;
  *slot = predict_head ? gold.head : gold.tail;
  double gold_score = score_triple(bank, gold, opts);
  int better = 0;
  for (int e = 0; e < bank.num_entities(); ++e) {
    if (e == (predict_head ? gold.head : gold.tail)) continue;
    *slot = e;
    if (filtered && store.known(query.head, query.relation, query.tail))
      continue;
    if (score_triple(bank, query, opts) < gold_score) ++better;
  }
  return 1 + better;
}

int rank_relations(const EmbeddingBank& bank, const TripleStore& store,
                   const Triple& gold, bool filtered,
                   const ScoreOptions& opts) {
  double gold_score = score_triple(bank, gold, opts);
  Triple query = gold;
  int better = 0;
  for (int r = 0; r < bank.num_relations(); ++r) {
    if (r == gold.relation) continue;
    query.relation = r;
    if (filtered && store.known(query.head, query.relation, query.tail))
      continue;
    if (score_triple(bank, query, opts) < gold_score) ++better;
  }
  return 1 + better;
}

EntityPredictionReport entity_prediction_eval(
    const EmbeddingBank& bank, const TripleStore& store,
    const std::vector<RelationClass>& classes, bool filtered, int threads,
    const ScoreOptions& opts) {
  const auto& test = store.test();
  if (test.empty())
    throw std::runtime_error("entity_prediction_eval: empty test split");

  std::vector<std::uint8_t> head_hit(test.size()), tail_hit(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    head_hit[i] = rank_entities(bank, store, test[i], true, filtered, opts) <= 10;
    tail_hit[i] = rank_entities(bank, store, test[i], false, filtered, opts) <= 10;
  });

  EntityPredictionReport report;
  report.filtered = filtered;
  std::int64_t hits_dir_class[2][4] = {};
  std::int64_t count_class[4] = {};
  std::int64_t total_hits = 0;
  std::map<int, std::pair<std::int64_t, std::int64_t>> per_relation;  // hits, total
  for (std::size_t i = 0; i < test.size(); ++i) {
    int cls = static_cast<int>(classes.at(test[i].relation));
    ++count_class[cls];
    hits_dir_class[0][cls] += head_hit[i];
    hits_dir_class[1][cls] += tail_hit[i];
    total_hits += head_hit[i] + tail_hit[i];
    auto& pr = per_relation[test[i].relation];
    pr.first += head_hit[i] + tail_hit[i];
    pr.second += 2;
  }
  for (int d = 0; d < 2; ++d)
    for (int c = 0; c < 4; ++c)
      report.hits10[d][c] = pct(hits_dir_class[d][c], count_class[c]);
  report.triple_avg = pct(total_hits, 2 * static_cast<std::int64_t>(test.size()));
  double rel_sum = 0.0;
  for (const auto& [r, pr] : per_relation) rel_sum += pct(pr.first, pr.second);
  report.relation_avg =
      per_relation.empty() ? 0.0 : rel_sum / static_cast<double>(per_relation.size());
  return report;
}

RelationPredictionReport relation_prediction_eval(
    const EmbeddingBank& bank, const TripleStore& store,
    const std::vector<RelationClass>& classes, bool filtered, int threads,
    const ScoreOptions& opts) {
  const auto& test = store.test();
  if (test.empty())
    throw std::runtime_error("relation_prediction_eval: empty test split");

  std::vector<std::uint8_t> top1(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    top1[i] = rank_relations(bank, store, test[i], filtered, opts) == 1;
  });

  RelationPredictionReport report;
  report.filtered = filtered;
  std::int64_t hits_class[4] = {}, count_class[4] = {};
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    int cls = static_cast<int>(classes.at(test[i].relation));
    ++count_class[cls];
    hits_class[cls] += top1[i];
    hits += top1[i];
  }
  for (int c = 0; c < 4; ++c)
    report.per_class[c] = pct(hits_class[c], count_class[c]);
  report.overall = pct(hits, static_cast<std::int64_t>(test.size()));
  return report;
}

PrCurve relation_classification_eval(
    const EmbeddingBank& bank, const ConvParams& conv,
    const std::vector<AlignedSentence>& test_sentences, const TripleStore& store,
    const RelationClassificationOptions& opts) {
  // most frequent relations by sentence count; ties broken by id
  std::unordered_map<int, std::int64_t> relation_counts;
  for (const auto& s : test_sentences) ++relation_counts[s.relation];
  std::vector<std::pair<int, std::int64_t>> freq(relation_counts.begin(),
                                                 relation_counts.end());
  std::sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (static_cast<int>(freq.size()) > opts.top_k_relations)
    freq.resize(opts.top_k_relations);
  std::vector<int> top_relations;
  for (auto& [r, c] : freq) top_relations.push_back(r);

  // group sentences by entity pair, in first-seen order
  std::map<std::pair<int, int>, std::vector<std::size_t>> pair_sentences;
  std::vector<std::pair<int, int>> pair_order;
  for (std::size_t i = 0; i < test_sentences.size(); ++i) {
    auto key = test_sentences[i].source_pair;
    auto [it, inserted] = pair_sentences.try_emplace(key);
    if (inserted) pair_order.push_back(key);
    it->second.push_back(i);
  }

  // encode every distinct sentence once
  std::vector<EncodeTrace> traces(test_sentences.size());
  for (std::size_t i = 0; i < test_sentences.size(); ++i)
    traces[i] = encode_sentence(
        bank, conv, truncate_sentence(test_sentences[i], opts.max_sentence_len));

  struct Candidate {
    double score;
    std::size_t pair_idx;
    std::size_t rel_idx;
    bool correct;
  };
  std::vector<Candidate> candidates;
  PrCurve curve;
  for (std::size_t p = 0; p < pair_order.size(); ++p) {
    auto [h, t] = pair_order[p];
    const auto& sent_ids = pair_sentences[pair_order[p]];
    if (sent_ids.empty()) {
      ++curve.excluded_pairs;
      continue;
    }
    for (std::size_t ri = 0; ri < top_relations.size(); ++ri) {
      int r = top_relations[ri];
      auto r_vec = bank.relation_row(r);
      double agg = opts.mean_aggregation ? 0.0
                                         : std::numeric_limits<double>::infinity();
      for (std::size_t si : sent_ids) {
        double d = sentence_score(traces[si], r_vec);
        if (opts.mean_aggregation)
          agg += d / static_cast<double>(sent_ids.size());
        else
          agg = std::min(agg, d);
      }
      candidates.push_back({agg, p, ri, store.known(h, r, t)});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score < b.score;
              if (a.pair_idx != b.pair_idx) return a.pair_idx < b.pair_idx;
              return a.rel_idx < b.rel_idx;
            });

  curve.total_candidates = static_cast<int>(candidates.size());
  for (const auto& c : candidates) curve.total_correct += c.correct;
  std::int64_t correct_so_far = 0;
  std::int64_t seen = 0;
  for (const auto& c : candidates) {
    ++seen;
    correct_so_far += c.correct;
    double precision =
        static_cast<double>(correct_so_far) / static_cast<double>(seen);
    double recall = curve.total_correct
                        ? static_cast<double>(correct_so_far) /
                              static_cast<double>(curve.total_correct)
                        : 0.0;
    curve.points.emplace_back(recall, precision);
  }
  return curve;
}

void EntityPredictionReport::save(const std::string& path) const {
  json j;
  j["setting"] = filtered ? "filtered" : "raw";
  const char* dirs[2] = {"predicting_head", "predicting_tail"};
  for (int d = 0; d < 2; ++d)
    for (int c = 0; c < 4; ++c) j[dirs[d]][kClassNames[c]] = hits10[d][c];
  j["triple_avg"] = triple_avg;
  j["relation_avg"] = relation_avg;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

void RelationPredictionReport::save(const std::string& path) const {
  json j;
  j["setting"] = filtered ? "filtered" : "raw";
  for (int c = 0; c < 4; ++c) j[kClassNames[c]] = per_class[c];
  j["all"] = overall;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

void PrCurve::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.precision(17);
  out << "recall,precision\n";
  for (auto [r, p] : points) out << r << "," << p << "\n";
}

}  // namespace jointkg
