// Acceptance suite: one numbered criterion per invocation, one PASS/FAIL
// line on stdout, exit status 0/1.
//
//   acceptance <criterion 1..8>
//
// Criteria 1-3 need the FB15K benchmark splits (train.txt, valid.txt,
// test.txt). The suite looks in $FB15K_DIR, then data/FB15K relative to the
// working directory and up to three parent directories. Without the data the
// criteria fail with a diagnostic rather than silently passing. Criteria 4-8
// are self-contained.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jointkg/evaluator.hpp"
#include "jointkg/trainer.hpp"
#include "jointkg/word_init.hpp"

namespace fs = std::filesystem;
using namespace jointkg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int eval_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n ? static_cast<int>(n) : 4;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---- FB15K (criteria 1-3) ------------------------------------------------

std::optional<std::string> find_fb15k() {
  std::vector<std::string> roots;
  if (const char* env = std::getenv("FB15K_DIR")) roots.push_back(env);
  for (const char* p :
       {"data/FB15K", "../data/FB15K", "../../data/FB15K", "../../../data/FB15K"})
    roots.push_back(p);
  for (const auto& r : roots) {
    bool ok = true;
    for (const char* f : {"train.txt", "valid.txt", "test.txt"})
      ok = ok && fs::exists(fs::path(r) / f);
    if (ok) return r;
  }
  return std::nullopt;
}

const char* kFb15kHint =
    "FB15K splits not found: set FB15K_DIR or place train.txt/valid.txt/"
    "test.txt under data/FB15K";

constexpr int kFb15kEpochs = 1000;  // within the supported 1000-3000 range

VocabularyBuild load_fb15k(const std::string& dir) {
  return build_vocabulary({(fs::path(dir) / "train.txt").string(),
                           (fs::path(dir) / "valid.txt").string(),
                           (fs::path(dir) / "test.txt").string()});
}

// Criteria 1 and 2 score the same trained model; whichever runs first leaves
// a checkpoint next to the data so the other skips the multi-hour training.
ModelParams train_fb15k(const std::string& dir, const VocabularyBuild& kb) {
  fs::path cache = fs::path(dir) / fmt(".transe_k150_e%d.ckpt", kFb15kEpochs);
  if (fs::exists(cache)) {
    auto m = load_checkpoint(cache.string());
    if (m.bank.num_entities() == kb.vocab.num_entities() &&
        m.bank.num_relations() == kb.vocab.num_relations() && m.bank.k() == 150)
      return m;
  }
  TrainConfig cfg;
  cfg.dim = 150;
  cfg.margin = 1.0;
  cfg.lr_kg = 0.001;
  cfg.kg_rounds = kFb15kEpochs;
  cfg.text_rounds = 0;
  cfg.batch_size = 100;
  cfg.seed = 1;
  auto model = init_params({kb.vocab.num_entities(), kb.vocab.num_relations(),
                            0, cfg.dim},
                           cfg.seed);
  joint_train(cfg, kb.store, {}, model.bank, model.conv);
  try {
    fs::path tmp = cache;
    tmp += ".tmp";
    save_checkpoint(tmp.string(), model);
    fs::rename(tmp, cache);
  } catch (const std::exception&) {
    // read-only data directory: just skip the cache
  }
  return model;
}

Outcome criterion1() {
  auto dir = find_fb15k();
  if (!dir) return {false, kFb15kHint};
  auto kb = load_fb15k(*dir);
  auto model = train_fb15k(*dir, kb);
  auto classes = classify_relations(kb.store, kb.vocab.num_relations()).classes;
  auto report =
      entity_prediction_eval(model.bank, kb.store, classes, true, eval_threads());
  bool pass = std::abs(report.triple_avg - 76.6) <= 5.0;
  return {pass, fmt("filtered entity-prediction Hits@10 triple_avg=%.2f "
                    "(target 76.6 +/- 5; k=150, gamma=1, lr=0.001, %d epochs)",
                    report.triple_avg, kFb15kEpochs)};
}

Outcome criterion2() {
  auto dir = find_fb15k();
  if (!dir) return {false, kFb15kHint};
  auto kb = load_fb15k(*dir);
  auto model = train_fb15k(*dir, kb);
  auto classes = classify_relations(kb.store, kb.vocab.num_relations()).classes;
  auto report = relation_prediction_eval(model.bank, kb.store, classes, true,
                                         eval_threads());
  bool pass = std::abs(report.overall - 87.2) <= 5.0;
  return {pass, fmt("filtered relation-prediction Top-1=%.2f "
                    "(target 87.2 +/- 5; %d epochs)",
                    report.overall, kFb15kEpochs)};
}

Outcome criterion3() {
  auto dir = find_fb15k();
  if (!dir) return {false, kFb15kHint};
  auto kb = load_fb15k(*dir);
  auto classes = classify_relations(kb.store, kb.vocab.num_relations()).classes;
  std::int64_t nn = 0;
  for (const auto& t : kb.store.test())
    nn += classes.at(t.relation) == RelationClass::ManyToMany;
  double pct = 100.0 * static_cast<double>(nn) /
               static_cast<double>(kb.store.test().size());
  return {pct > 80.0,
          fmt("%.1f%% of %zu test triples fall under N-to-N (need > 80%%)", pct,
              kb.store.test().size())};
}

// ---- criterion 4: synthetic joint-vs-KG-only gain ------------------------

struct Synth {
  Vocabulary vocab;
  TripleStore store;                    // train = observed, test = withheld
  std::vector<AlignedSentence> corpus;  // sentences for all facts
};

// Facts consistent with a hidden translation geometry: unit entities,
// near-orthogonal relations, tails constructed as normalize(h + r), so the
// KG is exactly realizable. A random ~16% of entities are "text-only": every
// fact touching them is withheld into the test split, yet all facts keep
// their sentences. The sentences use one uninformative link token, so the
// encoder can only reduce its loss by reading the entity mentions, which is
// what lets the text side position the withheld entities.
Synth make_synth(std::uint64_t seed, int num_entities, int num_relations,
                 int latent_dim, int facts_per_rel, int sent_per_fact) {
  Synth s;
  for (int e = 0; e < num_entities; ++e) {
    int id = s.vocab.add_entity("e" + std::to_string(e));
    s.vocab.set_anchor(id, "m" + std::to_string(e));
  }
  for (int r = 0; r < num_relations; ++r)
    s.vocab.add_relation("r" + std::to_string(r));
  // distractor vocabulary, present but unused in the sentences
  for (int r = 0; r < num_relations; ++r)
    s.vocab.add_word("t" + std::to_string(r));
  int link = s.vocab.add_word("is_linked_to");

  Rng rng(seed);
  auto normalize = [&](std::vector<double>& v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
  };
  auto random_unit = [&] {
    std::vector<double> v(latent_dim);
    for (double& x : v) x = rng.uniform(-1, 1);
    normalize(v);
    return v;
  };
  std::vector<std::vector<double>> rel;
  for (int r = 0; r < num_relations; ++r) {
    auto v = random_unit();
    for (double& x : v) x *= 0.9;
    rel.push_back(v);
  }
  std::vector<std::vector<double>> ent;
  for (int e = 0; e < 40; ++e) ent.push_back(random_unit());

  std::vector<Triple> facts;
  std::unordered_set<Triple, TripleHash> seen;
  int guard = 0;
  while (static_cast<int>(facts.size()) < num_relations * facts_per_rel &&
         guard++ < num_relations * facts_per_rel * 40) {
    int h = static_cast<int>(rng.uniform_index(ent.size()));
    int r = static_cast<int>(rng.uniform_index(num_relations));
    std::vector<double> target(latent_dim);
    for (int d = 0; d < latent_dim; ++d) target[d] = ent[h][d] + rel[r][d];
    normalize(target);
    // reuse a nearby entity or mint a new one
    int t = -1;
    double best = 0.45;  // squared-distance threshold
    for (int e = 0; e < static_cast<int>(ent.size()); ++e) {
      if (e == h) continue;
      double d2 = 0;
      for (int d = 0; d < latent_dim; ++d) {
        double v = ent[e][d] - target[d];
        d2 += v * v;
      }
      if (d2 < best) {
        best = d2;
        t = e;
      }
    }
    if (t < 0) {
      if (static_cast<int>(ent.size()) >= num_entities) continue;
      t = static_cast<int>(ent.size());
      ent.push_back(target);
    }
    Triple tr{h, r, t};
    if (seen.count(tr)) continue;
    seen.insert(tr);
    facts.push_back(tr);
  }
  while (static_cast<int>(ent.size()) < num_entities) ent.push_back(random_unit());

  std::vector<int> obs_count(num_entities, 0);
  std::vector<char> sparse(num_entities, 0);
  for (int e = 0; e < num_entities; ++e) sparse[e] = rng.uniform() < 0.16;
  for (std::size_t i = facts.size(); i > 1; --i)
    std::swap(facts[i - 1], facts[rng.uniform_index(i)]);
  for (const auto& t : facts) {
    if (sparse[t.head] || sparse[t.tail]) {
      s.store.add(2, t);
    } else {
      s.store.add(0, t);
      ++obs_count[t.head];
      ++obs_count[t.tail];
    }
  }
  for (const auto& t : facts)
    for (int c = 0; c < sent_per_fact; ++c) {
      AlignedSentence a;
      a.tokens = {*s.vocab.anchor_word(t.head), link,
                  *s.vocab.anchor_word(t.tail)};
      a.head_pos = 0;
      a.tail_pos = 2;
      a.relation = t.relation;
      a.source_pair = {t.head, t.tail};
      s.corpus.push_back(a);
    }
  return s;
}

Outcome criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seeds[] = {1, 2, 3};
  double sum_hits = 0.0, sum_rel = 0.0;
  std::ostringstream per_seed;
  for (std::uint64_t seed : seeds) {
    auto s = make_synth(100 + seed, 200, 20, 16, 60, 3);
    auto classes = classify_relations(s.store, 20).classes;
    auto run = [&](bool joint) {
      TrainConfig cfg;
      cfg.dim = 24;
      cfg.kg_rounds = 600;
      cfg.text_rounds = joint ? 300 : 0;
      cfg.tau = 0.1;
      cfg.lr_kg = 0.005;
      cfg.lr_text = 0.025;
      cfg.batch_size = 10;
      cfg.seed = seed;
      cfg.k_p = 3;
      cfg.d_max = 5;
      auto model = init_params({s.vocab.num_entities(), s.vocab.num_relations(),
                                s.vocab.num_words(), cfg.dim},
                               seed, &s.vocab, InitOptions{3, 3, 5});
      joint_train(cfg, s.store,
                  joint ? s.corpus : std::vector<AlignedSentence>{}, model.bank,
                  model.conv);
      auto ep = entity_prediction_eval(model.bank, s.store, classes, true,
                                       eval_threads());
      auto rp = relation_prediction_eval(model.bank, s.store, classes, true,
                                         eval_threads());
      return std::pair<double, double>{ep.triple_avg, rp.overall};
    };
    auto kg = run(false);
    auto jt = run(true);
    double dh = jt.first - kg.first, dr = jt.second - kg.second;
    sum_hits += dh;
    sum_rel += dr;
    per_seed << fmt(" s%llu:%+.1f/%+.1f",
                    static_cast<unsigned long long>(seed), dh, dr);
  }
  double avg_hits = sum_hits / 3.0, avg_rel = sum_rel / 3.0;
  bool pass = avg_rel >= 5.0 && avg_hits >= 3.0;
  return {pass,
          fmt("joint minus KG-only over 3 seeds: Hits@10 %+.2f (need >= +3), "
              "relation Top-1 %+.2f (need >= +5); per-seed hits/rel:%s; %.0fs",
              avg_hits, avg_rel, per_seed.str().c_str(), seconds_since(t0))};
}

// ---- criterion 5: finite-difference gradient oracle ----------------------

Outcome criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  int configs = 0;
  std::int64_t components = 0, failures = 0;
  double worst = 0.0;

  // KG hinge: perturb every touched entity/relation coordinate
  {
    Rng rng(77);
    for (int trial = 0; trial < 400 && configs < 60; ++trial) {
      int k = 2 + static_cast<int>(rng.uniform_index(6));
      int ne = 3 + static_cast<int>(rng.uniform_index(4));
      int nr = 2 + static_cast<int>(rng.uniform_index(3));
      EmbeddingBank bank(Dims{ne, nr, 0, k});
      for (int e = 0; e < ne; ++e)
        for (auto& x : bank.entity_row(e)) x = rng.uniform(-1, 1);
      for (int r = 0; r < nr; ++r)
        for (auto& x : bank.relation_row(r)) x = rng.uniform(-1, 1);
      Triple pos{static_cast<int>(rng.uniform_index(ne)),
                 static_cast<int>(rng.uniform_index(nr)),
                 static_cast<int>(rng.uniform_index(ne))};
      Triple neg{static_cast<int>(rng.uniform_index(ne)),
                 static_cast<int>(rng.uniform_index(nr)),
                 static_cast<int>(rng.uniform_index(ne))};
      double margin = 1.0;
      // skip kinks of the hinge and of the norm
      if (score_triple(bank, pos) < 1e-2 || score_triple(bank, neg) < 1e-2)
        continue;
      auto g = kg_pair_gradients(bank, pos, neg, margin);
      if (g.hinge <= 1e-3) continue;
      ++configs;
      auto loss = [&] {
        return std::max(0.0, margin + score_triple(bank, pos) -
                                 score_triple(bank, neg));
      };
      const double h = 1e-6;
      auto check_group =
          [&](auto row_of,
              const std::vector<std::pair<int, std::vector<double>>>& grads) {
            for (const auto& [id, grad] : grads)
              for (int i = 0; i < k; ++i) {
                auto row = row_of(id);
                double orig = row[i];
                row[i] = orig + h;
                double lp = loss();
                row[i] = orig - h;
                double lm = loss();
                row[i] = orig;
                double numeric = (lp - lm) / (2 * h);
                double denom =
                    std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
                double err = std::abs(numeric - grad[i]) / denom;
                worst = std::max(worst, err);
                failures += err > 1e-4;
                ++components;
              }
          };
      check_group([&](int id) { return bank.entity_row(id); }, g.entity_grads);
      check_group([&](int id) { return bank.relation_row(id); },
                  g.relation_grads);
    }
  }

  // text hinge: every parameter group of the encoder
  {
    Rng rng(2024);
    for (int trial = 0; trial < 400 && configs < 120; ++trial) {
      int k = 2 + static_cast<int>(rng.uniform_index(7));
      int k_p = 1 + static_cast<int>(rng.uniform_index(3));
      int n = 2 + static_cast<int>(rng.uniform_index(5));
      Vocabulary v;
      int e0 = v.add_entity("h_ent"), e1 = v.add_entity("t_ent");
      int nr = 2 + static_cast<int>(rng.uniform_index(3));
      for (int r = 0; r < nr; ++r) v.add_relation("r" + std::to_string(r));
      int nw = 3 + static_cast<int>(rng.uniform_index(4));
      for (int w = 0; w < nw; ++w) v.add_word("w" + std::to_string(w));
      v.set_anchor(e0, "m_h");
      v.set_anchor(e1, "m_t");
      auto model = init_params({2, nr, v.num_words(), k}, rng.next_u64(), &v,
                               InitOptions{3, k_p, 4});

      AlignedSentence s;
      s.tokens.resize(n);
      for (int i = 0; i < n; ++i)
        s.tokens[i] = static_cast<int>(rng.uniform_index(nw));
      s.head_pos = static_cast<int>(rng.uniform_index(n));
      do {
        s.tail_pos = static_cast<int>(rng.uniform_index(n));
      } while (s.tail_pos == s.head_pos);
      s.tokens[s.head_pos] = *v.anchor_word(e0);
      s.tokens[s.tail_pos] = *v.anchor_word(e1);
      s.relation = static_cast<int>(rng.uniform_index(nr));
      int neg = static_cast<int>(rng.uniform_index(nr - 1));
      if (neg >= s.relation) ++neg;

      double margin = 1.0;
      auto g = text_gradients(model.bank, model.conv, s, neg, margin);
      if (g.hinge <= 1e-3 || g.pos_score < 1e-2 || g.neg_score < 1e-2)
        continue;
      ++configs;

      auto loss = [&] {
        auto trace = encode_sentence(model.bank, model.conv, s);
        double fp = sentence_score(trace, model.bank.relation_row(s.relation));
        double fn = sentence_score(trace, model.bank.relation_row(neg));
        return std::max(0.0, margin + fp - fn);
      };
      const double h = 1e-5;
      auto fd = [&](double* x) {
        double orig = *x;
        *x = orig + h;
        double lp = loss();
        *x = orig - h;
        double lm = loss();
        *x = orig;
        return (lp - lm) / (2 * h);
      };
      auto expect_close = [&](double numeric, double analytic) {
        // components below 1e-3 (saturated tanh units) are dominated by the
        // cancellation noise of the central difference; hold those to an
        // absolute bound instead of a relative one
        double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
        double err = std::abs(numeric - analytic) / denom;
        worst = std::max(worst, err);
        failures += err > 1e-4;
        ++components;
      };
      for (std::size_t i = 0; i < model.conv.kernel.size(); i += 7)
        expect_close(fd(&model.conv.kernel[i]), g.kernel_grad[i]);
      for (int c = 0; c < model.conv.k_c; ++c)
        expect_close(fd(&model.conv.bias[c]), g.bias_grad[c]);
      for (auto& [cell, grad] : g.pos_head_grads)
        for (int i = 0; i < k_p; ++i)
          expect_close(
              fd(&model.conv.pos_head[static_cast<std::size_t>(cell) * k_p + i]),
              grad[i]);
      for (auto& [cell, grad] : g.pos_tail_grads)
        for (int i = 0; i < k_p; ++i)
          expect_close(
              fd(&model.conv.pos_tail[static_cast<std::size_t>(cell) * k_p + i]),
              grad[i]);
      for (auto& [w, grad] : g.word_grads)
        for (int i = 0; i < k; ++i)
          expect_close(fd(&model.bank.word_row(w)[i]), grad[i]);
      for (auto& [r, grad] : g.relation_grads)
        for (int i = 0; i < k; ++i)
          expect_close(fd(&model.bank.relation_row(r)[i]), grad[i]);
    }
  }

  double elapsed = seconds_since(t0);
  bool pass = failures == 0 && configs >= 100 && elapsed < 60.0;
  return {pass, fmt("%d configs, %lld gradient components, %lld over 1e-4 "
                    "relative, worst %.2e, %.1fs (need >= 100 configs, 0 "
                    "failures, < 60s)",
                    configs, static_cast<long long>(components),
                    static_cast<long long>(failures), worst, elapsed)};
}

// ---- criterion 6: exhaustive-oracle equivalence --------------------------

struct SmallWorld {
  Vocabulary vocab;
  TripleStore store;
  std::vector<AlignedSentence> corpus;
  ModelParams model;
};

SmallWorld make_small_world(std::uint64_t seed) {
  SmallWorld w;
  for (int e = 0; e < 14; ++e) {
    int id = w.vocab.add_entity("e" + std::to_string(e));
    w.vocab.set_anchor(id, "m" + std::to_string(e));
  }
  for (int r = 0; r < 5; ++r) w.vocab.add_relation("r" + std::to_string(r));
  int filler = w.vocab.add_word("said");
  Rng gen(seed);
  std::unordered_set<Triple, TripleHash> seen;
  int added = 0;
  while (added < 60) {
    Triple t{static_cast<int>(gen.uniform_index(14)),
             static_cast<int>(gen.uniform_index(5)),
             static_cast<int>(gen.uniform_index(14))};
    if (t.head == t.tail || seen.count(t)) {
      if (seen.size() >= 60) break;
      continue;
    }
    seen.insert(t);
    w.store.add(added % 5 == 4 ? 2 : (added % 5 == 3 ? 1 : 0), t);
    ++added;
  }
  for (const auto& t : w.store.test()) {
    AlignedSentence s;
    s.tokens = {*w.vocab.anchor_word(t.head), filler,
                *w.vocab.anchor_word(t.tail)};
    s.head_pos = 0;
    s.tail_pos = 2;
    s.relation = t.relation;
    s.source_pair = {t.head, t.tail};
    w.corpus.push_back(s);
  }
  w.model = init_params({14, 5, w.vocab.num_words(), 6}, seed, &w.vocab,
                        InitOptions{3, 2, 4});
  return w;
}

double oracle_score(const EmbeddingBank& bank, int h, int r, int t) {
  auto hv = bank.entity_row(h);
  auto rv = bank.relation_row(r);
  auto tv = bank.entity_row(t);
  double s = 0.0;
  for (int i = 0; i < bank.k(); ++i) {
    double d = tv[i] - hv[i] - rv[i];
    s += d * d;
  }
  return std::sqrt(s);
}

int oracle_rank_entity(const EmbeddingBank& bank, const TripleStore& store,
                       const Triple& g, bool predict_head, bool filtered) {
  double gold = oracle_score(bank, g.head, g.relation, g.tail);
  int better = 0;
  for (int e = 0; e < bank.num_entities(); ++e) {
    int h = predict_head ? e : g.head, t = predict_head ? g.tail : e;
    if (e == (predict_head ? g.head : g.tail)) continue;
    if (filtered && store.known(h, g.relation, t)) continue;
    if (oracle_score(bank, h, g.relation, t) < gold) ++better;
  }
  return 1 + better;
}

int oracle_rank_relation(const EmbeddingBank& bank, const TripleStore& store,
                         const Triple& g, bool filtered) {
  double gold = oracle_score(bank, g.head, g.relation, g.tail);
  int better = 0;
  for (int r = 0; r < bank.num_relations(); ++r) {
    if (r == g.relation) continue;
    if (filtered && store.known(g.head, r, g.tail)) continue;
    if (oracle_score(bank, g.head, r, g.tail) < gold) ++better;
  }
  return 1 + better;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

Outcome criterion6() {
  int comparisons = 0, mismatches = 0;
  auto check = [&](bool ok) {
    ++comparisons;
    mismatches += !ok;
  };
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto w = make_small_world(seed);
    const auto& bank = w.model.bank;
    auto classes = classify_relations(w.store, 5).classes;

    for (bool filtered : {false, true}) {
      // per-triple ranks against the exhaustive count
      for (const auto& t : w.store.test()) {
        check(rank_entities(bank, w.store, t, true, filtered) ==
              oracle_rank_entity(bank, w.store, t, true, filtered));
        check(rank_entities(bank, w.store, t, false, filtered) ==
              oracle_rank_entity(bank, w.store, t, false, filtered));
        check(rank_relations(bank, w.store, t, filtered) ==
              oracle_rank_relation(bank, w.store, t, filtered));
      }

      // entity-prediction aggregates rebuilt from the oracle ranks
      auto ep = entity_prediction_eval(bank, w.store, classes, filtered, 1);
      {
        std::int64_t hits_dc[2][4] = {}, cnt[4] = {}, total = 0;
        std::map<int, std::pair<std::int64_t, std::int64_t>> per_rel;
        for (const auto& t : w.store.test()) {
          int cls = static_cast<int>(classes.at(t.relation));
          int hh = oracle_rank_entity(bank, w.store, t, true, filtered) <= 10;
          int th = oracle_rank_entity(bank, w.store, t, false, filtered) <= 10;
          ++cnt[cls];
          hits_dc[0][cls] += hh;
          hits_dc[1][cls] += th;
          total += hh + th;
          per_rel[t.relation].first += hh + th;
          per_rel[t.relation].second += 2;
        }
        auto pct = [](std::int64_t a, std::int64_t b) {
          return b ? 100.0 * static_cast<double>(a) / static_cast<double>(b)
                   : 0.0;
        };
        for (int d = 0; d < 2; ++d)
          for (int c = 0; c < 4; ++c)
            check(near(ep.hits10[d][c], pct(hits_dc[d][c], cnt[c])));
        check(near(ep.triple_avg,
                   pct(total, 2 * static_cast<std::int64_t>(
                                      w.store.test().size()))));
        double rel_sum = 0.0;
        for (const auto& [r, pr] : per_rel) rel_sum += pct(pr.first, pr.second);
        check(near(ep.relation_avg,
                   rel_sum / static_cast<double>(per_rel.size())));
      }

      // relation-prediction aggregates
      auto rp = relation_prediction_eval(bank, w.store, classes, filtered, 1);
      {
        std::int64_t hits_c[4] = {}, cnt[4] = {}, hits = 0;
        for (const auto& t : w.store.test()) {
          int cls = static_cast<int>(classes.at(t.relation));
          int top1 = oracle_rank_relation(bank, w.store, t, filtered) == 1;
          ++cnt[cls];
          hits_c[cls] += top1;
          hits += top1;
        }
        auto pct = [](std::int64_t a, std::int64_t b) {
          return b ? 100.0 * static_cast<double>(a) / static_cast<double>(b)
                   : 0.0;
        };
        for (int c = 0; c < 4; ++c)
          check(near(rp.per_class[c], pct(hits_c[c], cnt[c])));
        check(near(rp.overall,
                   pct(hits, static_cast<std::int64_t>(w.store.test().size()))));
      }
    }

    // relation classification against an exhaustive candidate sweep
    RelationClassificationOptions opts;
    opts.top_k_relations = 4;
    auto curve = relation_classification_eval(bank, w.model.conv, w.corpus,
                                              w.store, opts);
    {
      // top relations by sentence count, ties by id
      std::map<int, std::int64_t> freq_map;
      for (const auto& s : w.corpus) ++freq_map[s.relation];
      std::vector<std::pair<int, std::int64_t>> freq(freq_map.begin(),
                                                     freq_map.end());
      std::sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
      });
      if (static_cast<int>(freq.size()) > opts.top_k_relations)
        freq.resize(opts.top_k_relations);

      std::map<std::pair<int, int>, std::vector<std::size_t>> by_pair;
      std::vector<std::pair<int, int>> order;
      for (std::size_t i = 0; i < w.corpus.size(); ++i) {
        auto key = w.corpus[i].source_pair;
        if (!by_pair.count(key)) order.push_back(key);
        by_pair[key].push_back(i);
      }
      struct Cand {
        double score;
        std::size_t p, r;
        bool correct;
      };
      std::vector<Cand> cands;
      for (std::size_t p = 0; p < order.size(); ++p)
        for (std::size_t ri = 0; ri < freq.size(); ++ri) {
          int r = freq[ri].first;
          double best = std::numeric_limits<double>::infinity();
          for (std::size_t si : by_pair[order[p]]) {
            auto trace = encode_sentence(bank, w.model.conv, w.corpus[si]);
            best = std::min(best,
                            sentence_score(trace, bank.relation_row(r)));
          }
          cands.push_back(
              {best, p, ri, w.store.known(order[p].first, r, order[p].second)});
        }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.p != b.p) return a.p < b.p;
        return a.r < b.r;
      });
      int total_correct = 0;
      for (const auto& c : cands) total_correct += c.correct;
      check(curve.total_candidates == static_cast<int>(cands.size()));
      check(curve.total_correct == total_correct);
      check(curve.points.size() == cands.size());
      std::int64_t so_far = 0;
      for (std::size_t i = 0;
           i < cands.size() && i < curve.points.size(); ++i) {
        so_far += cands[i].correct;
        double precision = static_cast<double>(so_far) /
                           static_cast<double>(i + 1);
        double recall =
            total_correct
                ? static_cast<double>(so_far) / static_cast<double>(total_correct)
                : 0.0;
        check(near(curve.points[i].first, recall));
        check(near(curve.points[i].second, precision));
      }
    }
  }
  return {mismatches == 0,
          fmt("%d oracle comparisons over 3 worlds (<= 20 entities), "
              "%d mismatches",
              comparisons, mismatches)};
}

// ---- criterion 7: invariant suites ---------------------------------------

Outcome criterion7() {
  int violations = 0;
  std::ostringstream what;

  // filtered >= raw on every report cell
  for (std::uint64_t seed : {21u, 22u}) {
    auto w = make_small_world(seed);
    auto classes = classify_relations(w.store, 5).classes;
    auto ef = entity_prediction_eval(w.model.bank, w.store, classes, true, 1);
    auto er = entity_prediction_eval(w.model.bank, w.store, classes, false, 1);
    for (int d = 0; d < 2; ++d)
      for (int c = 0; c < 4; ++c)
        violations += ef.hits10[d][c] < er.hits10[d][c] - 1e-9;
    violations += ef.triple_avg < er.triple_avg - 1e-9;
    violations += ef.relation_avg < er.relation_avg - 1e-9;
    auto rf = relation_prediction_eval(w.model.bank, w.store, classes, true, 1);
    auto rr = relation_prediction_eval(w.model.bank, w.store, classes, false, 1);
    for (int c = 0; c < 4; ++c)
      violations += rf.per_class[c] < rr.per_class[c] - 1e-9;
    violations += rf.overall < rr.overall - 1e-9;
  }
  if (violations) what << fmt(" filtered<raw x%d;", violations);

  // entity rows unit after every KG batch (no text steps in between)
  {
    int norm_bad = 0;
    Rng rng(5);
    auto w = make_small_world(31);
    KgStepOptions opts;
    for (int step = 0; step < 300; ++step) {
      const Triple& pos = w.store.train()[step % w.store.train().size()];
      auto neg = sample_corruption(rng, pos, w.store, 14, 5);
      if (!neg) continue;
      KgBatch batch{{pos}, {*neg}};
      kg_batch_step(w.model.bank, batch, opts, rng);
      for (int e = 0; e < 14; ++e)
        norm_bad += std::abs(l2_norm(w.model.bank.entity_row(e)) - 1.0) > 1e-9;
    }
    violations += norm_bad;
    if (norm_bad) what << fmt(" non-unit rows x%d;", norm_bad);
  }

  // PR-curve shape
  {
    int pr_bad = 0;
    auto w = make_small_world(41);
    auto curve = relation_classification_eval(w.model.bank, w.model.conv,
                                              w.corpus, w.store, {});
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      auto [recall, precision] = curve.points[i];
      pr_bad += precision < 0.0 || precision > 1.0;
      pr_bad += recall < 0.0 || recall > 1.0;
      if (i) pr_bad += recall < curve.points[i - 1].first - 1e-12;
    }
    if (curve.total_correct > 0)
      pr_bad += !near(curve.points.back().first, 1.0);
    violations += pr_bad;
    if (pr_bad) what << fmt(" PR-curve x%d;", pr_bad);
  }

  // byte-identical reruns for a fixed seed
  {
    int det_bad = 0;
    auto bytes = [](const ModelParams& m) {
      std::ostringstream out;
      m.bank.save(out);
      m.conv.save(out);
      return out.str();
    };
    auto wa = make_small_world(51);
    auto wb = make_small_world(51);
    TrainConfig cfg;
    cfg.dim = 6;
    cfg.kg_rounds = 4;
    cfg.text_rounds = 2;
    cfg.tau = 0.01;
    cfg.batch_size = 3;
    cfg.seed = 13;
    cfg.k_p = 2;
    cfg.d_max = 4;
    auto ha = joint_train(cfg, wa.store, wa.corpus, wa.model.bank, wa.model.conv);
    auto hb = joint_train(cfg, wb.store, wb.corpus, wb.model.bank, wb.model.conv);
    det_bad += bytes(wa.model) != bytes(wb.model);
    det_bad += ha.rows.size() != hb.rows.size();
    for (std::size_t i = 0; i < ha.rows.size() && i < hb.rows.size(); ++i)
      det_bad += ha.rows[i].kg_loss != hb.rows[i].kg_loss ||
                 ha.rows[i].text_loss != hb.rows[i].text_loss;
    violations += det_bad;
    if (det_bad) what << fmt(" nondeterminism x%d;", det_bad);
  }

  return {violations == 0,
          violations == 0
              ? std::string("filtered>=raw cells, unit entity norms after "
                            "every KG batch, PR-curve shape, byte-identical "
                            "reruns: all hold")
              : "violations:" + what.str()};
}

// ---- criterion 8: Skip-Gram sanity ---------------------------------------

Outcome criterion8() {
  // words 0-3 are centers; 0 and 1 share context 4, 2 and 3 share context 5,
  // so each center's predicted nearest neighbour is its context partner
  std::vector<std::vector<int>> corpus;
  for (int rep = 0; rep < 200; ++rep) {
    corpus.push_back({0, 4});
    corpus.push_back({1, 4});
    corpus.push_back({2, 5});
    corpus.push_back({3, 5});
  }
  SkipGramOptions opts;
  opts.dim = 16;
  opts.epochs = 10;
  opts.seed = 3;
  auto res = train_skipgram(corpus, 6, opts);

  auto cosine = [&](int a, int b) {
    std::span<const double> va(res.vectors.data() + a * opts.dim, opts.dim);
    std::span<const double> vb(res.vectors.data() + b * opts.dim, opts.dim);
    return dot(va, vb) / (l2_norm(va) * l2_norm(vb));
  };
  auto nearest = [&](int w) {
    int best = -1;
    double bv = -2.0;
    for (int o = 0; o < 4; ++o) {
      if (o == w) continue;
      double c = cosine(w, o);
      if (c > bv) {
        bv = c;
        best = o;
      }
    }
    return best;
  };
  int expected[4] = {1, 0, 3, 2};
  int recovered = 0;
  for (int w = 0; w < 4; ++w) recovered += nearest(w) == expected[w];

  // loss decreases on a clustered corpus
  std::vector<std::vector<int>> topics;
  Rng rng(9);
  for (int s = 0; s < 120; ++s) {
    int topic = s % 3;
    std::vector<int> sent;
    for (int i = 0; i < 6; ++i)
      sent.push_back(topic * 8 + static_cast<int>(rng.uniform_index(8)));
    topics.push_back(sent);
  }
  SkipGramOptions lopts;
  lopts.dim = 12;
  lopts.epochs = 8;
  lopts.seed = 4;
  auto lres = train_skipgram(topics, 24, lopts);
  bool loss_down = lres.epoch_loss.back() < lres.epoch_loss.front();

  bool pass = recovered == 4 && loss_down;
  return {pass, fmt("nearest neighbour recovered for %d/4 centers; epoch loss "
                    "%.4f -> %.4f (%s)",
                    recovered, lres.epoch_loss.front(), lres.epoch_loss.back(),
                    loss_down ? "decreasing" : "NOT decreasing")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
    return 2;
  }
  int n = std::atoi(argv[1]);
  Outcome out;
  switch (n) {
    case 1: out = criterion1(); break;
    case 2: out = criterion2(); break;
    case 3: out = criterion3(); break;
    case 4: out = criterion4(); break;
    case 5: out = criterion5(); break;
    case 6: out = criterion6(); break;
    case 7: out = criterion7(); break;
    case 8: out = criterion8(); break;
    default:
      std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
      return 2;
  }
  std::printf("criterion %d: %s - %s\n", n, out.pass ? "PASS" : "FAIL",
              out.detail.c_str());
  return out.pass ? 0 : 1;
}
