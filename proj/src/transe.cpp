#include "jointkg/transe.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace jointkg {

std::vector<double> bernoulli_head_probs(const TripleStore& store,
                                         int num_relations) {
  std::vector<double> probs(num_relations, 0.5);
  for (int r = 0; r < num_relations; ++r) {
    auto pairs = store.relation_pairs(r);
    if (pairs.empty()) continue;
    std::unordered_set<int> heads, tails;
    for (auto [h, t] : pairs) {
      heads.insert(h);
      tails.insert(t);
    }
    double tph = static_cast<double>(pairs.size()) / heads.size();
    double hpt = static_cast<double>(pairs.size()) / tails.size();
    probs[r] = tph / (tph + hpt);
  }
  return probs;
}

std::vector<double> latent_relation(std::span<const double> h_vec,
                                    std::span<const double> t_vec) {
  if (h_vec.size() != t_vec.size())
    throw std::invalid_argument("latent_relation: dimension mismatch");
  std::vector<double> r(h_vec.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = t_vec[i] - h_vec[i];
  return r;
}

namespace {

// residual v = t - h - r and its norm
double residual(const EmbeddingBank& bank, const Triple& t,
                std::vector<double>& v) {
  auto h = bank.entity_row(t.head);
  auto r = bank.relation_row(t.relation);
  auto tl = bank.entity_row(t.tail);
  v.resize(bank.k());
  double s = 0.0;
  for (int i = 0; i < bank.k(); ++i) {
    v[i] = tl[i] - h[i] - r[i];
    s += v[i] * v[i];
  }
  return std::sqrt(s);
}

}  // namespace

double score_triple(const EmbeddingBank& bank, const Triple& t,
                    const ScoreOptions& opts) {
  std::vector<double> v;
  double n = residual(bank, t, v);
  return opts.squared ? n * n : n;
}

std::optional<Corruption> sample_corruption(Rng& rng, const Triple& positive,
                                            const TripleStore& store,
                                            int num_entities, int num_relations,
                                            const CorruptionOptions& opts) {
  if (num_entities < 2 || num_relations < 2)
    throw std::invalid_argument("sample_corruption: need |E| >= 2, |R| >= 2");
  double wh = opts.head_weight, wr = opts.relation_weight, wt = opts.tail_weight;
  double total = wh + wr + wt;
  if (total <= 0.0)
    throw std::invalid_argument("sample_corruption: non-positive weights");

  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    Slot slot;
    double u = rng.uniform() * total;
    if (u < wh) slot = Slot::Head;
    else if (u < wh + wr) slot = Slot::Relation;
    else slot = Slot::Tail;
    if (opts.bernoulli && slot != Slot::Relation) {
      double p = opts.bern_head_prob
                     ? (*opts.bern_head_prob)[positive.relation]
                     : 0.5;
      slot = rng.uniform() < p ? Slot::Head : Slot::Tail;
    }

    Triple corrupted = positive;
    switch (slot) {
      case Slot::Head: {
        int e = static_cast<int>(rng.uniform_index(num_entities - 1));
        if (e >= positive.head) ++e;
        corrupted.head = e;
        break;
      }
      case Slot::Tail: {
        int e = static_cast<int>(rng.uniform_index(num_entities - 1));
        if (e >= positive.tail) ++e;
        corrupted.tail = e;
        break;
      }
      case Slot::Relation: {
        int r = static_cast<int>(rng.uniform_index(num_relations - 1));
        if (r >= positive.relation) ++r;
        corrupted.relation = r;
        break;
      }
    }
    if (!store.in_train(corrupted)) return Corruption{corrupted, slot};
  }
  return std::nullopt;
}

KgGradients kg_pair_gradients(const EmbeddingBank& bank, const Triple& positive,
                              const Triple& negative, double margin,
                              const ScoreOptions& opts) {
  KgGradients out;
  std::vector<double> vp, vn;
  double np = residual(bank, positive, vp);
  double nn = residual(bank, negative, vn);
  double fp = opts.squared ? np * np : np;
  double fn = opts.squared ? nn * nn : nn;
  double raw = margin + fp - fn;
  out.hinge = std::max(raw, 0.0);
  if (raw <= 0.0) return out;

  int k = bank.k();
  // df/dv for f = ||v|| is v/||v|| (0 at the kink); for f = ||v||^2 it is 2v.
  auto unit_grad = [&](const std::vector<double>& v, double n,
                       std::vector<double>& g) {
    g.assign(k, 0.0);
    if (opts.squared) {
      for (int i = 0; i < k; ++i) g[i] = 2.0 * v[i];
    } else if (n > 0.0) {
      for (int i = 0; i < k; ++i) g[i] = v[i] / n;
    }
  };
  std::vector<double> gp, gn;
  unit_grad(vp, np, gp);
  unit_grad(vn, nn, gn);

  // v = t - h - r, so dL/dt = +g, dL/dh = -g, dL/dr = -g for the positive
  // term and the opposite signs for the negative term.
  std::map<int, std::vector<double>> ent, rel;
  auto acc = [&](std::map<int, std::vector<double>>& m, int id, double sign,
                 const std::vector<double>& g) {
    auto& v = m[id];
    if (v.empty()) v.assign(k, 0.0);
    for (int i = 0; i < k; ++i) v[i] += sign * g[i];
  };
  acc(ent, positive.tail, +1.0, gp);
  acc(ent, positive.head, -1.0, gp);
  acc(rel, positive.relation, -1.0, gp);
  acc(ent, negative.tail, -1.0, gn);
  acc(ent, negative.head, +1.0, gn);
  acc(rel, negative.relation, +1.0, gn);

  for (auto& [id, g] : ent) out.entity_grads.emplace_back(id, std::move(g));
  for (auto& [id, g] : rel) out.relation_grads.emplace_back(id, std::move(g));
  return out;
}

double kg_batch_step(EmbeddingBank& bank, const KgBatch& batch,
                     const KgStepOptions& opts, Rng& rng) {
  if (batch.positives.size() != batch.negatives.size())
    throw std::invalid_argument("kg_batch_step: malformed batch");
  double total = 0.0;
  std::map<int, std::vector<double>> ent, rel;
  int k = bank.k();
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    KgGradients g = kg_pair_gradients(bank, batch.positives[i],
                                      batch.negatives[i].triple, opts.margin,
                                      opts.score);
    total += g.hinge;
    if (g.hinge <= 0.0) continue;
    for (auto& [id, grad] : g.entity_grads) {
      auto& acc = ent[id];
      if (acc.empty()) acc.assign(k, 0.0);
      for (int j = 0; j < k; ++j) acc[j] += grad[j];
    }
    for (auto& [id, grad] : g.relation_grads) {
      auto& acc = rel[id];
      if (acc.empty()) acc.assign(k, 0.0);
      for (int j = 0; j < k; ++j) acc[j] += grad[j];
    }
  }
  for (auto& [id, grad] : ent) {
    auto row = bank.entity_row(id);
    for (int j = 0; j < k; ++j) row[j] -= opts.lr * grad[j];
  }
  for (auto& [id, grad] : rel) {
    auto row = bank.relation_row(id);
    for (int j = 0; j < k; ++j) row[j] -= opts.lr * grad[j];
  }
  // untouched rows are already unit-norm, so renormalizing the touched ones
  // restores the global invariant
  for (auto& [id, grad] : ent) normalize_entity_row(bank, id, rng);
  return total;
}

}  // namespace jointkg
