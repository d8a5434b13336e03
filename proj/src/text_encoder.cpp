#include "jointkg/text_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointkg {

AlignedSentence truncate_sentence(const AlignedSentence& s, int max_len) {
  int n = static_cast<int>(s.tokens.size());
  if (n <= max_len) return s;
  int lo = std::min(s.head_pos, s.tail_pos);
  int hi = std::max(s.head_pos, s.tail_pos);
  int len = std::max(max_len, hi - lo + 1);
  int mid = (lo + hi) / 2;
  int start = std::clamp(mid - len / 2, 0, n - len);
  if (start > lo) start = lo;
  if (start + len <= hi) start = hi - len + 1;
  AlignedSentence out;
  out.tokens.assign(s.tokens.begin() + start, s.tokens.begin() + start + len);
  out.head_pos = s.head_pos - start;
  out.tail_pos = s.tail_pos - start;
  out.relation = s.relation;
  out.source_pair = s.source_pair;
  return out;
}

InputMatrix build_input(const EmbeddingBank& bank, const ConvParams& conv,
                        const AlignedSentence& s) {
  int n = static_cast<int>(s.tokens.size());
  if (n < 1) throw std::invalid_argument("build_input: empty sentence");
  int k = bank.k();
  InputMatrix m;
  m.n = n;
  m.k_w = conv.k_w;
  m.data.assign(static_cast<std::size_t>(n) * conv.k_w, 0.0);
  for (int i = 0; i < n; ++i) {
    auto row = m.row(i);
    auto w = bank.word_row(s.tokens[i]);
    std::copy(w.begin(), w.end(), row.begin());
    // distance convention: entity position minus word position
    auto ph = conv.pos_head_row(conv.clip_cell(s.head_pos - i));
    std::copy(ph.begin(), ph.end(), row.begin() + k);
    auto pt = conv.pos_tail_row(conv.clip_cell(s.tail_pos - i));
    std::copy(pt.begin(), pt.end(), row.begin() + k + conv.k_p);
  }
  return m;
}

EncodeTrace encode_sentence(const EmbeddingBank& bank, const ConvParams& conv,
                            const AlignedSentence& s) {
  EncodeTrace t;
  t.input = build_input(bank, conv, s);
  int n = t.input.n;
  t.k_c = conv.k_c;
  t.hidden.assign(static_cast<std::size_t>(n) * conv.k_c, 0.0);
  int half = (conv.window - 1) / 2;
  for (int i = 0; i < n; ++i) {
    double* y = t.hidden.data() + static_cast<std::size_t>(i) * conv.k_c;
    for (int c = 0; c < conv.k_c; ++c) {
      auto w = conv.kernel_row(c);
      double z = conv.bias[c];
      for (int o = 0; o < conv.window; ++o) {
        int j = i + o - half;
        if (j < 0 || j >= n) continue;  // zero padding
        auto x = t.input.row(j);
        const double* wk = w.data() + static_cast<std::size_t>(o) * conv.k_w;
        for (int d = 0; d < conv.k_w; ++d) z += wk[d] * x[d];
      }
      y[c] = std::tanh(z);
    }
  }
  t.argmax.assign(conv.k_c, 0);
  t.output.assign(conv.k_c, 0.0);
  for (int c = 0; c < conv.k_c; ++c) {
    int best = 0;
    double bv = t.hidden[c];
    for (int i = 1; i < n; ++i) {
      double v = t.hidden[static_cast<std::size_t>(i) * conv.k_c + c];
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    t.argmax[c] = best;
    t.output[c] = bv;
  }
  return t;
}

double sentence_score(const EncodeTrace& trace, std::span<const double> r_vec) {
  if (r_vec.size() != trace.output.size())
    throw std::invalid_argument("sentence_score: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < r_vec.size(); ++i) {
    double d = trace.output[i] - r_vec[i];
    s += d * d;
  }
  return std::sqrt(s);
}

TextGradients text_gradients(const EmbeddingBank& bank, const ConvParams& conv,
                             const AlignedSentence& s, int neg_relation,
                             double margin) {
  TextGradients g;
  EncodeTrace trace = encode_sentence(bank, conv, s);
  int k_c = conv.k_c;
  auto r_pos = bank.relation_row(s.relation);
  auto r_neg = bank.relation_row(neg_relation);
  double fp = sentence_score(trace, r_pos);
  double fn = sentence_score(trace, r_neg);
  g.pos_score = fp;
  g.neg_score = fn;
  double raw = margin + fp - fn;
  g.hinge = std::max(raw, 0.0);
  if (raw <= 0.0) return g;

  // d||r_s - r|| / d r_s = (r_s - r) / ||r_s - r||  (0 at the kink)
  std::vector<double> g_out(k_c, 0.0), u_pos(k_c, 0.0), u_neg(k_c, 0.0);
  if (fp > 0.0)
    for (int c = 0; c < k_c; ++c) u_pos[c] = (trace.output[c] - r_pos[c]) / fp;
  if (fn > 0.0)
    for (int c = 0; c < k_c; ++c) u_neg[c] = (trace.output[c] - r_neg[c]) / fn;
  for (int c = 0; c < k_c; ++c) g_out[c] = u_pos[c] - u_neg[c];

  auto add_rel = [&](int id, double sign, const std::vector<double>& u) {
    auto& v = g.relation_grads[id];
    if (v.empty()) v.assign(k_c, 0.0);
    for (int c = 0; c < k_c; ++c) v[c] += sign * u[c];
  };
  add_rel(s.relation, -1.0, u_pos);
  add_rel(neg_relation, +1.0, u_neg);

  int n = trace.input.n;
  int k_w = conv.k_w;
  int half = (conv.window - 1) / 2;
  g.kernel_grad.assign(conv.kernel.size(), 0.0);
  g.bias_grad.assign(k_c, 0.0);
  std::vector<double> x_grad(static_cast<std::size_t>(n) * k_w, 0.0);

  // pooling routes each output gradient to its argmax position only
  std::vector<double> hidden_grad(static_cast<std::size_t>(n) * k_c, 0.0);
  for (int c = 0; c < k_c; ++c)
    hidden_grad[static_cast<std::size_t>(trace.argmax[c]) * k_c + c] = g_out[c];

  for (int i = 0; i < n; ++i) {
    const double* hg = hidden_grad.data() + static_cast<std::size_t>(i) * k_c;
    bool any = false;
    for (int c = 0; c < k_c; ++c)
      if (hg[c] != 0.0) {
        any = true;
        break;
      }
    if (!any) continue;
    auto y = trace.hidden_row(i);
    for (int c = 0; c < k_c; ++c) {
      if (hg[c] == 0.0) continue;
      double dz = hg[c] * (1.0 - y[c] * y[c]);
      g.bias_grad[c] += dz;
      auto w = conv.kernel_row(c);
      double* wg = g.kernel_grad.data() +
                   static_cast<std::size_t>(c) * conv.window * k_w;
      for (int o = 0; o < conv.window; ++o) {
        int j = i + o - half;
        if (j < 0 || j >= n) continue;
        auto x = trace.input.row(j);
        const double* wk = w.data() + static_cast<std::size_t>(o) * k_w;
        double* xg = x_grad.data() + static_cast<std::size_t>(j) * k_w;
        double* wgo = wg + static_cast<std::size_t>(o) * k_w;
        for (int d = 0; d < k_w; ++d) {
          wgo[d] += dz * x[d];
          xg[d] += dz * wk[d];
        }
      }
    }
  }

  // decompose input-row gradients into word / position-table pieces
  int k = bank.k();
  for (int i = 0; i < n; ++i) {
    const double* xg = x_grad.data() + static_cast<std::size_t>(i) * k_w;
    bool any = false;
    for (int d = 0; d < k_w; ++d)
      if (xg[d] != 0.0) {
        any = true;
        break;
      }
    if (!any) continue;
    auto& wgrad = g.word_grads[s.tokens[i]];
    if (wgrad.empty()) wgrad.assign(k, 0.0);
    for (int d = 0; d < k; ++d) wgrad[d] += xg[d];
    int hc = conv.clip_cell(s.head_pos - i);
    auto& hg = g.pos_head_grads[hc];
    if (hg.empty()) hg.assign(conv.k_p, 0.0);
    for (int d = 0; d < conv.k_p; ++d) hg[d] += xg[k + d];
    int tc = conv.clip_cell(s.tail_pos - i);
    auto& tg = g.pos_tail_grads[tc];
    if (tg.empty()) tg.assign(conv.k_p, 0.0);
    for (int d = 0; d < conv.k_p; ++d) tg[d] += xg[k + conv.k_p + d];
  }
  return g;
}

double text_batch_step(EmbeddingBank& bank, ConvParams& conv,
                       const AlignedSentence& sentence, Rng& rng,
                       const TextStepOptions& opts) {
  if (bank.num_relations() < 2)
    throw std::runtime_error("text_batch_step: need at least two relations");
  AlignedSentence s = truncate_sentence(sentence, opts.max_len);

  int neg = static_cast<int>(rng.uniform_index(bank.num_relations() - 1));
  if (neg >= s.relation) ++neg;

  TextGradients g = text_gradients(bank, conv, s, neg, opts.margin);
  if (g.hinge <= 0.0) return g.hinge;

  double step = opts.tau * opts.lr_text;
  for (std::size_t i = 0; i < conv.kernel.size(); ++i)
    conv.kernel[i] -= step * (g.kernel_grad[i] + opts.weight_decay * conv.kernel[i]);
  for (int c = 0; c < conv.k_c; ++c)
    conv.bias[c] -= step * (g.bias_grad[c] + opts.weight_decay * conv.bias[c]);
  for (auto& [cell, grad] : g.pos_head_grads) {
    auto row = conv.pos_head_row(cell);
    for (int d = 0; d < conv.k_p; ++d) row[d] -= step * grad[d];
  }
  for (auto& [cell, grad] : g.pos_tail_grads) {
    auto row = conv.pos_tail_row(cell);
    for (int d = 0; d < conv.k_p; ++d) row[d] -= step * grad[d];
  }
  for (auto& [w, grad] : g.word_grads) {
    auto row = bank.word_row(w);  // redirects into entity rows for mentions
    for (int d = 0; d < bank.k(); ++d) row[d] -= step * grad[d];
  }
  for (auto& [r, grad] : g.relation_grads) {
    auto row = bank.relation_row(r);
    for (int d = 0; d < bank.k(); ++d) row[d] -= step * grad[d];
  }
  return g.hinge;
}

}  // namespace jointkg
