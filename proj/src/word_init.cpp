#include "jointkg/word_init.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jointkg/common.hpp"

namespace jointkg {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// cumulative unigram^0.75 table for negative sampling
std::vector<double> negative_cdf(const std::vector<std::int64_t>& counts) {
  std::vector<double> cdf(counts.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[i]), 0.75);
    cdf[i] = acc;
  }
  if (acc <= 0.0) throw std::runtime_error("train_skipgram: empty corpus");
  for (double& x : cdf) x /= acc;
  return cdf;
}

int sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform();
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

}  // namespace

SkipGramResult train_skipgram(const std::vector<std::vector<int>>& corpus,
                              int vocab_size, const SkipGramOptions& opts) {
  if (opts.dim <= 0 || opts.window <= 0 || opts.epochs < 0)
    throw std::invalid_argument("train_skipgram: bad options");
  std::vector<std::int64_t> counts(vocab_size, 0);
  std::int64_t total_tokens = 0;
  for (const auto& sent : corpus)
    for (int w : sent) {
      if (w < 0 || w >= vocab_size)
        throw std::invalid_argument("train_skipgram: token id out of range");
      ++counts[w];
      ++total_tokens;
    }
  if (total_tokens == 0) throw std::runtime_error("train_skipgram: empty corpus");
  auto cdf = negative_cdf(counts);

  Rng rng(opts.seed);
  int dim = opts.dim;
  std::vector<double> in(static_cast<std::size_t>(vocab_size) * dim);
  std::vector<double> out(static_cast<std::size_t>(vocab_size) * dim, 0.0);
  double init_bound = 0.5 / dim;
  for (double& x : in) x = rng.uniform(-init_bound, init_bound);

  SkipGramResult result;
  std::int64_t centers_total =
      static_cast<std::int64_t>(opts.epochs) * total_tokens;
  std::int64_t centers_done = 0;
  std::vector<double> grad(dim);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::int64_t loss_count = 0;
    for (const auto& sent : corpus) {
      int n = static_cast<int>(sent.size());
      for (int i = 0; i < n; ++i) {
        double lr = opts.lr *
                    std::max(1.0 - static_cast<double>(centers_done) /
                                       static_cast<double>(centers_total),
                             0.0001);
        ++centers_done;
        // shrunken window, as in the reference implementation
        int b = 1 + static_cast<int>(rng.uniform_index(opts.window));
        int center = sent[i];
        double* v = in.data() + static_cast<std::size_t>(center) * dim;
        for (int j = std::max(0, i - b); j <= std::min(n - 1, i + b); ++j) {
          if (j == i) continue;
          int context = sent[j];
          std::fill(grad.begin(), grad.end(), 0.0);
          double pair_loss = 0.0;
          for (int neg = 0; neg <= opts.negatives; ++neg) {
            int target;
            double label;
            if (neg == 0) {
              target = context;
              label = 1.0;
            } else {
              target = sample_cdf(cdf, rng);
              if (target == context) continue;
              label = 0.0;
            }
            double* u = out.data() + static_cast<std::size_t>(target) * dim;
            double score = 0.0;
            for (int d = 0; d < dim; ++d) score += v[d] * u[d];
            double p = sigmoid(score);
            pair_loss += label > 0.5 ? -std::log(std::max(p, 1e-12))
                                     : -std::log(std::max(1.0 - p, 1e-12));
            double g = (p - label) * lr;
            for (int d = 0; d < dim; ++d) {
              grad[d] += g * u[d];
              u[d] -= g * v[d];
            }
          }
          for (int d = 0; d < dim; ++d) v[d] -= grad[d];
          loss_sum += pair_loss;
          ++loss_count;
        }
      }
    }
    result.epoch_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);
  }
  result.vectors = std::move(in);
  return result;
}

std::vector<std::vector<int>> tokenize_corpus(const std::string& path,
                                              Vocabulary& vocab) {
  std::ifstream input(path);
  if (!input) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::vector<int>> corpus;
  std::string line;
  while (std::getline(input, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<int> sent;
    std::string tok;
    while (ss >> tok) sent.push_back(vocab.add_word(tok));
    if (!sent.empty()) corpus.push_back(std::move(sent));
  }
  return corpus;
}

}  // namespace jointkg
