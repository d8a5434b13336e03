#include "jointkg/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jointkg {

EmbeddingBank::EmbeddingBank(const Dims& dims, const Vocabulary* vocab) {
  if (dims.k <= 0 || dims.num_entities < 0 || dims.num_relations < 0 ||
      dims.num_words < 0)
    throw std::invalid_argument("EmbeddingBank: non-positive dimension");
  k_ = dims.k;
  num_entities_ = dims.num_entities;
  num_relations_ = dims.num_relations;
  num_words_ = dims.num_words;
  entity_.assign(static_cast<std::size_t>(num_entities_) * k_, 0.0);
  relation_.assign(static_cast<std::size_t>(num_relations_) * k_, 0.0);
  word_.assign(static_cast<std::size_t>(num_words_) * k_, 0.0);
  word_redirect_.assign(num_words_, -1);
  if (vocab) {
    for (auto [e, w] : vocab->anchor_map()) {
      if (w < num_words_ && e < num_entities_) word_redirect_[w] = e;
    }
  }
}

bool EmbeddingBank::all_finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return ok(entity_) && ok(relation_) && ok(word_);
}

namespace {

void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void read_raw(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("truncated checkpoint");
}
void write_i32(std::ostream& out, int v) { write_raw(out, &v, sizeof v); }
int read_i32(std::istream& in) {
  int v;
  read_raw(in, &v, sizeof v);
  return v;
}
void write_doubles(std::ostream& out, const std::vector<double>& v) {
  std::uint64_t n = v.size();
  write_raw(out, &n, sizeof n);
  write_raw(out, v.data(), n * sizeof(double));
}
std::vector<double> read_doubles(std::istream& in) {
  std::uint64_t n;
  read_raw(in, &n, sizeof n);
  std::vector<double> v(n);
  read_raw(in, v.data(), n * sizeof(double));
  return v;
}

}  // namespace

void EmbeddingBank::save(std::ostream& out) const {
  write_i32(out, k_);
  write_i32(out, num_entities_);
  write_i32(out, num_relations_);
  write_i32(out, num_words_);
  write_doubles(out, entity_);
  write_doubles(out, relation_);
  write_doubles(out, word_);
  std::uint64_t n = word_redirect_.size();
  write_raw(out, &n, sizeof n);
  write_raw(out, word_redirect_.data(), n * sizeof(int));
}

EmbeddingBank EmbeddingBank::load(std::istream& in) {
  EmbeddingBank b;
  b.k_ = read_i32(in);
  b.num_entities_ = read_i32(in);
  b.num_relations_ = read_i32(in);
  b.num_words_ = read_i32(in);
  b.entity_ = read_doubles(in);
  b.relation_ = read_doubles(in);
  b.word_ = read_doubles(in);
  std::uint64_t n;
  read_raw(in, &n, sizeof n);
  b.word_redirect_.resize(n);
  read_raw(in, b.word_redirect_.data(), n * sizeof(int));
  return b;
}

void ConvParams::save(std::ostream& out) const {
  write_i32(out, window);
  write_i32(out, k_c);
  write_i32(out, k_w);
  write_i32(out, k_p);
  write_i32(out, d_max);
  write_doubles(out, kernel);
  write_doubles(out, bias);
  write_doubles(out, pos_head);
  write_doubles(out, pos_tail);
}

ConvParams ConvParams::load(std::istream& in) {
  ConvParams c;
  c.window = read_i32(in);
  c.k_c = read_i32(in);
  c.k_w = read_i32(in);
  c.k_p = read_i32(in);
  c.d_max = read_i32(in);
  c.kernel = read_doubles(in);
  c.bias = read_doubles(in);
  c.pos_head = read_doubles(in);
  c.pos_tail = read_doubles(in);
  return c;
}

ModelParams init_params(const Dims& dims, std::uint64_t seed,
                        const Vocabulary* vocab, const InitOptions& opts) {
  if (dims.k <= 0 || opts.window <= 0 || opts.k_p <= 0 || opts.d_max <= 0)
    throw std::invalid_argument("init_params: non-positive dimension");
  if (opts.window % 2 == 0)
    throw std::invalid_argument("init_params: window size must be odd");

  ModelParams p;
  p.bank = EmbeddingBank(dims, vocab);
  Rng rng(seed);
  double bound = 6.0 / std::sqrt(static_cast<double>(dims.k));
  auto fill = [&](std::span<double> v) {
    for (double& x : v) x = rng.uniform(-bound, bound);
  };
  for (int e = 0; e < dims.num_entities; ++e) fill(p.bank.entity_row(e));
  for (int r = 0; r < dims.num_relations; ++r) fill(p.bank.relation_row(r));
  for (int w = 0; w < dims.num_words; ++w) {
    // redirected rows alias entity rows already initialized above; draw into
    // them anyway so the stream layout is independent of the anchor map
    if (p.bank.word_redirect(w) >= 0) {
      for (int i = 0; i < dims.k; ++i) rng.uniform();
    } else {
      fill(p.bank.word_row(w));
    }
  }

  ConvParams& c = p.conv;
  c.window = opts.window;
  c.k_p = opts.k_p;
  c.d_max = opts.d_max;
  c.k_c = dims.k;
  c.k_w = dims.k + 2 * opts.k_p;
  c.kernel.resize(static_cast<std::size_t>(c.k_c) * c.window * c.k_w);
  c.bias.assign(c.k_c, 0.0);
  int cells = 2 * c.d_max + 1;
  c.pos_head.resize(static_cast<std::size_t>(cells) * c.k_p);
  c.pos_tail.resize(static_cast<std::size_t>(cells) * c.k_p);
  fill(c.kernel);
  fill(c.pos_head);
  fill(c.pos_tail);

  normalize_entities(p.bank, rng);
  return p;
}

void normalize_entity_row(EmbeddingBank& bank, int id, Rng& rng) {
  auto row = bank.entity_row(id);
  double n = l2_norm(row);
  if (n > 0.0) {
    scale(row, 1.0 / n);
    return;
  }
  // zero row: replace with a random unit vector
  do {
    for (double& x : row) x = rng.uniform(-1.0, 1.0);
    n = l2_norm(row);
  } while (n == 0.0);
  scale(row, 1.0 / n);
}

void normalize_entities(EmbeddingBank& bank, Rng& rng) {
  for (int e = 0; e < bank.num_entities(); ++e)
    normalize_entity_row(bank, e, rng);
}

int load_word_vectors(const std::string& path, EmbeddingBank& bank,
                      const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::size_t count = 0;
  int dim = 0;
  if (!(in >> count >> dim))
    throw std::runtime_error("bad word-vector header in " + path);
  if (dim != bank.k())
    throw std::runtime_error("word-vector dimension " + std::to_string(dim) +
                             " does not match k=" + std::to_string(bank.k()));
  int loaded = 0;
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token))
      throw std::runtime_error("truncated word-vector file: " + path);
    std::vector<double> vec(dim);
    for (int j = 0; j < dim; ++j)
      if (!(in >> vec[j]))
        throw std::runtime_error("truncated word-vector file: " + path);
    auto w = vocab.word_id(token);
    if (!w) continue;  // unknown word: skipped
    auto row = bank.word_row(*w);
    std::copy(vec.begin(), vec.end(), row.begin());
    ++loaded;
  }
  return loaded;
}

void save_word_vectors(const std::string& path,
                       const std::vector<double>& vectors, int dim,
                       const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  int n = vocab.num_words();
  out << n << " " << dim << "\n";
  out.precision(17);
  for (int w = 0; w < n; ++w) {
    out << vocab.word_name(w);
    for (int j = 0; j < dim; ++j)
      out << " " << vectors[static_cast<std::size_t>(w) * dim + j];
    out << "\n";
  }
}

static const char kCheckpointMagic[8] = {'J', 'K', 'G', 'C', 'K', 'P', 'T', '1'};

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  params.bank.save(out);
  params.conv.save(out);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  ModelParams p;
  p.bank = EmbeddingBank::load(in);
  p.conv = ConvParams::load(in);
  return p;
}

}  // namespace jointkg
