#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "jointkg/aligner.hpp"
#include "jointkg/common.hpp"
#include "jointkg/evaluator.hpp"
#include "jointkg/params.hpp"
#include "jointkg/text_encoder.hpp"
#include "jointkg/trainer.hpp"
#include "jointkg/transe.hpp"
#include "jointkg/vocab.hpp"
#include "jointkg/word_init.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jointkg;

namespace {

struct CliConfig {
  TrainConfig train;
  bool filtered = true;
  int eval_threads = 0;  // 0 = all cores
  int sg_window = 5;
  int sg_negatives = 5;
  int sg_epochs = 5;
  double sg_lr = 0.025;
  int top_k_relations = 100;
  bool mean_aggregation = false;
};

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

void apply_config_file(const std::map<std::string, std::string>& kv, CliConfig& cfg) {
  auto geti = [&](const char* k, auto& target) {
    auto it = kv.find(k);
    if (it != kv.end()) target = static_cast<std::decay_t<decltype(target)>>(std::stod(it->second));
  };
  auto getd = [&](const char* k, double& target) {
    auto it = kv.find(k);
    if (it != kv.end()) target = std::stod(it->second);
  };
  getd("lr_kg", cfg.train.lr_kg);
  getd("lr_text", cfg.train.lr_text);
  getd("tau", cfg.train.tau);
  getd("lambda", cfg.train.lambda);
  getd("margin", cfg.train.margin);
  geti("dim", cfg.train.dim);
  geti("kg_rounds", cfg.train.kg_rounds);
  geti("text_rounds", cfg.train.text_rounds);
  geti("seed", cfg.train.seed);
  geti("batch_size", cfg.train.batch_size);
  geti("k_p", cfg.train.k_p);
  geti("conv_window", cfg.train.conv_window);
  geti("d_max", cfg.train.d_max);
  geti("max_sentence_len", cfg.train.max_sentence_len);
  geti("threads", cfg.eval_threads);
  geti("top_k_relations", cfg.top_k_relations);
  auto it = kv.find("filtered");
  if (it != kv.end()) cfg.filtered = it->second == "true" || it->second == "1";
  it = kv.find("bern");
  if (it != kv.end()) cfg.train.corruption.bernoulli = it->second == "true" || it->second == "1";
}

json config_json(const CliConfig& cfg) {
  json j;
  j["lr_kg"] = cfg.train.lr_kg;
  j["lr_text"] = cfg.train.lr_text;
  j["tau"] = cfg.train.tau;
  j["lambda"] = cfg.train.lambda;
  j["margin"] = cfg.train.margin;
  j["dim"] = cfg.train.dim;
  j["kg_rounds"] = cfg.train.kg_rounds;
  j["text_rounds"] = cfg.train.text_rounds;
  j["seed"] = cfg.train.seed;
  j["batch_size"] = cfg.train.batch_size;
  j["k_p"] = cfg.train.k_p;
  j["conv_window"] = cfg.train.conv_window;
  j["d_max"] = cfg.train.d_max;
  j["max_sentence_len"] = cfg.train.max_sentence_len;
  j["filtered"] = cfg.filtered;
  j["threads"] = cfg.eval_threads;
  j["bern"] = cfg.train.corruption.bernoulli;
  return j;
}

fs::path make_run_dir(const std::string& out, std::uint64_t seed) {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::localtime(&tt));
  fs::path base = fs::path(out) /
                  ("run-" + std::string(stamp) + "-seed" + std::to_string(seed));
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i)
    dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const CliConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& inputs) {
  json j;
  j["command"] = command;
  j["config"] = config_json(cfg);
  j["seed"] = cfg.train.seed;
  auto& in = j["inputs"] = json::object();
  for (const auto& [name, path] : inputs)
    in[name] = {{"path", path}, {"fnv1a64", digest_file(path)}};
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

int effective_threads(int configured) {
  if (configured > 0) return configured;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Adds every token and relation of an aligned corpus file to the vocabulary
// so it can be loaded strictly afterwards.
void prescan_aligned(const std::string& path, Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    for (const auto& tok : j.at("tokens")) vocab.add_word(tok.get<std::string>());
  }
}

struct DataPaths {
  std::string train, valid, test, anchors, sentences, corpus, words, checkpoint,
      vocab, store, input;
};

void require(const std::string& path, const char* what) {
  if (path.empty()) throw std::runtime_error(std::string("missing required --") + what);
  if (!fs::exists(path))
    throw std::runtime_error(std::string(what) + " file not found: " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"Joint text/knowledge-graph embedding toolkit"};
  app.require_subcommand(1);

  CliConfig cfg;
  DataPaths paths;
  std::string config_path, out_dir = "runs";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--seed", cfg.train.seed, "RNG seed");
    sub->add_option("--dim", cfg.train.dim, "embedding dimension k");
    sub->add_option("--margin", cfg.train.margin, "margin gamma");
    sub->add_option("--tau", cfg.train.tau, "text-side harmonic factor");
    sub->add_option("--lr-kg", cfg.train.lr_kg, "KG-side learning rate");
    sub->add_option("--lr-text", cfg.train.lr_text, "text-side learning rate");
    sub->add_option("--kg-rounds", cfg.train.kg_rounds, "KG train-set passes");
    sub->add_option("--text-rounds", cfg.train.text_rounds, "corpus passes");
    sub->add_option("--filtered", cfg.filtered, "filtered evaluation setting");
    sub->add_option("--threads", cfg.eval_threads, "evaluation threads (0 = all cores)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--batch-size", cfg.train.batch_size, "KG batch size");
    sub->add_flag("--bern", cfg.train.corruption.bernoulli, "bern entity corruption");
    sub->add_option("--top-k", cfg.top_k_relations, "relation-classification Top-K");
    sub->add_flag("--mean-agg", cfg.mean_aggregation, "mean instead of min sentence aggregation");
  };
  auto add_triples = [&](CLI::App* sub) {
    sub->add_option("--train", paths.train, "train triple file");
    sub->add_option("--valid", paths.valid, "valid triple file");
    sub->add_option("--test", paths.test, "test triple file");
    sub->add_option("--anchors", paths.anchors, "entity anchor file");
  };

  auto* align = app.add_subcommand("align", "build the aligned training corpus");
  add_common(align);
  add_triples(align);
  align->add_option("--corpus", paths.corpus, "raw corpus (JSONL with anchors)");

  auto* pretrain = app.add_subcommand("pretrain-words", "Skip-Gram word vectors");
  add_common(pretrain);
  pretrain->add_option("--corpus", paths.corpus, "plain-text corpus");
  pretrain->add_option("--sg-window", cfg.sg_window, "context window");
  pretrain->add_option("--sg-negatives", cfg.sg_negatives, "negative samples");
  pretrain->add_option("--sg-epochs", cfg.sg_epochs, "epochs");
  pretrain->add_option("--sg-lr", cfg.sg_lr, "initial learning rate");

  auto* train_kg = app.add_subcommand("train-kg", "train TransE only");
  add_common(train_kg);
  add_triples(train_kg);

  auto* train_joint = app.add_subcommand("train-joint", "joint KG + text training");
  add_common(train_joint);
  add_triples(train_joint);
  train_joint->add_option("--sentences", paths.sentences, "aligned corpus (JSONL)");
  train_joint->add_option("--words", paths.words, "pretrained word vectors");

  auto* eval_entity = app.add_subcommand("eval-entity", "entity prediction Hits@10");
  add_common(eval_entity);
  eval_entity->add_option("--checkpoint", paths.checkpoint, "model checkpoint");
  eval_entity->add_option("--vocab", paths.vocab, "saved vocabulary");
  eval_entity->add_option("--store", paths.store, "saved triple store");

  auto* eval_relation = app.add_subcommand("eval-relation", "relation prediction Top-1");
  add_common(eval_relation);
  eval_relation->add_option("--checkpoint", paths.checkpoint, "model checkpoint");
  eval_relation->add_option("--vocab", paths.vocab, "saved vocabulary");
  eval_relation->add_option("--store", paths.store, "saved triple store");

  auto* eval_text = app.add_subcommand("eval-text", "relation classification PR curve");
  add_common(eval_text);
  eval_text->add_option("--checkpoint", paths.checkpoint, "model checkpoint");
  eval_text->add_option("--vocab", paths.vocab, "saved vocabulary");
  eval_text->add_option("--store", paths.store, "saved triple store");
  eval_text->add_option("--sentences", paths.sentences, "test sentences (JSONL)");

  auto* report = app.add_subcommand("report", "pretty-print a stored report");
  report->add_option("--in", paths.input, "report file (json or csv)")->required();

  // config-file values load first, command line overrides
  app.parse_complete_callback([] {});
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (!config_path.empty()) {
    auto kv = read_config_file(config_path);
    CliConfig from_file;
    apply_config_file(kv, from_file);
    // reparse so explicit flags win over the file
    CliConfig merged = from_file;
    cfg = merged;
    try {
      app.clear();
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }
  }
  cfg.train.validate();

  auto train_common = [&](bool with_text) -> int {
    require(paths.train, "train");
    std::vector<std::string> files{paths.train};
    if (!paths.valid.empty()) files.push_back(paths.valid);
    if (!paths.test.empty()) files.push_back(paths.test);
    auto built = build_vocabulary(files, "", paths.anchors);
    std::vector<AlignedSentence> corpus;
    if (with_text) {
      require(paths.sentences, "sentences");
      prescan_aligned(paths.sentences, built.vocab);
      corpus = load_aligned_corpus(paths.sentences, built.vocab);
    } else {
      cfg.train.text_rounds = 0;
    }
    Dims dims{built.vocab.num_entities(), built.vocab.num_relations(),
              built.vocab.num_words(), cfg.train.dim};
    InitOptions init_opts{cfg.train.conv_window, cfg.train.k_p, cfg.train.d_max};
    ModelParams model = init_params(dims, cfg.train.seed, &built.vocab, init_opts);
    if (!paths.words.empty()) {
      int loaded = load_word_vectors(paths.words, model.bank, built.vocab);
      std::cerr << "loaded " << loaded << " word vectors\n";
      Rng repair(cfg.train.seed + 1);
      normalize_entities(model.bank, repair);
    }
    if (cfg.train.corruption.bernoulli) {
      static std::vector<double> bern;
      bern = bernoulli_head_probs(built.store, built.vocab.num_relations());
      cfg.train.corruption.bern_head_prob = &bern;
    }
    LossHistory history =
        joint_train(cfg.train, built.store, corpus, model.bank, model.conv);

    fs::path dir = make_run_dir(out_dir, cfg.train.seed);
    save_checkpoint((dir / "checkpoint.bin").string(), model);
    built.vocab.save((dir / "vocab.txt").string());
    built.store.save((dir / "store.txt").string());
    history.save((dir / "loss_history.tsv").string());
    std::vector<std::pair<std::string, std::string>> inputs{{"train", paths.train}};
    if (!paths.valid.empty()) inputs.emplace_back("valid", paths.valid);
    if (!paths.test.empty()) inputs.emplace_back("test", paths.test);
    if (!paths.anchors.empty()) inputs.emplace_back("anchors", paths.anchors);
    if (with_text) inputs.emplace_back("sentences", paths.sentences);
    if (!paths.words.empty()) inputs.emplace_back("words", paths.words);
    write_manifest(dir, with_text ? "train-joint" : "train-kg", cfg, inputs);
    std::cout << dir.string() << "\n";
    return 0;
  };

  if (align->parsed()) {
    require(paths.train, "train");
    require(paths.corpus, "corpus");
    std::vector<std::string> files{paths.train};
    if (!paths.valid.empty()) files.push_back(paths.valid);
    if (!paths.test.empty()) files.push_back(paths.test);
    auto built = build_vocabulary(files, "", paths.anchors);
    auto raw = load_raw_corpus(paths.corpus);
    std::vector<MarkedSentence> marked;
    marked.reserve(raw.size());
    for (const auto& rec : raw)
      marked.push_back(tokenize_with_anchors(rec, built.vocab));
    auto result = distant_label(marked, built.store, built.vocab);

    fs::path dir = make_run_dir(out_dir, cfg.train.seed);
    save_aligned_corpus((dir / "aligned.jsonl").string(), result.sentences,
                        built.vocab);
    built.vocab.save((dir / "vocab.txt").string());
    built.store.save((dir / "store.txt").string());
    json stats;
    stats["input_sentences"] = result.stats.input_sentences;
    stats["labeled_sentences"] = result.stats.labeled_sentences;
    stats["records"] = result.stats.records;
    stats["distinct_triples"] = result.stats.distinct_triples;
    stats["distinct_relations"] = result.stats.distinct_relations;
    stats["distinct_entities"] = result.stats.distinct_entities;
    std::ofstream(dir / "align_stats.json") << stats.dump(2) << "\n";
    std::vector<std::pair<std::string, std::string>> inputs{
        {"train", paths.train}, {"corpus", paths.corpus}};
    if (!paths.anchors.empty()) inputs.emplace_back("anchors", paths.anchors);
    write_manifest(dir, "align", cfg, inputs);
    std::cout << dir.string() << "\n";
    return 0;
  }
  if (pretrain->parsed()) {
    require(paths.corpus, "corpus");
    Vocabulary vocab;
    auto corpus = tokenize_corpus(paths.corpus, vocab);
    SkipGramOptions opts;
    opts.dim = cfg.train.dim;
    opts.window = cfg.sg_window;
    opts.negatives = cfg.sg_negatives;
    opts.epochs = cfg.sg_epochs;
    opts.lr = cfg.sg_lr;
    opts.seed = cfg.train.seed;
    auto result = train_skipgram(corpus, vocab.num_words(), opts);
    fs::path dir = make_run_dir(out_dir, cfg.train.seed);
    save_word_vectors((dir / "word_vectors.txt").string(), result.vectors,
                      opts.dim, vocab);
    write_manifest(dir, "pretrain-words", cfg, {{"corpus", paths.corpus}});
    std::cout << dir.string() << "\n";
    return 0;
  }
  if (train_kg->parsed()) return train_common(false);
  if (train_joint->parsed()) return train_common(true);

  auto load_model = [&](Vocabulary& vocab, TripleStore& store) {
    require(paths.checkpoint, "checkpoint");
    require(paths.vocab, "vocab");
    require(paths.store, "store");
    vocab = Vocabulary::load(paths.vocab);
    store = TripleStore::load(paths.store);
    return load_checkpoint(paths.checkpoint);
  };

  if (eval_entity->parsed() || eval_relation->parsed()) {
    Vocabulary vocab;
    TripleStore store;
    ModelParams model = load_model(vocab, store);
    auto classes = classify_relations(store, vocab.num_relations());
    fs::path dir = make_run_dir(out_dir, cfg.train.seed);
    int threads = effective_threads(cfg.eval_threads);
    if (eval_entity->parsed()) {
      auto rep = entity_prediction_eval(model.bank, store, classes.classes,
                                        cfg.filtered, threads);
      rep.save((dir / "entity_prediction.json").string());
    } else {
      auto rep = relation_prediction_eval(model.bank, store, classes.classes,
                                          cfg.filtered, threads);
      rep.save((dir / "relation_prediction.json").string());
    }
    write_manifest(dir, eval_entity->parsed() ? "eval-entity" : "eval-relation",
                   cfg,
                   {{"checkpoint", paths.checkpoint},
                    {"vocab", paths.vocab},
                    {"store", paths.store}});
    std::cout << dir.string() << "\n";
    return 0;
  }
  if (eval_text->parsed()) {
    Vocabulary vocab;
    TripleStore store;
    ModelParams model = load_model(vocab, store);
    require(paths.sentences, "sentences");
    prescan_aligned(paths.sentences, vocab);
    auto sentences = load_aligned_corpus(paths.sentences, vocab);
    RelationClassificationOptions opts;
    opts.top_k_relations = cfg.top_k_relations;
    opts.mean_aggregation = cfg.mean_aggregation;
    opts.max_sentence_len = cfg.train.max_sentence_len;
    auto curve = relation_classification_eval(model.bank, model.conv, sentences,
                                              store, opts);
    fs::path dir = make_run_dir(out_dir, cfg.train.seed);
    curve.save_csv((dir / "pr_curve.csv").string());
    json meta;
    meta["total_candidates"] = curve.total_candidates;
    meta["total_correct"] = curve.total_correct;
    meta["excluded_pairs"] = curve.excluded_pairs;
    std::ofstream(dir / "pr_meta.json") << meta.dump(2) << "\n";
    write_manifest(dir, "eval-text", cfg,
                   {{"checkpoint", paths.checkpoint},
                    {"vocab", paths.vocab},
                    {"store", paths.store},
                    {"sentences", paths.sentences}});
    std::cout << dir.string() << "\n";
    return 0;
  }
  if (report->parsed()) {
    require(paths.input, "in");
    std::ifstream in(paths.input);
    if (paths.input.ends_with(".csv") || paths.input.ends_with(".tsv")) {
      std::cout << in.rdbuf();
    } else {
      json j;
      in >> j;
      std::cout << j.dump(2) << "\n";
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
