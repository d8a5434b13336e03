#include "jointkg/vocab.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace jointkg {

using nlohmann::json;

const char* relation_class_name(RelationClass c) {
  switch (c) {
    case RelationClass::OneToOne: return "1-to-1";
    case RelationClass::OneToMany: return "1-to-N";
    case RelationClass::ManyToOne: return "N-to-1";
    case RelationClass::ManyToMany: return "N-to-N";
  }
  return "?";
}

namespace {

int get_or_add(std::vector<std::string>& names,
               std::unordered_map<std::string, int>& ids,
               const std::string& name) {
  auto it = ids.find(name);
  if (it != ids.end()) return it->second;
  int id = static_cast<int>(names.size());
  names.push_back(name);
  ids.emplace(name, id);
  return id;
}

std::optional<int> lookup(const std::unordered_map<std::string, int>& ids,
                          const std::string& name) {
  auto it = ids.find(name);
  if (it == ids.end()) return std::nullopt;
  return it->second;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

}  // namespace

int Vocabulary::add_entity(const std::string& name) {
  return get_or_add(entity_names_, entity_ids_, name);
}
int Vocabulary::add_relation(const std::string& name) {
  return get_or_add(relation_names_, relation_ids_, name);
}
int Vocabulary::add_word(const std::string& token) {
  return get_or_add(word_names_, word_ids_, token);
}

std::optional<int> Vocabulary::entity_id(const std::string& name) const {
  return lookup(entity_ids_, name);
}
std::optional<int> Vocabulary::relation_id(const std::string& name) const {
  return lookup(relation_ids_, name);
}
std::optional<int> Vocabulary::word_id(const std::string& token) const {
  return lookup(word_ids_, token);
}

void Vocabulary::set_anchor(int entity, const std::string& token) {
  int word = add_word(token);
  auto it = anchor_map_.find(entity);
  if (it != anchor_map_.end()) {
    if (it->second != word)
      throw std::runtime_error("contradictory anchor for entity '" +
                               entity_name(entity) + "': '" +
                               word_name(it->second) + "' vs '" + token + "'");
    return;
  }
  auto mit = mention_entity_.find(word);
  if (mit != mention_entity_.end() && mit->second != entity)
    throw std::runtime_error("anchor token '" + token +
                             "' already claimed by entity '" +
                             entity_name(mit->second) + "'");
  anchor_map_.emplace(entity, word);
  mention_entity_.emplace(word, entity);
}

std::optional<int> Vocabulary::anchor_word(int entity) const {
  auto it = anchor_map_.find(entity);
  if (it == anchor_map_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocabulary::mention_entity(int word) const {
  auto it = mention_entity_.find(word);
  if (it == mention_entity_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "entities " << entity_names_.size() << "\n";
  for (const auto& n : entity_names_) out << n << "\n";
  out << "relations " << relation_names_.size() << "\n";
  for (const auto& n : relation_names_) out << n << "\n";
  out << "words " << word_names_.size() << "\n";
  for (const auto& n : word_names_) out << n << "\n";
  out << "anchors " << anchor_map_.size() << "\n";
  for (auto [e, w] : anchor_map_) out << e << "\t" << w << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  auto in = open_or_throw(path);
  Vocabulary v;
  std::string tag, line;
  std::size_t count = 0;
  auto read_section = [&](const char* expect, auto&& add) {
    in >> tag >> count;
    if (tag != expect) throw std::runtime_error("bad vocabulary file: " + path);
    std::getline(in, line);  // trailing newline
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line))
        throw std::runtime_error("truncated vocabulary file: " + path);
      add(line);
    }
  };
  read_section("entities", [&](const std::string& s) { v.add_entity(s); });
  read_section("relations", [&](const std::string& s) { v.add_relation(s); });
  read_section("words", [&](const std::string& s) { v.add_word(s); });
  in >> tag >> count;
  if (tag != "anchors") throw std::runtime_error("bad vocabulary file: " + path);
  for (std::size_t i = 0; i < count; ++i) {
    int e, w;
    in >> e >> w;
    v.set_anchor(e, v.word_name(w));
  }
  return v;
}

void TripleStore::add(int split, const Triple& t) {
  switch (split) {
    case 0:
      train_.push_back(t);
      train_set_.insert(t);
      break;
    case 1: valid_.push_back(t); break;
    case 2: test_.push_back(t); break;
    default: throw std::invalid_argument("bad split index");
  }
  all_.insert(t);
}

std::vector<std::pair<int, int>> TripleStore::relation_pairs(int r) const {
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::pair<int, int>> pairs;
  for (const auto& t : train_) {
    if (t.relation != r) continue;
    std::uint64_t key = (static_cast<std::uint64_t>(t.head) << 32) |
                        static_cast<std::uint32_t>(t.tail);
    if (seen.insert(key).second) pairs.emplace_back(t.head, t.tail);
  }
  return pairs;
}

void TripleStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  auto dump = [&](const char* tag, const std::vector<Triple>& v) {
    out << tag << " " << v.size() << "\n";
    for (const auto& t : v)
      out << t.head << "\t" << t.relation << "\t" << t.tail << "\n";
  };
  dump("train", train_);
  dump("valid", valid_);
  dump("test", test_);
}

TripleStore TripleStore::load(const std::string& path) {
  auto in = open_or_throw(path);
  TripleStore s;
  for (int split = 0; split < 3; ++split) {
    std::string tag;
    std::size_t count;
    if (!(in >> tag >> count))
      throw std::runtime_error("truncated triple store: " + path);
    for (std::size_t i = 0; i < count; ++i) {
      Triple t;
      in >> t.head >> t.relation >> t.tail;
      s.add(split, t);
    }
  }
  return s;
}

ClassificationReport classify_relations(const TripleStore& store,
                                        int num_relations) {
  if (store.train().empty())
    throw std::runtime_error("classify_relations: empty train split");
  ClassificationReport report;
  report.classes.resize(num_relations, RelationClass::OneToOne);
  for (int r = 0; r < num_relations; ++r) {
    auto pairs = store.relation_pairs(r);
    if (pairs.empty()) {
      report.unseen_relations.push_back(r);
      continue;
    }
    std::unordered_set<int> heads, tails;
    for (auto [h, t] : pairs) {
      heads.insert(h);
      tails.insert(t);
    }
    double tph = static_cast<double>(pairs.size()) / heads.size();
    double hpt = static_cast<double>(pairs.size()) / tails.size();
    bool many_tails = tph > 1.5;
    bool many_heads = hpt > 1.5;
    report.classes[r] =
        many_heads ? (many_tails ? RelationClass::ManyToMany
                                 : RelationClass::ManyToOne)
                   : (many_tails ? RelationClass::OneToMany
                                 : RelationClass::OneToOne);
  }
  return report;
}

std::vector<Triple> load_triple_file(const std::string& path, Vocabulary& vocab,
                                     bool add_new) {
  auto in = open_or_throw(path);
  std::vector<Triple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto p1 = line.find('\t');
    auto p2 = p1 == std::string::npos ? p1 : line.find('\t', p1 + 1);
    if (p2 == std::string::npos || line.find('\t', p2 + 1) != std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected head<TAB>relation<TAB>tail");
    std::string h = line.substr(0, p1);
    std::string r = line.substr(p1 + 1, p2 - p1 - 1);
    std::string t = line.substr(p2 + 1);
    if (h.empty() || r.empty() || t.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty field");
    Triple triple;
    if (add_new) {
      triple = {vocab.add_entity(h), vocab.add_relation(r), vocab.add_entity(t)};
    } else {
      auto hi = vocab.entity_id(h);
      auto ri = vocab.relation_id(r);
      auto ti = vocab.entity_id(t);
      if (!hi || !ri || !ti)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown symbol in closed-world split");
      triple = {*hi, *ri, *ti};
    }
    out.push_back(triple);
  }
  return out;
}

void load_anchor_file(const std::string& path, Vocabulary& vocab) {
  auto in = open_or_throw(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto p = line.find('\t');
    if (p == std::string::npos || line.find('\t', p + 1) != std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected entity<TAB>mention_token");
    std::string entity = line.substr(0, p);
    std::string token = line.substr(p + 1);
    if (entity.empty() || token.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": empty field");
    vocab.set_anchor(vocab.add_entity(entity), token);
  }
}

void scan_corpus_words(const std::string& path, Vocabulary& vocab) {
  auto in = open_or_throw(path);
  std::string tok;
  while (in >> tok) vocab.add_word(tok);
}

VocabularyBuild build_vocabulary(const std::vector<std::string>& triple_files,
                                 const std::string& corpus_path,
                                 const std::string& anchor_path) {
  VocabularyBuild b;
  int split = 0;
  for (const auto& path : triple_files) {
    for (const auto& t : load_triple_file(path, b.vocab))
      b.store.add(split, t);
    ++split;
  }
  if (!corpus_path.empty()) scan_corpus_words(corpus_path, b.vocab);
  if (!anchor_path.empty()) load_anchor_file(anchor_path, b.vocab);
  return b;
}

std::vector<AlignedSentence> load_aligned_corpus(const std::string& path,
                                                 const Vocabulary& vocab) {
  auto in = open_or_throw(path);
  std::vector<AlignedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
    AlignedSentence s;
    for (const auto& tok : j.at("tokens")) {
      auto w = vocab.word_id(tok.get<std::string>());
      if (!w)
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown token '" + tok.get<std::string>() +
                                 "'");
      s.tokens.push_back(*w);
    }
    s.head_pos = j.at("head_pos").get<int>();
    s.tail_pos = j.at("tail_pos").get<int>();
    auto r = vocab.relation_id(j.at("relation").get<std::string>());
    if (!r)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown relation");
    s.relation = *r;
    int n = static_cast<int>(s.tokens.size());
    if (s.head_pos < 0 || s.head_pos >= n || s.tail_pos < 0 ||
        s.tail_pos >= n || s.head_pos == s.tail_pos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad mention positions");
    auto he = vocab.mention_entity(s.tokens[s.head_pos]);
    auto te = vocab.mention_entity(s.tokens[s.tail_pos]);
    if (!he || !te)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": mention token has no anchored entity");
    s.source_pair = {*he, *te};
    out.push_back(std::move(s));
  }
  return out;
}

void save_aligned_corpus(const std::string& path,
                         const std::vector<AlignedSentence>& sentences,
                         const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& s : sentences) {
    json j;
    auto& toks = j["tokens"] = json::array();
    for (int w : s.tokens) toks.push_back(vocab.word_name(w));
    j["head_pos"] = s.head_pos;
    j["tail_pos"] = s.tail_pos;
    j["relation"] = vocab.relation_name(s.relation);
    out << j.dump() << "\n";
  }
}

}  // namespace jointkg
