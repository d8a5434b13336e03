#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace jointkg {

struct Triple {
  int head = 0;
  int relation = 0;
  int tail = 0;

  bool operator==(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const {
    std::uint64_t h = static_cast<std::uint64_t>(t.head);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t.relation);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t.tail);
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }
};

enum class RelationClass { OneToOne, OneToMany, ManyToOne, ManyToMany };

const char* relation_class_name(RelationClass c);

// Symbol universe: entities, relations, words, and the entity<->mention
// anchor map. Ids are dense and assigned in first-seen order, so construction
// from the same inputs is deterministic.
class Vocabulary {
 public:
  int add_entity(const std::string& name);
  int add_relation(const std::string& name);
  int add_word(const std::string& token);

  std::optional<int> entity_id(const std::string& name) const;
  std::optional<int> relation_id(const std::string& name) const;
  std::optional<int> word_id(const std::string& token) const;

  const std::string& entity_name(int id) const { return entity_names_.at(id); }
  const std::string& relation_name(int id) const { return relation_names_.at(id); }
  const std::string& word_name(int id) const { return word_names_.at(id); }

  int num_entities() const { return static_cast<int>(entity_names_.size()); }
  int num_relations() const { return static_cast<int>(relation_names_.size()); }
  int num_words() const { return static_cast<int>(word_names_.size()); }

  // Registers mention `token` as the anchor text of `entity`. The token is
  // added to the word vocabulary. Contradictory re-anchoring (same entity,
  // different token, or same token claimed by two entities) is an error.
  void set_anchor(int entity, const std::string& token);

  std::optional<int> anchor_word(int entity) const;
  std::optional<int> mention_entity(int word) const;
  const std::map<int, int>& anchor_map() const { return anchor_map_; }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> entity_names_, relation_names_, word_names_;
  std::unordered_map<std::string, int> entity_ids_, relation_ids_, word_ids_;
  std::map<int, int> anchor_map_;                 // entity id -> word id
  std::unordered_map<int, int> mention_entity_;   // word id -> entity id
};

// An aligned, distantly-labeled sentence: token ids, the positions of the
// head/tail entity mentions, and the relation label.
struct AlignedSentence {
  std::vector<int> tokens;
  int head_pos = 0;
  int tail_pos = 0;
  int relation = 0;
  std::pair<int, int> source_pair{0, 0};  // (head entity id, tail entity id)
};

// Train/valid/test triple splits with a membership index over their union
// (the "filtered" evaluation setting needs exact containment queries) and a
// per-relation train pair index.
class TripleStore {
 public:
  void add(int split, const Triple& t);  // split: 0 train, 1 valid, 2 test

  const std::vector<Triple>& train() const { return train_; }
  const std::vector<Triple>& valid() const { return valid_; }
  const std::vector<Triple>& test() const { return test_; }

  bool known(int h, int r, int t) const {
    return all_.count(Triple{h, r, t}) > 0;
  }
  bool in_train(const Triple& t) const { return train_set_.count(t) > 0; }

  // Distinct train-split (head, tail) pairs of relation r.
  std::vector<std::pair<int, int>> relation_pairs(int r) const;

  void save(const std::string& path) const;
  static TripleStore load(const std::string& path);

 private:
  std::vector<Triple> train_, valid_, test_;
  std::unordered_set<Triple, TripleHash> all_, train_set_;
};

struct ClassificationReport {
  std::vector<RelationClass> classes;       // indexed by relation id
  std::vector<int> unseen_relations;        // no train triples; defaulted 1-to-1
};

// Cardinality classes from train-split statistics: a side is "N" when its
// mean multiplicity exceeds 1.5 (tails per distinct head / heads per
// distinct tail, over distinct pairs).
ClassificationReport classify_relations(const TripleStore& store, int num_relations);

// ---- file ingestion ------------------------------------------------------

// `head<TAB>relation<TAB>tail`, one per line. With add_new=false, unknown
// symbols are a load error (closed-world splits).
std::vector<Triple> load_triple_file(const std::string& path, Vocabulary& vocab,
                                     bool add_new = true);

// `entity<TAB>mention_token`, one per line.
void load_anchor_file(const std::string& path, Vocabulary& vocab);

// Whitespace-tokenized plain text; every token enters the word vocabulary.
void scan_corpus_words(const std::string& path, Vocabulary& vocab);

struct VocabularyBuild {
  Vocabulary vocab;
  TripleStore store;
};

// Builds the full symbol universe: triples (train/valid/test order), then
// corpus tokens, then anchors.
VocabularyBuild build_vocabulary(const std::vector<std::string>& triple_files,
                                 const std::string& corpus_path = "",
                                 const std::string& anchor_path = "");

// JSONL aligned-sentence corpus: one object per line with fields
// tokens (array of strings), head_pos, tail_pos, relation.
std::vector<AlignedSentence> load_aligned_corpus(const std::string& path,
                                                 const Vocabulary& vocab);
void save_aligned_corpus(const std::string& path,
                         const std::vector<AlignedSentence>& sentences,
                         const Vocabulary& vocab);

}  // namespace jointkg
