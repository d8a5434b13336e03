#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jointkg/vocab.hpp"

namespace jointkg {

struct AnchorSpan {
  int start = 0;  // character offsets, [start, end)
  int end = 0;
  std::string entity;
};

struct RawRecord {
  std::string text;
  std::vector<AnchorSpan> anchors;
};

// Tokenized sentence with resolved entity mentions: (token index, entity id).
struct MarkedSentence {
  std::vector<int> tokens;
  std::vector<std::pair<int, int>> mentions;
};

// Collapses each anchored span to a single mention token (registered in the
// vocabulary's anchor map) and tokenizes everything else on whitespace and
// punctuation. Overlapping spans are an error.
MarkedSentence tokenize_with_anchors(const RawRecord& record, Vocabulary& vocab);

// JSONL: {"text": ..., "anchors": [{"start":, "end":, "entity":}, ...]}
std::vector<RawRecord> load_raw_corpus(const std::string& path);

struct AlignStats {
  std::int64_t input_sentences = 0;
  std::int64_t labeled_sentences = 0;  // sentences emitting >= 1 record
  std::int64_t records = 0;
  std::int64_t distinct_triples = 0;
  std::int64_t distinct_relations = 0;
  std::int64_t distinct_entities = 0;
};

struct AlignResult {
  std::vector<AlignedSentence> sentences;
  AlignStats stats;
};

// Distant supervision against the train split: every ordered mention pair
// (h, t) with (h, r, t) in train emits one AlignedSentence per matching r.
AlignResult distant_label(const std::vector<MarkedSentence>& sentences,
                          const TripleStore& store, const Vocabulary& vocab);

}  // namespace jointkg
