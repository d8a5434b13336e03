#include "jointkg/aligner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace jointkg {

using nlohmann::json;

namespace {

void tokenize_plain(const std::string& text, std::vector<std::string>& out) {
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c) && c != '_' && c != '\'') {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(c));
    }
  }
  flush();
}

std::string mention_token_for(const std::string& span_text) {
  std::string tok = span_text;
  for (char& c : tok)
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  return tok;
}

}  // namespace

MarkedSentence tokenize_with_anchors(const RawRecord& record,
                                     Vocabulary& vocab) {
  auto anchors = record.anchors;
  std::sort(anchors.begin(), anchors.end(),
            [](const AnchorSpan& a, const AnchorSpan& b) {
              return a.start < b.start;
            });
  int text_len = static_cast<int>(record.text.size());
  int prev_end = 0;
  for (const auto& a : anchors) {
    if (a.start < 0 || a.end > text_len || a.start >= a.end)
      throw std::runtime_error("anchor span [" + std::to_string(a.start) + "," +
                               std::to_string(a.end) + ") out of range");
    if (a.start < prev_end)
      throw std::runtime_error("overlapping anchor spans at offset " +
                               std::to_string(a.start));
    prev_end = a.end;
  }

  MarkedSentence out;
  std::vector<std::string> plain;
  int cursor = 0;
  for (const auto& a : anchors) {
    plain.clear();
    tokenize_plain(record.text.substr(cursor, a.start - cursor), plain);
    for (auto& t : plain) out.tokens.push_back(vocab.add_word(t));

    int entity = vocab.add_entity(a.entity);
    auto word = vocab.anchor_word(entity);
    if (!word) {
      vocab.set_anchor(entity,
                       mention_token_for(record.text.substr(
                           a.start, a.end - a.start)));
      word = vocab.anchor_word(entity);
    }
    out.mentions.emplace_back(static_cast<int>(out.tokens.size()), entity);
    out.tokens.push_back(*word);
    cursor = a.end;
  }
  plain.clear();
  tokenize_plain(record.text.substr(cursor), plain);
  for (auto& t : plain) out.tokens.push_back(vocab.add_word(t));
  return out;
}

std::vector<RawRecord> load_raw_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<RawRecord> out;
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
    RawRecord r;
    r.text = j.at("text").get<std::string>();
    if (j.contains("anchors")) {
      for (const auto& a : j["anchors"]) {
        AnchorSpan span;
        span.start = a.at("start").get<int>();
        span.end = a.at("end").get<int>();
        span.entity = a.at("entity").get<std::string>();
        r.anchors.push_back(std::move(span));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

AlignResult distant_label(const std::vector<MarkedSentence>& sentences,
                          const TripleStore& store, const Vocabulary& vocab) {
  // (h, t) -> relations holding between them in the train split
  std::unordered_map<std::uint64_t, std::vector<int>> pair_relations;
  for (const auto& t : store.train()) {
    std::uint64_t key = (static_cast<std::uint64_t>(t.head) << 32) |
                        static_cast<std::uint32_t>(t.tail);
    auto& rels = pair_relations[key];
    if (std::find(rels.begin(), rels.end(), t.relation) == rels.end())
      rels.push_back(t.relation);
  }

  AlignResult result;
  std::unordered_set<Triple, TripleHash> triples_seen;
  std::unordered_set<int> relations_seen, entities_seen;
  for (const auto& sent : sentences) {
    ++result.stats.input_sentences;
    bool labeled = false;
    for (std::size_t a = 0; a < sent.mentions.size(); ++a) {
      for (std::size_t b = 0; b < sent.mentions.size(); ++b) {
        if (a == b) continue;
        auto [hpos, h] = sent.mentions[a];
        auto [tpos, t] = sent.mentions[b];
        std::uint64_t key = (static_cast<std::uint64_t>(h) << 32) |
                            static_cast<std::uint32_t>(t);
        auto it = pair_relations.find(key);
        if (it == pair_relations.end()) continue;
        for (int r : it->second) {
          AlignedSentence s;
          s.tokens = sent.tokens;
          s.head_pos = hpos;
          s.tail_pos = tpos;
          s.relation = r;
          s.source_pair = {h, t};
          result.sentences.push_back(std::move(s));
          labeled = true;
          ++result.stats.records;
          triples_seen.insert(Triple{h, r, t});
          relations_seen.insert(r);
          entities_seen.insert(h);
          entities_seen.insert(t);
        }
      }
    }
    if (labeled) ++result.stats.labeled_sentences;
  }
  (void)vocab;
  result.stats.distinct_triples = static_cast<std::int64_t>(triples_seen.size());
  result.stats.distinct_relations =
      static_cast<std::int64_t>(relations_seen.size());
  result.stats.distinct_entities =
      static_cast<std::int64_t>(entities_seen.size());
  return result;
}

}  // namespace jointkg
