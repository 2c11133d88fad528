#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "percept/common.hpp"

namespace percept {

struct Category {
  std::string name;
  double base_rate_percent = 0.0;
  std::vector<std::string> exact_words;
  std::vector<std::string> prefix_patterns;  // stems, stored without the '*'
};

namespace detail {

inline uint32_t decode_utf8(std::string_view s, size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](size_t k) -> uint32_t {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) & 0x3Fu : 0u;
  };
  if ((b0 >> 5) == 0x6 && i + 1 < s.size()) {
    uint32_t cp = ((b0 & 0x1Fu) << 6) | cont(1);
    i += 2;
    return cp;
  }
  if ((b0 >> 4) == 0xE && i + 2 < s.size()) {
    uint32_t cp = ((b0 & 0x0Fu) << 12) | (cont(1) << 6) | cont(2);
    i += 3;
    return cp;
  }
  if ((b0 >> 3) == 0x1E && i + 3 < s.size()) {
    uint32_t cp = ((b0 & 0x07u) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3);
    i += 4;
    return cp;
  }
  ++i;  // stray byte; pass through as-is
  return b0;
}

inline void encode_utf8(uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_space_cp(uint32_t cp) {
  if (cp == ' ' || (cp >= 0x09 && cp <= 0x0D)) return true;
  switch (cp) {
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Punctuation stripped from tokens. '#' and '_' are deliberately absent.
inline bool is_punct_cp(uint32_t cp) {
  if (cp < 0x80) {
    if (cp == '#' || cp == '_') return false;
    return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') || (cp >= '[' && cp <= '`') ||
           (cp >= '{' && cp <= '~');
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00A7:
    case 0x00AB:
    case 0x00B6:
    case 0x00B7:
    case 0x00BB:
    case 0x00BF:  // inverted question mark
      return true;
    default:
      break;
  }
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  if (cp >= 0x3001 && cp <= 0x303F) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  return false;
}

// Default case folding for ASCII, Latin-1/Extended-A, Greek, Cyrillic.
inline uint32_t fold_cp(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

inline bool starts_with_ci(std::string_view s, std::string_view lower_prefix) {
  if (s.size() < lower_prefix.size()) return false;
  for (size_t i = 0; i < lower_prefix.size(); ++i) {
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 0x20);
    if (c != lower_prefix[i]) return false;
  }
  return true;
}

inline bool is_url_chunk(std::string_view chunk) {
  return starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
         starts_with_ci(chunk, "www.");
}

inline bool is_stopword(std::string_view t) {
  switch (t.size()) {
    case 2:
      return t == "to";
    case 3:
      return t == "too" || t == "has";
    case 4:
      return t == "have" || t == "like";
    case 5:
      return t == "today";
    default:
      return false;
  }
}

}  // namespace detail

// Invokes f(std::string_view) per normalized token. The view aliases
// `scratch` and is invalidated by the next token.
template <class F>
inline void for_each_token(std::string_view text, std::string& scratch, F&& f) {
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    // find chunk boundaries on whitespace
    while (i < n) {
      size_t j = i;
      uint32_t cp = detail::decode_utf8(text, j);
      if (!detail::is_space_cp(cp)) break;
      i = j;
    }
    if (i >= n) break;
    size_t chunk_begin = i;
    while (i < n) {
      size_t j = i;
      uint32_t cp = detail::decode_utf8(text, j);
      if (detail::is_space_cp(cp)) break;
      i = j;
    }
    std::string_view chunk = text.substr(chunk_begin, i - chunk_begin);
    if (detail::is_url_chunk(chunk)) continue;
    scratch.clear();
    bool has_word_char = false;
    for (size_t k = 0; k < chunk.size();) {
      uint32_t cp = detail::decode_utf8(chunk, k);
      if (detail::is_punct_cp(cp)) continue;
      cp = detail::fold_cp(cp);
      if (cp != '#' && cp != '_') has_word_char = true;
      detail::encode_utf8(cp, scratch);
    }
    if (scratch.empty() || !has_word_char) continue;
    if (detail::is_stopword(scratch)) continue;
    f(std::string_view(scratch));
  }
}

// Lowercases, removes URLs and punctuation (keeping '#' and '_'), drops the
// fixed stopword set; order and duplicates preserved.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string scratch;
  for_each_token(text, scratch, [&](std::string_view t) { out.emplace_back(t); });
  return out;
}

// Byte-wise trie over exact words and prefix stems. A prefix pattern matches
// every token it prefixes; an exact word must consume the whole token.
class PatternTrie {
 public:
  struct Pattern {
    std::string representative;       // "care" or "death*"
    bool is_prefix = false;
    std::vector<uint16_t> categories; // sorted, unique
  };

  void add(std::string_view key, bool is_prefix, uint16_t category) {
    if (key.empty()) throw DataError("empty lexicon pattern");
    auto it = index_.find(make_key(key, is_prefix));
    int32_t pat;
    if (it != index_.end()) {
      pat = it->second;
    } else {
      pat = static_cast<int32_t>(patterns_.size());
      Pattern p;
      p.representative = std::string(key);
      if (is_prefix) p.representative.push_back('*');
      p.is_prefix = is_prefix;
      patterns_.push_back(std::move(p));
      index_.emplace(make_key(key, is_prefix), pat);
      int32_t node = 0;
      if (nodes_.empty()) nodes_.emplace_back();
      for (unsigned char c : key) {
        int32_t& next = nodes_[static_cast<size_t>(node)].child[c];
        if (next < 0) {
          next = static_cast<int32_t>(nodes_.size());
          nodes_.emplace_back();
        }
        node = next;
      }
      if (is_prefix) {
        nodes_[static_cast<size_t>(node)].prefix_pattern = pat;
      } else {
        nodes_[static_cast<size_t>(node)].exact_pattern = pat;
      }
    }
    auto& cats = patterns_[static_cast<size_t>(pat)].categories;
    if (std::find(cats.begin(), cats.end(), category) == cats.end()) cats.push_back(category);
  }

  void finalize() {
    for (auto& p : patterns_) std::sort(p.categories.begin(), p.categories.end());
  }

  size_t pattern_count() const { return patterns_.size(); }
  const Pattern& pattern(int32_t id) const { return patterns_[static_cast<size_t>(id)]; }

  // Calls f(pattern_id) for every pattern matching `token`.
  template <class F>
  void visit_matches(std::string_view token, F&& f) const {
    if (nodes_.empty()) return;
    int32_t node = 0;
    for (unsigned char c : token) {
      node = nodes_[static_cast<size_t>(node)].child[c];
      if (node < 0) return;
      const int32_t pp = nodes_[static_cast<size_t>(node)].prefix_pattern;
      if (pp >= 0) f(pp);
    }
    const int32_t ep = nodes_[static_cast<size_t>(node)].exact_pattern;
    if (ep >= 0) f(ep);
  }

  // Exact word beats any prefix; among prefixes the longest wins. -1 if none.
  int32_t winning_pattern(std::string_view token) const {
    if (nodes_.empty()) return -1;
    int32_t node = 0;
    int32_t deepest_prefix = -1;
    for (unsigned char c : token) {
      node = nodes_[static_cast<size_t>(node)].child[c];
      if (node < 0) return deepest_prefix;
      const int32_t pp = nodes_[static_cast<size_t>(node)].prefix_pattern;
      if (pp >= 0) deepest_prefix = pp;
    }
    const int32_t ep = nodes_[static_cast<size_t>(node)].exact_pattern;
    return ep >= 0 ? ep : deepest_prefix;
  }

 private:
  struct Node {
    int32_t child[256];
    int32_t exact_pattern = -1;
    int32_t prefix_pattern = -1;
    Node() { std::fill(std::begin(child), std::end(child), -1); }
  };

  static std::string make_key(std::string_view key, bool is_prefix) {
    std::string k(key);
    k.push_back(is_prefix ? '*' : '=');
    return k;
  }

  std::vector<Node> nodes_;
  std::vector<Pattern> patterns_;
  std::unordered_map<std::string, int32_t> index_;
};

struct TokenClass {
  bool matched = false;
  std::string representative;
  std::vector<std::string> categories;  // categories of the winning pattern
};

class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::string language, std::vector<Category> categories)
      : language_(std::move(language)), categories_(std::move(categories)) {
    validate_and_compile();
  }

  const std::string& language() const { return language_; }
  const std::vector<Category>& categories() const { return categories_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const PatternTrie& matcher() const { return *trie_; }

  size_t category_count() const { return categories_.size(); }
  const std::string& category_name(uint16_t id) const { return categories_[id].name; }
  double base_rate(uint16_t id) const { return categories_[id].base_rate_percent; }

  int category_index(std::string_view name) const {
    for (size_t i = 0; i < categories_.size(); ++i) {
      if (categories_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

 private:
  void validate_and_compile() {
    auto trie = std::make_shared<PatternTrie>();
    std::unordered_map<std::string, int> seen;
    for (size_t ci = 0; ci < categories_.size(); ++ci) {
      auto& cat = categories_[ci];
      if (cat.name.empty()) throw DataError("lexicon: category with empty name");
      if (++seen[cat.name] > 1) throw DataError("lexicon: duplicate category '" + cat.name + "'");
      if (!(cat.base_rate_percent > 0.0) || cat.base_rate_percent > 100.0) {
        throw DataError("lexicon: category '" + cat.name + "' base_rate_percent " +
                        std::to_string(cat.base_rate_percent) + " outside (0, 100]");
      }
      auto dedupe = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      };
      dedupe(cat.exact_words);
      dedupe(cat.prefix_patterns);
      if (cat.exact_words.empty() && cat.prefix_patterns.empty()) {
        warnings_.push_back("lexicon: category '" + cat.name + "' has no words");
      }
      for (const auto& w : cat.exact_words) {
        if (w.empty()) throw DataError("lexicon: empty word in category '" + cat.name + "'");
        trie->add(w, false, static_cast<uint16_t>(ci));
      }
      for (const auto& p : cat.prefix_patterns) {
        if (p.empty()) throw DataError("lexicon: empty pattern in category '" + cat.name + "'");
        trie->add(p, true, static_cast<uint16_t>(ci));
      }
    }
    trie->finalize();
    trie_ = std::move(trie);
  }

  std::string language_;
  std::vector<Category> categories_;
  std::vector<std::string> warnings_;
  std::shared_ptr<const PatternTrie> trie_;
};

// Categories whose word set matches the token (union over all patterns).
inline std::vector<std::string> match_token(const Lexicon& lex, std::string_view token) {
  std::vector<uint16_t> ids;
  lex.matcher().visit_matches(token, [&](int32_t pat) {
    for (uint16_t c : lex.matcher().pattern(pat).categories) ids.push_back(c);
  });
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (uint16_t c : ids) out.push_back(lex.category_name(c));
  return out;
}

inline TokenClass token_class(const Lexicon& lex, std::string_view token) {
  TokenClass tc;
  const int32_t win = lex.matcher().winning_pattern(token);
  if (win < 0) return tc;
  const auto& pat = lex.matcher().pattern(win);
  tc.matched = true;
  tc.representative = pat.representative;
  for (uint16_t c : pat.categories) tc.categories.push_back(lex.category_name(c));
  return tc;
}

inline Lexicon lexicon_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("categories") || !j["categories"].is_array()) {
    throw DataError("lexicon: expected object with a 'categories' array");
  }
  std::string language = j.value("language", std::string("und"));
  std::vector<Category> cats;
  for (const auto& jc : j["categories"]) {
    Category cat;
    cat.name = jc.value("name", std::string());
    if (cat.name.empty()) throw DataError("lexicon: category missing 'name'");
    if (!jc.contains("base_rate_percent") || !jc["base_rate_percent"].is_number()) {
      throw DataError("lexicon: category '" + cat.name + "' missing base_rate_percent");
    }
    cat.base_rate_percent = jc["base_rate_percent"].get<double>();
    if (!jc.contains("words") || !jc["words"].is_array()) {
      throw DataError("lexicon: category '" + cat.name + "' missing 'words' array");
    }
    for (const auto& jw : jc["words"]) {
      std::string w = jw.get<std::string>();
      if (w.empty()) throw DataError("lexicon: empty word in category '" + cat.name + "'");
      if (w.back() == '*') {
        w.pop_back();
        if (w.empty()) throw DataError("lexicon: bare '*' in category '" + cat.name + "'");
        cat.prefix_patterns.push_back(std::move(w));
      } else {
        cat.exact_words.push_back(std::move(w));
      }
    }
    cats.push_back(std::move(cat));
  }
  return Lexicon(std::move(language), std::move(cats));
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("lexicon: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("lexicon: parse error in '" + path + "': " + e.what());
  }
  return lexicon_from_json(j);
}

// Audit dump of the compiled pattern table, one pattern per line.
inline void dump_pattern_table(const Lexicon& lex, std::ostream& os) {
  const auto& trie = lex.matcher();
  std::vector<std::string> lines;
  for (size_t i = 0; i < trie.pattern_count(); ++i) {
    const auto& p = trie.pattern(static_cast<int32_t>(i));
    std::string line = p.representative;
    line += p.is_prefix ? "\tprefix\t" : "\texact\t";
    for (size_t k = 0; k < p.categories.size(); ++k) {
      if (k) line += '|';
      line += lex.category_name(p.categories[k]);
    }
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) os << l << '\n';
}

}  // namespace percept
