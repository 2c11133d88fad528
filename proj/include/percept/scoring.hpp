#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "percept/corpus.hpp"
#include "percept/csv.hpp"
#include "percept/lexicon.hpp"
#include "percept/parallel.hpp"
#include "percept/series.hpp"
#include "percept/stats.hpp"

namespace percept {

struct DocScoreVector {
  std::string doc_id;
  std::vector<double> percent;  // per lexicon category, 100 * matched / tokens
  size_t token_count = 0;
  bool empty = false;  // zero tokens; scores are all zero by definition
};

// Reusable per-thread state for the hot scoring path.
class DocScorer {
 public:
  explicit DocScorer(const Lexicon& lex)
      : lex_(&lex),
        counts_(lex.category_count(), 0),
        stamp_(lex.category_count(), 0) {}

  // Tokenizes `text` and fills per-category occurrence counts. A token
  // occurrence counts at most once per category. Returns the token count.
  size_t count_categories(std::string_view text, std::span<int64_t> out_counts) {
    const auto ncat = lex_->category_count();
    std::fill(counts_.begin(), counts_.end(), 0);
    size_t tokens = 0;
    const PatternTrie& trie = lex_->matcher();
    for_each_token(text, scratch_, [&](std::string_view tok) {
      ++tokens;
      ++serial_;
      trie.visit_matches(tok, [&](int32_t pat) {
        for (uint16_t c : trie.pattern(pat).categories) {
          if (stamp_[c] != serial_) {
            stamp_[c] = serial_;
            ++counts_[c];
          }
        }
      });
    });
    for (size_t c = 0; c < ncat; ++c) out_counts[c] = counts_[c];
    return tokens;
  }

 private:
  const Lexicon* lex_;
  std::string scratch_;
  std::vector<int64_t> counts_;
  std::vector<uint64_t> stamp_;
  uint64_t serial_ = 0;
};

// Spec'd single-document entry point over pre-normalized tokens.
inline DocScoreVector score_document(const Lexicon& lex, std::span<const std::string> tokens,
                                     std::string doc_id = {}) {
  DocScoreVector out;
  out.doc_id = std::move(doc_id);
  out.token_count = tokens.size();
  out.percent.assign(lex.category_count(), 0.0);
  if (tokens.empty()) {
    out.empty = true;
    return out;
  }
  std::vector<int64_t> counts(lex.category_count(), 0);
  std::vector<uint64_t> stamp(lex.category_count(), 0);
  uint64_t serial = 0;
  const PatternTrie& trie = lex.matcher();
  for (const auto& tok : tokens) {
    ++serial;
    trie.visit_matches(tok, [&](int32_t pat) {
      for (uint16_t c : trie.pattern(pat).categories) {
        if (stamp[c] != serial) {
          stamp[c] = serial;
          ++counts[c];
        }
      }
    });
  }
  for (size_t c = 0; c < lex.category_count(); ++c) {
    out.percent[c] = 100.0 * static_cast<double>(counts[c]) / static_cast<double>(tokens.size());
  }
  return out;
}

// National Linguistic Score for one slice and category:
// 100 * mean over documents of (score - base) / base. Missing on empty input.
inline double nls(std::span<const double> doc_scores, double base_rate) {
  if (!(base_rate > 0.0)) throw InternalError("nls: base rate must be positive");
  if (doc_scores.empty()) return kMissing;
  KahanSum s;
  for (double v : doc_scores) s.add((v - base_rate) / base_rate);
  return 100.0 * s.value() / static_cast<double>(doc_scores.size());
}

struct NLSSeries {
  std::string country;
  std::string category;
  DailySeries values;           // percent-change units; missing where no docs
  std::vector<int64_t> n_docs;  // same length as values
};

using NLSKey = std::pair<std::string, std::string>;  // (country, category)

struct ScoringOptions {
  bool include_empty_docs = true;  // empty docs score 0 and enter the mean
  int threads = 1;
};

// Groups documents by (country, day) and reduces per-category NLS series.
// Slices are independent work items, so any thread count yields identical
// results; within a slice documents are reduced in ingestion order.
inline std::map<NLSKey, NLSSeries> compute_nls(std::span<const RawDocument> docs,
                                               const Lexicon& lex,
                                               const ScoringOptions& opts = {}) {
  const size_t ncat = lex.category_count();
  const auto groups = group_documents(docs);

  struct SliceTask {
    const SliceKey* key;
    const CorpusSlice* slice;
    std::vector<double> nls_values;  // per category
    int64_t n_docs = 0;
  };
  std::vector<SliceTask> tasks;
  tasks.reserve(groups.size());
  for (const auto& [key, slice] : groups) tasks.push_back({&key, &slice, {}, 0});

  const int threads = std::max(1, opts.threads);
  std::vector<DocScorer> scorers;
  scorers.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) scorers.emplace_back(lex);

  parallel_for_index(tasks.size(), threads, [&](size_t ti, int worker) {
    DocScorer& scorer = scorers[static_cast<size_t>(worker)];
    auto& task = tasks[ti];
    std::vector<KahanSum> sums(ncat);
    std::vector<int64_t> counts(ncat);
    int64_t used = 0;
    for (size_t di : task.slice->doc_indices) {
      const size_t tokens = scorer.count_categories(docs[di].text, counts);
      if (tokens == 0 && !opts.include_empty_docs) continue;
      ++used;
      for (size_t c = 0; c < ncat; ++c) {
        const double score =
            tokens == 0 ? 0.0
                        : 100.0 * static_cast<double>(counts[c]) / static_cast<double>(tokens);
        sums[c].add((score - lex.base_rate(static_cast<uint16_t>(c))) /
                    lex.base_rate(static_cast<uint16_t>(c)));
      }
    }
    task.n_docs = used;
    task.nls_values.assign(ncat, kMissing);
    if (used > 0) {
      for (size_t c = 0; c < ncat; ++c) {
        task.nls_values[c] = 100.0 * sums[c].value() / static_cast<double>(used);
      }
    }
  });

  // assemble contiguous per-country series
  std::map<std::string, std::pair<Date, Date>> spans;
  for (const auto& t : tasks) {
    auto [it, fresh] = spans.emplace(t.key->country, std::make_pair(t.key->date, t.key->date));
    if (!fresh) {
      it->second.first = std::min(it->second.first, t.key->date);
      it->second.second = std::max(it->second.second, t.key->date);
    }
  }
  std::map<NLSKey, NLSSeries> out;
  for (const auto& [country, span] : spans) {
    const auto n = static_cast<size_t>(span.second - span.first) + 1;
    for (size_t c = 0; c < ncat; ++c) {
      NLSSeries s;
      s.country = country;
      s.category = lex.category_name(static_cast<uint16_t>(c));
      s.values = DailySeries{span.first, std::vector<double>(n, kMissing)};
      s.n_docs.assign(n, 0);
      out.emplace(NLSKey{country, s.category}, std::move(s));
    }
  }
  for (const auto& t : tasks) {
    for (size_t c = 0; c < ncat; ++c) {
      auto& s = out.at(NLSKey{t.key->country, lex.category_name(static_cast<uint16_t>(c))});
      const auto i = static_cast<size_t>(t.key->date - s.values.start);
      s.values.values[i] = t.nls_values[c];
      s.n_docs[i] = t.n_docs;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Series transforms

// Centered moving average; the window shrinks at the boundaries and missing
// values are skipped. A position with an all-missing window stays missing.
inline DailySeries moving_average(const DailySeries& series, int window_days) {
  if (window_days < 1) throw InternalError("moving_average: window must be >= 1");
  DailySeries out = series;
  if (window_days == 1) return out;
  const auto n = static_cast<ptrdiff_t>(series.size());
  const ptrdiff_t before = (window_days - 1) / 2;
  const ptrdiff_t after = window_days / 2;
  for (ptrdiff_t i = 0; i < n; ++i) {
    KahanSum sum;
    size_t count = 0;
    for (ptrdiff_t j = std::max<ptrdiff_t>(0, i - before); j <= std::min(n - 1, i + after); ++j) {
      const double v = series.values[static_cast<size_t>(j)];
      if (is_missing(v)) continue;
      sum.add(v);
      ++count;
    }
    out.values[static_cast<size_t>(i)] =
        count == 0 ? kMissing : sum.value() / static_cast<double>(count);
  }
  return out;
}

// Standardizes non-missing entries to mean 0, sample sd 1.
inline DailySeries zscore(const DailySeries& series, std::string_view label = "series") {
  std::vector<double> present;
  present.reserve(series.size());
  for (double v : series.values) {
    if (!is_missing(v)) present.push_back(v);
  }
  if (present.size() < 2) {
    throw DataError("zscore: '" + std::string(label) + "' has fewer than 2 values");
  }
  const double mu = mean(present);
  const double sd = std::sqrt(sample_variance(present));
  if (!(sd > 0.0)) {
    throw DataError("zscore: '" + std::string(label) + "' has zero variance");
  }
  DailySeries out = series;
  for (auto& v : out.values) {
    if (!is_missing(v)) v = (v - mu) / sd;
  }
  return out;
}

// Sample Pearson correlation over dates where both series are present.
inline PearsonResult pearson(const DailySeries& x, const DailySeries& y) {
  const auto pairs = aligned_pairs(x, y);
  return pearson_pairs(pairs);
}

// ---------------------------------------------------------------------------
// NLS CSV round trip

inline void write_nls_csv(std::ostream& os, const std::map<NLSKey, NLSSeries>& series) {
  os << "country,category,date,value,n_docs\n";
  for (const auto& [key, s] : series) {
    for (size_t i = 0; i < s.values.size(); ++i) {
      write_csv_row(os, {s.country, s.category, to_string(s.values.date_at(i)),
                         format_double(s.values[i]), std::to_string(s.n_docs[i])});
    }
  }
}

inline std::map<NLSKey, NLSSeries> read_nls_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) ||
      row != std::vector<std::string>{"country", "category", "date", "value", "n_docs"}) {
    throw DataError("nls csv: unexpected header");
  }
  struct Entry {
    Date date;
    double value;
    int64_t n_docs;
  };
  std::map<NLSKey, std::vector<Entry>> grouped;
  while (reader.next_row(row)) {
    if (row.size() != 5) throw DataError("nls csv: short row at line " + std::to_string(reader.line()));
    double v;
    if (!parse_double(row[3], v)) throw DataError("nls csv: bad value at line " + std::to_string(reader.line()));
    grouped[{row[0], row[1]}].push_back({parse_date(row[2]), v, std::stoll(row[4])});
  }
  std::map<NLSKey, NLSSeries> out;
  for (auto& [key, entries] : grouped) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.date < b.date; });
    NLSSeries s;
    s.country = key.first;
    s.category = key.second;
    const Date start = entries.front().date;
    const auto n = static_cast<size_t>(entries.back().date - start) + 1;
    s.values = DailySeries{start, std::vector<double>(n, kMissing)};
    s.n_docs.assign(n, 0);
    for (const auto& e : entries) {
      const auto i = static_cast<size_t>(e.date - start);
      s.values.values[i] = e.value;
      s.n_docs[i] = e.n_docs;
    }
    out.emplace(key, std::move(s));
  }
  return out;
}

}  // namespace percept
