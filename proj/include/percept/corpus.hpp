#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "percept/csv.hpp"
#include "percept/date.hpp"
#include "percept/series.hpp"

namespace percept {

struct RawDocument {
  std::string id;
  Date date{};
  std::string country;  // ISO 3166-1 alpha-2
  std::string lang;     // BCP-47
  std::string text;
};

enum class MalformedPolicy { Skip, Abort };

struct IngestReport {
  size_t loaded = 0;
  size_t skipped = 0;
  std::vector<std::pair<size_t, std::string>> errors;  // (line number, message)
};

// Streaming JSONL reader; sink(RawDocument&&) per record.
template <class Sink>
inline IngestReport load_documents(std::istream& in, Sink&& sink,
                                   MalformedPolicy policy = MalformedPolicy::Skip) {
  IngestReport report;
  std::string line;
  size_t lineno = 0;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string err;
    RawDocument doc;
    try {
      const auto j = nlohmann::json::parse(line);
      doc.id = j.at("id").get<std::string>();
      doc.country = j.at("country").get<std::string>();
      doc.lang = j.at("lang").get<std::string>();
      doc.text = j.at("text").get<std::string>();
      doc.date = parse_date(j.at("timestamp").get<std::string>());
      if (doc.id.empty()) {
        err = "empty id";
      } else if (!seen_ids.insert(doc.id).second) {
        err = "duplicate id '" + doc.id + "'";
      }
    } catch (const std::exception& e) {
      err = e.what();
    }
    if (!err.empty()) {
      if (policy == MalformedPolicy::Abort) {
        throw DataError("documents line " + std::to_string(lineno) + ": " + err);
      }
      ++report.skipped;
      report.errors.emplace_back(lineno, err);
      continue;
    }
    ++report.loaded;
    sink(std::move(doc));
  }
  return report;
}

inline std::vector<RawDocument> load_documents(const std::string& path,
                                               MalformedPolicy policy = MalformedPolicy::Skip,
                                               IngestReport* report_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("documents: cannot open '" + path + "'");
  std::vector<RawDocument> docs;
  auto report = load_documents(in, [&](RawDocument&& d) { docs.push_back(std::move(d)); }, policy);
  if (report_out) *report_out = std::move(report);
  return docs;
}

inline void write_document(std::ostream& os, const RawDocument& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["timestamp"] = to_string(doc.date);
  j["country"] = doc.country;
  j["lang"] = doc.lang;
  j["text"] = doc.text;
  os << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Epidemiological series

struct EpiSeries {
  std::string country;
  DailySeries deaths;
  DailySeries cases;
  size_t negative_deaths = 0;  // negative reported values are kept, only flagged
  size_t negative_cases = 0;
};

struct EpiColumns {
  std::string date = "date";
  std::string country = "iso_code";
  std::string deaths = "new_deaths";
  std::string cases = "new_cases";
};

inline std::map<std::string, EpiSeries> load_epi(std::istream& in,
                                                 const EpiColumns& cols = {}) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw DataError("epi: empty file");
  auto col = [&](const std::string& name) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i] == name) return i;
    }
    throw DataError("epi: required column '" + name + "' not found");
  };
  const size_t ci_date = col(cols.date);
  const size_t ci_country = col(cols.country);
  const size_t ci_deaths = col(cols.deaths);
  const size_t ci_cases = col(cols.cases);
  const size_t width = std::max({ci_date, ci_country, ci_deaths, ci_cases}) + 1;

  struct Obs {
    double deaths, cases;
  };
  std::map<std::string, std::map<Date, Obs>> by_country;
  while (reader.next_row(row)) {
    if (row.size() < width) {
      throw DataError("epi: short row at line " + std::to_string(reader.line()));
    }
    double deaths, cases;
    if (!parse_double(row[ci_deaths], deaths) || !parse_double(row[ci_cases], cases)) {
      throw DataError("epi: unparseable number at line " + std::to_string(reader.line()));
    }
    const Date d = parse_date(row[ci_date]);
    by_country[row[ci_country]][d] = Obs{deaths, cases};  // last row wins on duplicates
  }

  std::map<std::string, EpiSeries> out;
  for (auto& [country, obs] : by_country) {
    EpiSeries s;
    s.country = country;
    const Date start = obs.begin()->first;
    const Date end = obs.rbegin()->first;
    const auto n = static_cast<size_t>(end - start) + 1;
    s.deaths = DailySeries{start, std::vector<double>(n, kMissing)};
    s.cases = DailySeries{start, std::vector<double>(n, kMissing)};
    for (const auto& [d, o] : obs) {
      const auto i = static_cast<size_t>(d - start);
      s.deaths.values[i] = o.deaths;
      s.cases.values[i] = o.cases;
      if (!is_missing(o.deaths) && o.deaths < 0) ++s.negative_deaths;
      if (!is_missing(o.cases) && o.cases < 0) ++s.negative_cases;
    }
    out.emplace(country, std::move(s));
  }
  return out;
}

inline std::map<std::string, EpiSeries> load_epi(const std::string& path,
                                                 const EpiColumns& cols = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("epi: cannot open '" + path + "'");
  return load_epi(in, cols);
}

// Normalized form: fixed column order, one row per (country, day), missing
// values as empty fields. load -> write -> load is a fixed point.
inline void write_epi_csv(std::ostream& os, const std::map<std::string, EpiSeries>& series) {
  os << "date,iso_code,new_deaths,new_cases\n";
  for (const auto& [country, s] : series) {
    for (size_t i = 0; i < s.deaths.size(); ++i) {
      write_csv_row(os, {to_string(s.deaths.date_at(i)), country, format_double(s.deaths[i]),
                         format_double(s.cases[i])});
    }
  }
}

// ---------------------------------------------------------------------------
// Exclusion windows

struct ExclusionWindow {
  std::string country;
  Date start{};
  Date end{};
  std::string kind;  // NLS category name, or "epi"
  std::string note;
};

inline std::vector<ExclusionWindow> exclusions_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("windows") || !j["windows"].is_array()) {
    throw DataError("exclusions: expected object with a 'windows' array");
  }
  std::vector<ExclusionWindow> out;
  for (const auto& jw : j["windows"]) {
    ExclusionWindow w;
    w.country = jw.at("country").get<std::string>();
    w.start = parse_date(jw.at("start").get<std::string>());
    w.end = parse_date(jw.at("end").get<std::string>());
    w.kind = jw.at("kind").get<std::string>();
    w.note = jw.value("note", std::string());
    if (w.end < w.start) {
      throw DataError("exclusions: window for " + w.country + " has end before start");
    }
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<ExclusionWindow> load_exclusions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("exclusions: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("exclusions: parse error in '" + path + "': " + e.what());
  }
  return exclusions_from_json(j);
}

struct ExclusionReport {
  size_t removed = 0;               // values newly marked missing
  size_t out_of_range_windows = 0;  // matched windows not overlapping the series
};

// Marks values inside matching windows missing. Windows for other countries
// or kinds are ignored; matching windows outside the span are warned-counted.
inline ExclusionReport apply_exclusions(DailySeries& series,
                                        std::span<const ExclusionWindow> windows,
                                        std::string_view country, std::string_view kind) {
  ExclusionReport report;
  if (series.empty()) return report;
  for (const auto& w : windows) {
    if (w.country != country || w.kind != kind) continue;
    if (w.end < series.start || w.start > series.end_date()) {
      ++report.out_of_range_windows;
      continue;
    }
    const Date lo = std::max(w.start, series.start);
    const Date hi = std::min(w.end, series.end_date());
    for (Date d = lo; d <= hi; ++d) {
      auto& v = series.values[static_cast<size_t>(d - series.start)];
      if (!is_missing(v)) {
        v = kMissing;
        ++report.removed;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Grouping

struct SliceKey {
  std::string country;
  Date date{};
  auto operator<=>(const SliceKey&) const = default;
};

struct CorpusSlice {
  std::vector<size_t> doc_indices;  // indices into the ingested document vector
};

// Every document lands in exactly one slice; slice sizes sum to the input.
inline std::map<SliceKey, CorpusSlice> group_documents(std::span<const RawDocument> docs) {
  std::map<SliceKey, CorpusSlice> out;
  for (size_t i = 0; i < docs.size(); ++i) {
    out[SliceKey{docs[i].country, docs[i].date}].doc_indices.push_back(i);
  }
  return out;
}

}  // namespace percept
