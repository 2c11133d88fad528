#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "percept/common.hpp"
#include "percept/corpus.hpp"
#include "percept/psychfit.hpp"
#include "percept/syncorpus.hpp"

namespace percept {

inline constexpr const char* kVersion = "0.1.0";

struct SynthConfig {
  std::string kind = "nls";  // "nls" | "cooc"
  PerceptionScenario perception;
  StimulusSpec stimulus;
  CoocScenario cooc;
  Date start_date = make_date(2020, 3, 11);
};

struct PipelineConfig {
  uint64_t seed = 0;
  int threads = 1;

  struct Paths {
    std::string corpus;
    std::string epi;
    std::string lexicon;
    std::string exclusions;
    std::string output_dir = "out";
  } paths;

  EpiColumns epi_columns;
  MalformedPolicy on_malformed = MalformedPolicy::Skip;

  struct Scoring {
    int smoothing_window_days = 3;
    bool include_empty_docs = true;
  } scoring;

  struct Correlate {
    bool use_smoothed = false;
    bool include_cumulative = false;
  } correlate;

  struct Network {
    std::string death_category = "Death";
    std::string affect_category = "Affect";
    std::string anchor = "death*";
    int64_t default_snapshot_tweets = 1000;
    std::map<std::string, int64_t> snapshot_tweets;  // per-country override
    double min_doc_freq = 5e-3;
    bool count_contributing_only = false;
    int64_t viz_min_edge_weight = 20;
    bool death_wins_overlap = true;
  } network;

  struct Null {
    size_t ensemble_size = 100;  // J
  } null_model;

  struct Fit {
    std::string category = "Death";
    bool use_smoothed = false;
    bool apply_exclusions = true;
    bool exclusions_before_smoothing = true;
    SnapshotAlignment alignment = SnapshotAlignment::Midpoint;
  } fit;

  SynthConfig synth;

  std::string config_path;  // where this config was loaded from
};

namespace detail {

template <class T>
inline T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
  }
}

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return fp.string();
  return (base / fp).lexically_normal().string();
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "weber_fechner") return ModelKind::WeberFechner;
  if (s == "power_law" || s == "power") return ModelKind::PowerLaw;
  if (s == "linear") return ModelKind::Linear;
  throw ConfigError("config: unknown model kind '" + s + "'");
}

inline PlantedModel parse_planted_model(const nlohmann::json& j) {
  PlantedModel m;
  m.kind = parse_model_kind(get_or<std::string>(j, "kind", "weber_fechner"));
  m.sensitivity = get_or<double>(j, "sensitivity", m.sensitivity);
  m.scale = get_or<double>(j, "scale", m.scale);
  m.noise_sd = get_or<double>(j, "noise_sd", m.noise_sd);
  return m;
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir,
                                       const std::string& config_path = {}) {
  using detail::get_or;
  PipelineConfig cfg;
  cfg.config_path = config_path;
  cfg.seed = get_or<uint64_t>(j, "seed", 0);
  cfg.threads = get_or<int>(j, "threads", 1);
  if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");

  if (j.contains("paths")) {
    const auto& jp = j.at("paths");
    cfg.paths.corpus = detail::resolve_path(base_dir, get_or<std::string>(jp, "corpus", ""));
    cfg.paths.epi = detail::resolve_path(base_dir, get_or<std::string>(jp, "epi", ""));
    cfg.paths.lexicon = detail::resolve_path(base_dir, get_or<std::string>(jp, "lexicon", ""));
    cfg.paths.exclusions =
        detail::resolve_path(base_dir, get_or<std::string>(jp, "exclusions", ""));
    cfg.paths.output_dir =
        detail::resolve_path(base_dir, get_or<std::string>(jp, "output_dir", "out"));
  }

  if (j.contains("epi_columns")) {
    const auto& je = j.at("epi_columns");
    cfg.epi_columns.date = get_or<std::string>(je, "date", cfg.epi_columns.date);
    cfg.epi_columns.country = get_or<std::string>(je, "country", cfg.epi_columns.country);
    cfg.epi_columns.deaths = get_or<std::string>(je, "deaths", cfg.epi_columns.deaths);
    cfg.epi_columns.cases = get_or<std::string>(je, "cases", cfg.epi_columns.cases);
  }

  const std::string malformed = get_or<std::string>(j, "on_malformed", "skip");
  if (malformed == "skip") {
    cfg.on_malformed = MalformedPolicy::Skip;
  } else if (malformed == "abort") {
    cfg.on_malformed = MalformedPolicy::Abort;
  } else {
    throw ConfigError("config: on_malformed must be 'skip' or 'abort'");
  }

  if (j.contains("scoring")) {
    const auto& js = j.at("scoring");
    cfg.scoring.smoothing_window_days =
        get_or<int>(js, "smoothing_window_days", cfg.scoring.smoothing_window_days);
    cfg.scoring.include_empty_docs =
        get_or<bool>(js, "include_empty_docs", cfg.scoring.include_empty_docs);
    if (cfg.scoring.smoothing_window_days < 1) {
      throw ConfigError("config: scoring.smoothing_window_days must be >= 1");
    }
  }

  if (j.contains("correlate")) {
    const auto& jc = j.at("correlate");
    cfg.correlate.use_smoothed = get_or<bool>(jc, "use_smoothed", cfg.correlate.use_smoothed);
    cfg.correlate.include_cumulative =
        get_or<bool>(jc, "include_cumulative", cfg.correlate.include_cumulative);
  }

  if (j.contains("network")) {
    const auto& jn = j.at("network");
    auto& net = cfg.network;
    net.death_category = get_or<std::string>(jn, "death_category", net.death_category);
    net.affect_category = get_or<std::string>(jn, "affect_category", net.affect_category);
    net.anchor = get_or<std::string>(jn, "anchor", net.anchor);
    net.default_snapshot_tweets =
        get_or<int64_t>(jn, "default_snapshot_tweets", net.default_snapshot_tweets);
    net.min_doc_freq = get_or<double>(jn, "min_doc_freq", net.min_doc_freq);
    net.count_contributing_only =
        get_or<bool>(jn, "count_contributing_only", net.count_contributing_only);
    net.viz_min_edge_weight = get_or<int64_t>(jn, "viz_min_edge_weight", net.viz_min_edge_weight);
    net.death_wins_overlap = get_or<bool>(jn, "death_wins_overlap", net.death_wins_overlap);
    if (jn.contains("snapshot_tweets")) {
      for (const auto& [country, n] : jn.at("snapshot_tweets").items()) {
        net.snapshot_tweets[country] = n.get<int64_t>();
      }
    }
    if (net.default_snapshot_tweets < 1) {
      throw ConfigError("config: network.default_snapshot_tweets must be >= 1");
    }
    if (net.min_doc_freq < 0.0 || net.min_doc_freq > 1.0) {
      throw ConfigError("config: network.min_doc_freq must lie in [0, 1]");
    }
  }

  if (j.contains("null_model")) {
    cfg.null_model.ensemble_size =
        get_or<size_t>(j.at("null_model"), "ensemble_size", cfg.null_model.ensemble_size);
    if (cfg.null_model.ensemble_size < 1) {
      throw ConfigError("config: null_model.ensemble_size must be >= 1");
    }
  }

  if (j.contains("fit")) {
    const auto& jf = j.at("fit");
    cfg.fit.category = get_or<std::string>(jf, "category", cfg.fit.category);
    cfg.fit.use_smoothed = get_or<bool>(jf, "use_smoothed", cfg.fit.use_smoothed);
    cfg.fit.apply_exclusions = get_or<bool>(jf, "apply_exclusions", cfg.fit.apply_exclusions);
    cfg.fit.exclusions_before_smoothing =
        get_or<bool>(jf, "exclusions_before_smoothing", cfg.fit.exclusions_before_smoothing);
    const std::string align = get_or<std::string>(jf, "alignment", "midpoint");
    if (align == "midpoint") {
      cfg.fit.alignment = SnapshotAlignment::Midpoint;
    } else if (align == "start") {
      cfg.fit.alignment = SnapshotAlignment::Start;
    } else if (align == "end") {
      cfg.fit.alignment = SnapshotAlignment::End;
    } else {
      throw ConfigError("config: fit.alignment must be midpoint, start, or end");
    }
  }

  if (j.contains("synth")) {
    const auto& js = j.at("synth");
    auto& sy = cfg.synth;
    sy.kind = get_or<std::string>(js, "kind", "nls");
    if (sy.kind != "nls" && sy.kind != "cooc") {
      throw ConfigError("config: synth.kind must be 'nls' or 'cooc'");
    }
    sy.start_date = parse_date(get_or<std::string>(js, "start_date", "2020-03-11"));
    auto& sc = sy.perception;
    sc.country = get_or<std::string>(js, "country", sc.country);
    sc.lang = get_or<std::string>(js, "lang", sc.lang);
    sc.days = get_or<int>(js, "days", sc.days);
    sc.docs_per_day = get_or<int>(js, "docs_per_day", sc.docs_per_day);
    sc.min_tokens = get_or<int>(js, "min_tokens", sc.min_tokens);
    sc.max_tokens = get_or<int>(js, "max_tokens", sc.max_tokens);
    sc.target_category = get_or<std::string>(js, "target_category", sc.target_category);
    if (js.contains("model")) sc.model = detail::parse_planted_model(js.at("model"));
    if (js.contains("extra_categories")) {
      for (const auto& je : js.at("extra_categories")) {
        PlantedCategory pc;
        pc.category = je.at("category").get<std::string>();
        pc.model = detail::parse_planted_model(je.value("model", nlohmann::json::object()));
        sc.extra_categories.push_back(std::move(pc));
      }
    }
    if (js.contains("stimulus")) {
      const auto& jst = js.at("stimulus");
      const std::string kind = get_or<std::string>(jst, "kind", "exponential");
      auto& st = sy.stimulus;
      if (kind == "exponential") {
        st.kind = StimulusKind::Exponential;
      } else if (kind == "logistic") {
        st.kind = StimulusKind::Logistic;
      } else if (kind == "file") {
        st.kind = StimulusKind::File;
      } else {
        throw ConfigError("config: stimulus.kind must be exponential, logistic, or file");
      }
      st.start_value = get_or<double>(jst, "start_value", st.start_value);
      st.doubling_days = get_or<double>(jst, "doubling_days", st.doubling_days);
      st.capacity = get_or<double>(jst, "capacity", st.capacity);
      st.growth_rate = get_or<double>(jst, "growth_rate", st.growth_rate);
      st.midpoint_day = get_or<double>(jst, "midpoint_day", st.midpoint_day);
    }
    auto& cs = sy.cooc;
    cs.country = sc.country;
    cs.lang = sc.lang;
    cs.start_date = sy.start_date;
    if (js.contains("cooc")) {
      const auto& jc = js.at("cooc");
      cs.death_vocab = get_or<int>(jc, "death_vocab", cs.death_vocab);
      cs.affect_vocab = get_or<int>(jc, "affect_vocab", cs.affect_vocab);
      cs.within_rate = get_or<double>(jc, "within_rate", cs.within_rate);
      cs.cross_rate = get_or<double>(jc, "cross_rate", cs.cross_rate);
      cs.tweets_per_snapshot = get_or<int>(jc, "tweets_per_snapshot", cs.tweets_per_snapshot);
      cs.snapshots = get_or<int>(jc, "snapshots", cs.snapshots);
    }
  }

  return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse error in '" + path + "': " + e.what());
  }
  const auto base = std::filesystem::path(path).parent_path();
  return config_from_json(j, base, path);
}

}  // namespace percept
