#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/config.hpp"
#include "percept/corpus.hpp"
#include "percept/csv.hpp"
#include "percept/lexicon.hpp"
#include "percept/nullnet.hpp"
#include "percept/psychfit.hpp"
#include "percept/scoring.hpp"
#include "percept/semnet.hpp"
#include "percept/syncorpus.hpp"

namespace percept {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Artifact plumbing

// All artifacts are written temp-then-rename so a crashed run never leaves a
// half-written file behind.
template <class WriteFn>
inline void atomic_write(const fs::path& path, WriteFn&& write_fn) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write '" + tmp.string() + "'");
    write_fn(os);
    os.flush();
    if (!os) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline std::string file_hash_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "absent";
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

inline void require_artifact(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw DataError("missing upstream artifact '" + path.string() + "' — run `percept " +
                    producer + "` first");
  }
}

// Machine-readable run record: inputs, config hash, seed, version. No
// timestamps, so identical runs produce identical manifests.
inline void write_manifest(const PipelineConfig& cfg, const std::string& subcommand,
                           const std::vector<std::pair<std::string, fs::path>>& inputs,
                           const std::vector<std::string>& outputs,
                           const nlohmann::json& extra = {}) {
  nlohmann::json m;
  m["tool"] = "percept";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  m["config"] = {{"path", cfg.config_path}, {"fnv1a64", file_hash_hex(cfg.config_path)}};
  auto jin = nlohmann::json::array();
  for (const auto& [name, path] : inputs) {
    jin.push_back({{"name", name}, {"path", path.string()}, {"fnv1a64", file_hash_hex(path)}});
  }
  m["inputs"] = jin;
  m["outputs"] = outputs;
  if (!extra.is_null() && !extra.empty()) m["details"] = extra;
  atomic_write(fs::path(cfg.paths.output_dir) / ("manifest_" + subcommand + ".json"),
               [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

// Generic reader for the pipeline's own CSV artifacts.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  size_t col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("csv: column '" + name + "' not found");
  }
};

inline CsvTable read_csv_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  CsvReader reader(in);
  CsvTable t;
  if (!reader.next_row(t.header)) throw DataError("empty csv '" + path.string() + "'");
  std::vector<std::string> row;
  while (reader.next_row(row)) t.rows.push_back(row);
  return t;
}

// ---------------------------------------------------------------------------
// validate

inline void run_validate(const PipelineConfig& cfg, const std::string& dump_patterns_path = {}) {
  std::vector<std::pair<std::string, fs::path>> inputs;
  auto check = [&](const std::string& label, const std::string& path, bool required) {
    if (path.empty()) {
      if (required) throw ConfigError("config: paths." + label + " is required");
      return;
    }
    if (!fs::exists(path)) {
      throw ConfigError("config: paths." + label + " = '" + path + "' does not exist");
    }
    inputs.emplace_back(label, path);
  };
  check("corpus", cfg.paths.corpus, false);
  check("epi", cfg.paths.epi, false);
  check("lexicon", cfg.paths.lexicon, true);
  check("exclusions", cfg.paths.exclusions, false);

  const Lexicon lex = load_lexicon(cfg.paths.lexicon);
  for (const auto& w : lex.warnings()) std::cerr << "warning: " << w << '\n';
  if (!cfg.paths.exclusions.empty()) load_exclusions(cfg.paths.exclusions);

  std::vector<std::string> outputs;
  if (!dump_patterns_path.empty()) {
    atomic_write(dump_patterns_path, [&](std::ostream& os) { dump_pattern_table(lex, os); });
    outputs.push_back(dump_patterns_path);
  }
  write_manifest(cfg, "validate", inputs, outputs,
                 {{"lexicon_categories", lex.category_count()},
                  {"lexicon_patterns", lex.matcher().pattern_count()},
                  {"lexicon_warnings", lex.warnings().size()}});
}

// ---------------------------------------------------------------------------
// score

inline void run_score(const PipelineConfig& cfg) {
  require_artifact(cfg.paths.corpus, "synth (or point paths.corpus at a corpus)");
  const Lexicon lex = load_lexicon(cfg.paths.lexicon);
  for (const auto& w : lex.warnings()) std::cerr << "warning: " << w << '\n';

  IngestReport report;
  const auto docs = load_documents(cfg.paths.corpus, cfg.on_malformed, &report);

  ScoringOptions opts;
  opts.include_empty_docs = cfg.scoring.include_empty_docs;
  opts.threads = cfg.threads;
  const auto series = compute_nls(docs, lex, opts);

  std::map<NLSKey, NLSSeries> smoothed = series;
  for (auto& [key, s] : smoothed) {
    s.values = moving_average(s.values, cfg.scoring.smoothing_window_days);
  }

  const fs::path out_dir(cfg.paths.output_dir);
  atomic_write(out_dir / "nls.csv", [&](std::ostream& os) { write_nls_csv(os, series); });
  atomic_write(out_dir / "nls_smoothed.csv",
               [&](std::ostream& os) { write_nls_csv(os, smoothed); });

  write_manifest(cfg, "score",
                 {{"corpus", cfg.paths.corpus}, {"lexicon", cfg.paths.lexicon}},
                 {"nls.csv", "nls_smoothed.csv"},
                 {{"documents_loaded", report.loaded},
                  {"documents_skipped", report.skipped},
                  {"smoothing_window_days", cfg.scoring.smoothing_window_days}});
}

// ---------------------------------------------------------------------------
// correlate

inline DailySeries log_series(const DailySeries& s) {
  DailySeries out = s;
  for (auto& v : out.values) {
    v = (!is_missing(v) && v > 0.0) ? std::log(v) : kMissing;
  }
  return out;
}

inline DailySeries cumulative_series(const DailySeries& s) {
  DailySeries out = s;
  double acc = 0.0;
  for (auto& v : out.values) {
    if (!is_missing(v)) acc += v;
    v = acc;
  }
  return out;
}

inline void run_correlate(const PipelineConfig& cfg) {
  const fs::path out_dir(cfg.paths.output_dir);
  const fs::path nls_path =
      out_dir / (cfg.correlate.use_smoothed ? "nls_smoothed.csv" : "nls.csv");
  require_artifact(nls_path, "score");
  require_artifact(cfg.paths.epi, "synth (or point paths.epi at an epi csv)");

  std::ifstream nls_in(nls_path);
  const auto nls = read_nls_csv(nls_in);
  const auto epi = load_epi(cfg.paths.epi, cfg.epi_columns);

  std::vector<std::pair<std::string, const DailySeries EpiSeries::*>> base_indicators = {
      {"daily_deaths", &EpiSeries::deaths}, {"daily_cases", &EpiSeries::cases}};

  // rows: country, category, indicator, pearson, n_pairs
  std::vector<std::vector<std::string>> rows;
  // (category, indicator) -> accumulated r values across countries
  std::map<std::pair<std::string, std::string>, std::vector<double>> means;

  for (const auto& [key, series] : nls) {
    const auto& [country, category] = key;
    const auto eit = epi.find(country);
    if (eit == epi.end()) continue;
    std::vector<std::pair<std::string, DailySeries>> indicators;
    for (const auto& [name, member] : base_indicators) {
      indicators.emplace_back(name, eit->second.*member);
      indicators.emplace_back("log_" + name, log_series(eit->second.*member));
      if (cfg.correlate.include_cumulative) {
        indicators.emplace_back("cumulative_" + name, cumulative_series(eit->second.*member));
      }
    }
    for (const auto& [name, ind] : indicators) {
      const auto res = pearson(series.values, ind);
      rows.push_back({country, category, name, format_double(res.r), std::to_string(res.n)});
      if (!is_missing(res.r)) means[{category, name}].push_back(res.r);
    }
  }

  atomic_write(out_dir / "correlations.csv", [&](std::ostream& os) {
    os << "country,category,indicator,pearson,n_pairs\n";
    for (const auto& r : rows) write_csv_row(os, r);
  });
  // Fig-2 reduction: arithmetic mean over countries with defined correlations
  atomic_write(out_dir / "correlations_mean.csv", [&](std::ostream& os) {
    os << "category,indicator,mean_pearson,n_countries\n";
    for (const auto& [key, rs] : means) {
      write_csv_row(os, {key.first, key.second, format_double(mean(rs)),
                         std::to_string(rs.size())});
    }
  });

  write_manifest(cfg, "correlate", {{"nls", nls_path}, {"epi", cfg.paths.epi}},
                 {"correlations.csv", "correlations_mean.csv"},
                 {{"use_smoothed", cfg.correlate.use_smoothed}});
}

// ---------------------------------------------------------------------------
// net

inline void run_net(const PipelineConfig& cfg) {
  require_artifact(cfg.paths.corpus, "synth (or point paths.corpus at a corpus)");
  const Lexicon lex = load_lexicon(cfg.paths.lexicon);

  IngestReport report;
  auto docs = load_documents(cfg.paths.corpus, cfg.on_malformed, &report);
  std::stable_sort(docs.begin(), docs.end(),
                   [](const RawDocument& a, const RawDocument& b) { return a.date < b.date; });

  std::map<std::string, std::vector<RawDocument>> by_country;
  for (auto& d : docs) by_country[d.country].push_back(std::move(d));

  const fs::path out_dir(cfg.paths.output_dir);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> outputs = {"network_measures.csv"};
  int64_t overlap_total = 0;

  for (const auto& [country, cdocs] : by_country) {
    SnapshotOptions opts;
    const auto it = cfg.network.snapshot_tweets.find(country);
    opts.n_per_snapshot =
        it != cfg.network.snapshot_tweets.end() ? it->second : cfg.network.default_snapshot_tweets;
    opts.min_doc_freq = cfg.network.min_doc_freq;
    opts.count_contributing_only = cfg.network.count_contributing_only;
    opts.cooc.death_category = cfg.network.death_category;
    opts.cooc.affect_category = cfg.network.affect_category;
    opts.cooc.death_wins_overlap = cfg.network.death_wins_overlap;

    const auto seq = build_snapshots(cdocs, lex, country, opts);
    for (size_t i = 0; i < seq.snapshots.size(); ++i) {
      const auto& snap = seq.snapshots[i];
      overlap_total += snap.overlap_classes;
      const double q = modularity_fixed(snap.graph);
      const double f = f_death(snap.graph, cfg.network.anchor);
      rows.push_back({country, std::to_string(i), to_string(snap.start), to_string(snap.end),
                      format_double(q), format_double(f), std::to_string(snap.n_tweets),
                      format_double(snap.contributing_fraction)});

      const std::vector<std::pair<std::string, std::string>> meta = {
          {"country", country},
          {"snapshot", std::to_string(i)},
          {"start", to_string(snap.start)},
          {"end", to_string(snap.end)},
          {"n_tweets", std::to_string(snap.n_tweets)},
          {"n_contributing", std::to_string(snap.n_contributing)}};
      const std::string stem = country + "_" + std::to_string(i) + ".gml";
      atomic_write(out_dir / "graphs" / stem,
                   [&](std::ostream& os) { write_gml(os, snap.graph, meta); });
      outputs.push_back("graphs/" + stem);

      const auto communities = louvain(snap.graph, cfg.seed);
      atomic_write(out_dir / "viz" / stem, [&](std::ostream& os) {
        export_viz(os, snap.graph, communities, cfg.network.viz_min_edge_weight, meta);
      });
      outputs.push_back("viz/" + stem);
    }
  }

  if (overlap_total > 0) {
    std::cerr << "warning: " << overlap_total
              << " token classes belong to both categories; precedence applied\n";
  }

  atomic_write(out_dir / "network_measures.csv", [&](std::ostream& os) {
    os << "country,snapshot_index,start_date,end_date,q_liwc,f_death,n_tweets,"
          "contributing_fraction\n";
    for (const auto& r : rows) write_csv_row(os, r);
  });

  write_manifest(cfg, "net", {{"corpus", cfg.paths.corpus}, {"lexicon", cfg.paths.lexicon}},
                 outputs,
                 {{"documents_loaded", report.loaded},
                  {"min_doc_freq", cfg.network.min_doc_freq},
                  {"anchor", cfg.network.anchor}});
}

// ---------------------------------------------------------------------------
// null

inline void run_null(const PipelineConfig& cfg) {
  const fs::path out_dir(cfg.paths.output_dir);
  const fs::path measures_path = out_dir / "network_measures.csv";
  require_artifact(measures_path, "net");

  const auto measures = read_csv_table(measures_path);
  const size_t c_country = measures.col("country");
  const size_t c_index = measures.col("snapshot_index");

  std::vector<std::vector<std::string>> rows;
  for (const auto& row : measures.rows) {
    const std::string& country = row[c_country];
    const std::string& index = row[c_index];
    const fs::path gml_path = out_dir / "graphs" / (country + "_" + index + ".gml");
    require_artifact(gml_path, "net");
    std::ifstream in(gml_path);
    const auto gml = read_gml(in);
    const auto& g = gml.graph;

    const double q_obs = modularity_fixed(g);
    const double f_obs = f_death(g, cfg.network.anchor);
    const uint64_t seed =
        derive_seed(cfg.seed, fnv1a64(country.data(), country.size()), std::stoull(index));
    const auto stats = ensemble_measures(g, cfg.network.anchor, cfg.null_model.ensemble_size,
                                         seed, cfg.threads);
    rows.push_back({country, index, format_double(q_obs), format_double(stats.mean_q),
                    format_double(f_obs), format_double(stats.mean_f),
                    std::to_string(stats.ensemble_size), std::to_string(stats.discarded_stubs),
                    std::to_string(stats.f_missing), std::to_string(seed)});
  }

  atomic_write(out_dir / "null_measures.csv", [&](std::ostream& os) {
    os << "country,snapshot_index,q_observed,q_null_mean,f_observed,f_null_mean,"
          "ensemble_size,discarded_stubs,f_missing,seed\n";
    for (const auto& r : rows) write_csv_row(os, r);
  });

  write_manifest(cfg, "null", {{"network_measures", measures_path}}, {"null_measures.csv"},
                 {{"ensemble_size", cfg.null_model.ensemble_size}});
}

// ---------------------------------------------------------------------------
// fit

struct CountryFits {
  std::string country;
  FitResult wf, power, linear;
  bool has_wf = false, has_power = false, has_linear = false;
};

// Assembles the per-country perception/stimulus sample per the fit flags.
inline FitSample build_country_sample(const PipelineConfig& cfg, const NLSSeries& nls_series,
                                      const EpiSeries& epi,
                                      std::span<const ExclusionWindow> windows) {
  DailySeries p = nls_series.values;
  const bool excl = cfg.fit.apply_exclusions && !windows.empty();
  if (excl && cfg.fit.exclusions_before_smoothing) {
    apply_exclusions(p, windows, nls_series.country, nls_series.category);
  }
  if (cfg.fit.use_smoothed) p = moving_average(p, cfg.scoring.smoothing_window_days);
  if (excl && !cfg.fit.exclusions_before_smoothing) {
    apply_exclusions(p, windows, nls_series.country, nls_series.category);
  }
  DailySeries s = epi.deaths;
  if (excl) apply_exclusions(s, windows, epi.country, "epi");
  return make_fit_sample(p, s);
}

inline void run_fit(const PipelineConfig& cfg) {
  const fs::path out_dir(cfg.paths.output_dir);
  const fs::path nls_path = out_dir / "nls.csv";
  require_artifact(nls_path, "score");
  require_artifact(cfg.paths.epi, "synth (or point paths.epi at an epi csv)");

  std::ifstream nls_in(nls_path);
  const auto nls = read_nls_csv(nls_in);
  const auto epi = load_epi(cfg.paths.epi, cfg.epi_columns);
  std::vector<ExclusionWindow> windows;
  if (cfg.fit.apply_exclusions && !cfg.paths.exclusions.empty()) {
    windows = load_exclusions(cfg.paths.exclusions);
  }

  std::vector<CountryFits> fits;
  std::vector<std::string> skipped;
  for (const auto& [key, series] : nls) {
    const auto& [country, category] = key;
    if (category != cfg.fit.category) continue;
    const auto eit = epi.find(country);
    if (eit == epi.end()) {
      skipped.push_back(country + " (no epi series)");
      continue;
    }
    const FitSample sample = build_country_sample(cfg, series, eit->second, windows);
    CountryFits cf;
    cf.country = country;
    try {
      cf.wf = fit_weber_fechner(sample);
      cf.has_wf = true;
    } catch (const DataError& e) {
      skipped.push_back(country + " (" + e.what() + ")");
    }
    try {
      cf.power = fit_power_law(sample);
      cf.has_power = true;
    } catch (const DataError& e) {
      skipped.push_back(country + " (" + e.what() + ")");
    }
    try {
      cf.linear = fit_linear(sample);
      cf.has_linear = true;
    } catch (const DataError& e) {
      skipped.push_back(country + " (" + e.what() + ")");
    }
    if (cf.has_wf || cf.has_power || cf.has_linear) fits.push_back(std::move(cf));
  }

  auto fit_row = [](const std::string& country, const FitResult& f) {
    return std::vector<std::string>{country,
                                    format_double(f.sensitivity),
                                    format_double(f.scale),
                                    format_double(f.inference.ci_lo),
                                    format_double(f.inference.ci_hi),
                                    format_double(f.inference.t_stat),
                                    format_double(f.inference.p_value),
                                    format_double(f.r_squared),
                                    format_double(f.nrmse),
                                    std::to_string(f.n),
                                    std::to_string(f.dropped_nonpos_s),
                                    std::to_string(f.dropped_nonpos_p)};
  };
  const std::string tail = "ci_low,ci_high,t,p_value,r_squared,nrmse,n,dropped_nonpos_s,"
                           "dropped_nonpos_p\n";
  atomic_write(out_dir / "fit_weber_fechner.csv", [&](std::ostream& os) {
    os << "country,k,s0," << tail;
    for (const auto& cf : fits) {
      if (cf.has_wf) write_csv_row(os, fit_row(cf.country, cf.wf));
    }
  });
  atomic_write(out_dir / "fit_power_law.csv", [&](std::ostream& os) {
    os << "country,beta,nu," << tail;
    for (const auto& cf : fits) {
      if (cf.has_power) write_csv_row(os, fit_row(cf.country, cf.power));
    }
  });
  atomic_write(out_dir / "fit_linear.csv", [&](std::ostream& os) {
    os << "country,a,b," << tail;
    for (const auto& cf : fits) {
      if (cf.has_linear) write_csv_row(os, fit_row(cf.country, cf.linear));
    }
  });

  // Table-4 style comparison over countries with all three fits
  std::vector<ModelComparisonRow> comp_rows;
  for (const auto& cf : fits) {
    if (!(cf.has_wf && cf.has_power && cf.has_linear)) continue;
    ModelComparisonRow row;
    row.country = cf.country;
    row.nrmse_wf = cf.wf.nrmse;
    row.nrmse_power = cf.power.nrmse;
    row.nrmse_linear = cf.linear.nrmse;
    comp_rows.push_back(row);
  }
  const auto comparison = compare_models(std::move(comp_rows));
  atomic_write(out_dir / "model_comparison.csv", [&](std::ostream& os) {
    os << "country,nrmse_power,nrmse_weber_fechner,nrmse_linear,best,second\n";
    for (const auto& row : comparison.rows) {
      write_csv_row(os, {row.country, format_double(row.nrmse_power),
                         format_double(row.nrmse_wf), format_double(row.nrmse_linear),
                         to_string(row.best), to_string(row.second)});
    }
    write_csv_row(os, {"__mean__", format_double(comparison.mean_power),
                       format_double(comparison.mean_wf), format_double(comparison.mean_linear),
                       "", ""});
    write_csv_row(os, {"__prop_best__", format_double(comparison.prop_best_power),
                       format_double(comparison.prop_best_wf),
                       format_double(comparison.prop_best_linear), "", ""});
    write_csv_row(os, {"__prop_second__", format_double(comparison.prop_second_power),
                       format_double(comparison.prop_second_wf),
                       format_double(comparison.prop_second_linear), "", ""});
  });

  // rank agreement between k and beta over countries with both fits
  std::map<std::string, double> k_map, beta_map;
  for (const auto& cf : fits) {
    if (cf.has_wf && cf.has_power) {
      k_map[cf.country] = cf.wf.sensitivity;
      beta_map[cf.country] = cf.power.sensitivity;
    }
  }
  nlohmann::json rank_extra;
  if (k_map.size() >= 3) {
    const auto rc = rank_compare(k_map, beta_map);
    atomic_write(out_dir / "rank_comparison.csv", [&](std::ostream& os) {
      os << "country,k,rank_k,beta,rank_beta,rank_correlation\n";
      for (size_t i = 0; i < rc.countries.size(); ++i) {
        write_csv_row(os, {rc.countries[i], format_double(rc.sensitivity_a[i]),
                           format_double(rc.rank_a[i]), format_double(rc.sensitivity_b[i]),
                           format_double(rc.rank_b[i]), format_double(rc.rank_correlation)});
      }
    });
    rank_extra = rc.rank_correlation;
  } else {
    atomic_write(out_dir / "rank_comparison.csv", [&](std::ostream& os) {
      os << "country,k,rank_k,beta,rank_beta,rank_correlation\n";
    });
  }

  nlohmann::json extra{{"use_smoothed", cfg.fit.use_smoothed},
                       {"apply_exclusions", cfg.fit.apply_exclusions},
                       {"category", cfg.fit.category},
                       {"skipped", skipped}};
  if (!rank_extra.is_null()) extra["rank_correlation"] = rank_extra;
  std::vector<std::pair<std::string, fs::path>> inputs = {{"nls", nls_path},
                                                          {"epi", cfg.paths.epi}};
  if (!windows.empty()) inputs.emplace_back("exclusions", cfg.paths.exclusions);
  write_manifest(cfg, "fit", inputs,
                 {"fit_weber_fechner.csv", "fit_power_law.csv", "fit_linear.csv",
                  "model_comparison.csv", "rank_comparison.csv"},
                 extra);
}

// ---------------------------------------------------------------------------
// synth

inline void run_synth(const PipelineConfig& cfg) {
  const fs::path out_dir(cfg.paths.output_dir);
  const fs::path synth_dir = out_dir / "synth";
  std::vector<std::string> outputs;
  nlohmann::json extra{{"kind", cfg.synth.kind}};

  if (cfg.synth.kind == "nls") {
    require_artifact(cfg.paths.lexicon, "validate (paths.lexicon must exist)");
    const Lexicon lex = load_lexicon(cfg.paths.lexicon);
    const auto& sc = cfg.synth.perception;
    EpiSeries stim = gen_stimulus(cfg.synth.stimulus, sc.days, cfg.synth.start_date, sc.country);
    std::map<std::string, EpiSeries> epi_map{{stim.country, stim}};
    atomic_write(synth_dir / "epi.csv", [&](std::ostream& os) { write_epi_csv(os, epi_map); });
    outputs.push_back("synth/epi.csv");
    atomic_write(synth_dir / "corpus.jsonl", [&](std::ostream& os) {
      gen_nls_corpus(sc, lex, stim, cfg.seed, [&](RawDocument&& d) { write_document(os, d); });
    });
    outputs.push_back("synth/corpus.jsonl");
    extra["days"] = sc.days;
    extra["docs_per_day"] = sc.docs_per_day;
    write_manifest(cfg, "synth", {{"lexicon", cfg.paths.lexicon}}, outputs, extra);
    return;
  }

  // cooc corpus ships its own matching lexicon
  CoocScenario scenario = cfg.synth.cooc;
  const Lexicon lex = make_cooc_lexicon(scenario);
  atomic_write(synth_dir / "corpus.jsonl", [&](std::ostream& os) {
    gen_cooc_corpus(scenario, cfg.seed, [&](RawDocument&& d) { write_document(os, d); });
  });
  outputs.push_back("synth/corpus.jsonl");
  atomic_write(synth_dir / "lexicon.json", [&](std::ostream& os) {
    nlohmann::json j;
    j["language"] = "en";
    auto cats = nlohmann::json::array();
    for (const auto& cat : lex.categories()) {
      nlohmann::json jc;
      jc["name"] = cat.name;
      jc["base_rate_percent"] = cat.base_rate_percent;
      auto words = nlohmann::json::array();
      for (const auto& w : cat.exact_words) words.push_back(w);
      for (const auto& p : cat.prefix_patterns) words.push_back(p + "*");
      jc["words"] = words;
      cats.push_back(jc);
    }
    j["categories"] = cats;
    os << j.dump(2) << '\n';
  });
  outputs.push_back("synth/lexicon.json");
  extra["snapshots"] = scenario.snapshots;
  extra["tweets_per_snapshot"] = scenario.tweets_per_snapshot;
  write_manifest(cfg, "synth", {}, outputs, extra);
}

// ---------------------------------------------------------------------------
// report

inline void run_report(const PipelineConfig& cfg) {
  const fs::path out_dir(cfg.paths.output_dir);
  const fs::path report_dir = out_dir / "report";
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, fs::path>> inputs;

  // Tables 2/3/5 and 4 are re-emitted under their table names.
  const std::vector<std::pair<std::string, std::string>> table_map = {
      {"fit_weber_fechner.csv", "table2_weber_fechner.csv"},
      {"fit_power_law.csv", "table3_power_law.csv"},
      {"model_comparison.csv", "table4_nrmse.csv"},
      {"fit_linear.csv", "table5_linear.csv"}};
  for (const auto& [src, dst] : table_map) {
    const fs::path src_path = out_dir / src;
    require_artifact(src_path, "fit");
    inputs.emplace_back(src, src_path);
    std::ifstream in(src_path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    atomic_write(report_dir / dst, [&](std::ostream& os) { os << buf.str(); });
    outputs.push_back("report/" + dst);
  }

  // Fig 2: cross-country mean correlations
  const fs::path mean_path = out_dir / "correlations_mean.csv";
  require_artifact(mean_path, "correlate");
  inputs.emplace_back("correlations_mean.csv", mean_path);
  {
    std::ifstream in(mean_path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    atomic_write(report_dir / "fig2_correlations.csv", [&](std::ostream& os) { os << buf.str(); });
    outputs.push_back("report/fig2_correlations.csv");
  }

  require_artifact(cfg.paths.epi, "synth (or point paths.epi at an epi csv)");
  const auto epi = load_epi(cfg.paths.epi, cfg.epi_columns);
  inputs.emplace_back("epi", cfg.paths.epi);

  // Fig 4: rho_Q / rho_f vs their null baselines per country
  const fs::path net_path = out_dir / "network_measures.csv";
  const fs::path null_path = out_dir / "null_measures.csv";
  require_artifact(net_path, "net");
  require_artifact(null_path, "null");
  inputs.emplace_back("network_measures.csv", net_path);
  inputs.emplace_back("null_measures.csv", null_path);
  {
    const auto net = read_csv_table(net_path);
    const auto nul = read_csv_table(null_path);
    struct SnapRow {
      std::pair<Date, Date> range;
      double q = kMissing, f = kMissing, q_null = kMissing, f_null = kMissing;
    };
    std::map<std::string, std::vector<SnapRow>> by_country;
    const size_t nc_country = net.col("country"), nc_start = net.col("start_date"),
                 nc_end = net.col("end_date"), nc_q = net.col("q_liwc"),
                 nc_f = net.col("f_death");
    for (const auto& row : net.rows) {
      SnapRow sr;
      sr.range = {parse_date(row[nc_start]), parse_date(row[nc_end])};
      parse_double(row[nc_q], sr.q);
      parse_double(row[nc_f], sr.f);
      by_country[row[nc_country]].push_back(sr);
    }
    const size_t uc_country = nul.col("country"), uc_index = nul.col("snapshot_index"),
                 uc_qn = nul.col("q_null_mean"), uc_fn = nul.col("f_null_mean");
    for (const auto& row : nul.rows) {
      auto& rows = by_country[row[uc_country]];
      const size_t idx = std::stoul(row[uc_index]);
      if (idx < rows.size()) {
        parse_double(row[uc_qn], rows[idx].q_null);
        parse_double(row[uc_fn], rows[idx].f_null);
      }
    }
    atomic_write(report_dir / "fig4_network_correlations.csv", [&](std::ostream& os) {
      os << "country,rho_q,rho_f,rho_q_null,rho_f_null,n_snapshots\n";
      for (const auto& [country, snaps] : by_country) {
        const auto eit = epi.find(country);
        if (eit == epi.end()) continue;
        std::vector<std::pair<Date, Date>> ranges;
        std::vector<double> q, f, qn, fn;
        for (const auto& s : snaps) {
          ranges.push_back(s.range);
          q.push_back(s.q);
          f.push_back(s.f);
          qn.push_back(s.q_null);
          fn.push_back(s.f_null);
        }
        const auto rq = correlate_snapshots(ranges, q, eit->second.deaths, cfg.fit.alignment);
        const auto rf = correlate_snapshots(ranges, f, eit->second.deaths, cfg.fit.alignment);
        const auto rqn = correlate_snapshots(ranges, qn, eit->second.deaths, cfg.fit.alignment);
        const auto rfn = correlate_snapshots(ranges, fn, eit->second.deaths, cfg.fit.alignment);
        write_csv_row(os, {country, format_double(rq.r), format_double(rf.r),
                           format_double(rqn.r), format_double(rfn.r), std::to_string(rq.n)});
      }
    });
    outputs.push_back("report/fig4_network_correlations.csv");
  }

  // Fig 5: per-country overlay of z-scored smoothed Death NLS and log epi
  const fs::path nls_path = out_dir / "nls.csv";
  require_artifact(nls_path, "score");
  inputs.emplace_back("nls", nls_path);
  {
    std::ifstream nls_in(nls_path);
    const auto nls = read_nls_csv(nls_in);
    std::vector<ExclusionWindow> windows;
    if (cfg.fit.apply_exclusions && !cfg.paths.exclusions.empty()) {
      windows = load_exclusions(cfg.paths.exclusions);
      inputs.emplace_back("exclusions", cfg.paths.exclusions);
    }
    atomic_write(report_dir / "fig5_overlay.csv", [&](std::ostream& os) {
      os << "country,date,death_nls_z,log_deaths_z,log_cases_z\n";
      for (const auto& [key, series] : nls) {
        const auto& [country, category] = key;
        if (category != cfg.fit.category) continue;
        const auto eit = epi.find(country);
        if (eit == epi.end()) continue;
        DailySeries p = series.values;
        if (!windows.empty()) apply_exclusions(p, windows, country, category);
        DailySeries sd = eit->second.deaths;
        DailySeries sc = eit->second.cases;
        if (!windows.empty()) {
          apply_exclusions(sd, windows, country, "epi");
          apply_exclusions(sc, windows, country, "epi");
        }
        try {
          p = zscore(moving_average(p, cfg.scoring.smoothing_window_days), country + "/nls");
          sd = zscore(moving_average(log_series(sd), cfg.scoring.smoothing_window_days),
                      country + "/log_deaths");
          sc = zscore(moving_average(log_series(sc), cfg.scoring.smoothing_window_days),
                      country + "/log_cases");
        } catch (const DataError&) {
          continue;  // degenerate series are skipped, matching report semantics
        }
        const Date lo = std::min({p.start, sd.start, sc.start});
        const Date hi = std::max({p.end_date(), sd.end_date(), sc.end_date()});
        for (Date d = lo; d <= hi; ++d) {
          write_csv_row(os, {country, to_string(d), format_double(p.at_date(d)),
                             format_double(sd.at_date(d)), format_double(sc.at_date(d))});
        }
      }
    });
    outputs.push_back("report/fig5_overlay.csv");
  }

  write_manifest(cfg, "report", inputs, outputs);
}

}  // namespace percept
