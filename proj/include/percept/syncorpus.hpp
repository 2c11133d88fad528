#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "percept/common.hpp"
#include "percept/corpus.hpp"
#include "percept/csv.hpp"
#include "percept/lexicon.hpp"
#include "percept/psychfit.hpp"
#include "percept/rng.hpp"

namespace percept {

// ---------------------------------------------------------------------------
// Stimulus generation

enum class StimulusKind { Exponential, Logistic, File };

struct StimulusSpec {
  StimulusKind kind = StimulusKind::Exponential;
  double start_value = 1.0;    // exponential
  double doubling_days = 3.0;  // exponential
  double capacity = 1000.0;    // logistic
  double growth_rate = 0.15;   // logistic
  double midpoint_day = 45.0;  // logistic
  DailySeries file_series;     // passthrough
};

// Deterministic positive daily-death curve; cases are a fixed multiple so
// downstream ingestion sees both columns populated.
inline EpiSeries gen_stimulus(const StimulusSpec& spec, int days, Date start_date,
                              std::string country = "XA") {
  if (days < 1) throw ConfigError("gen_stimulus: days must be >= 1");
  EpiSeries out;
  out.country = std::move(country);
  std::vector<double> deaths;
  switch (spec.kind) {
    case StimulusKind::Exponential: {
      if (!(spec.start_value > 0.0) || !(spec.doubling_days > 0.0)) {
        throw ConfigError("gen_stimulus: exponential needs positive start and doubling time");
      }
      for (int t = 1; t <= days; ++t) {
        deaths.push_back(spec.start_value *
                         std::exp2(static_cast<double>(t - 1) / spec.doubling_days));
      }
      break;
    }
    case StimulusKind::Logistic: {
      if (!(spec.capacity > 0.0) || !(spec.growth_rate > 0.0)) {
        throw ConfigError("gen_stimulus: logistic needs positive capacity and rate");
      }
      for (int t = 1; t <= days; ++t) {
        deaths.push_back(spec.capacity /
                         (1.0 + std::exp(-spec.growth_rate *
                                         (static_cast<double>(t) - spec.midpoint_day))));
      }
      break;
    }
    case StimulusKind::File: {
      if (spec.file_series.size() < static_cast<size_t>(days)) {
        throw ConfigError("gen_stimulus: provided series shorter than requested days");
      }
      deaths.assign(spec.file_series.values.begin(), spec.file_series.values.begin() + days);
      break;
    }
  }
  out.deaths = DailySeries{start_date, deaths};
  std::vector<double> cases(deaths.size());
  for (size_t i = 0; i < deaths.size(); ++i) {
    cases[i] = is_missing(deaths[i]) ? kMissing : 25.0 * deaths[i];
  }
  out.cases = DailySeries{start_date, std::move(cases)};
  return out;
}

// ---------------------------------------------------------------------------
// Perception (NLS) corpus with planted model parameters

struct PlantedModel {
  ModelKind kind = ModelKind::WeberFechner;
  double sensitivity = 0.75;  // k | beta | a
  double scale = 5.0;         // s0 | nu | b
  double noise_sd = 0.0;      // gaussian noise on the daily NLS target
};

inline double planted_value(const PlantedModel& m, double s) {
  switch (m.kind) {
    case ModelKind::WeberFechner:
      return m.sensitivity * std::log(s / m.scale);
    case ModelKind::PowerLaw:
      return m.scale * std::pow(s, m.sensitivity);
    default:
      return m.sensitivity * s + m.scale;
  }
}

struct PlantedCategory {
  std::string category;
  PlantedModel model;
};

struct PerceptionScenario {
  std::string country = "XA";
  std::string lang = "en";
  int days = 90;
  int docs_per_day = 200;
  int min_tokens = 8;
  int max_tokens = 25;
  std::string target_category = "Death";
  PlantedModel model;
  std::vector<PlantedCategory> extra_categories;  // e.g. a falling Affect signal
};

namespace detail {

// Words usable as an unambiguous signal for one category: they must survive
// tokenization unchanged and match exactly that category.
inline std::vector<std::string> category_signal_words(const Lexicon& lex,
                                                      const std::string& category) {
  const int ci = lex.category_index(category);
  if (ci < 0) throw ConfigError("scenario: category '" + category + "' not in lexicon");
  std::vector<std::string> out;
  auto try_word = [&](const std::string& w) {
    const auto toks = tokenize(w);
    if (toks.size() != 1 || toks[0] != w) return;
    const auto cats = match_token(lex, w);
    if (cats.size() == 1 && cats[0] == category) out.push_back(w);
  };
  for (const auto& w : lex.categories()[static_cast<size_t>(ci)].exact_words) try_word(w);
  for (const auto& p : lex.categories()[static_cast<size_t>(ci)].prefix_patterns) try_word(p);
  if (out.empty()) {
    throw ConfigError("scenario: category '" + category + "' has no unambiguous signal words");
  }
  return out;
}

inline std::string filler_word(const Lexicon& lex, uint64_t i) {
  const std::string w = "zq" + std::to_string(i % 499);
  if (!match_token(lex, w).empty()) {
    throw ConfigError("scenario: lexicon matches the reserved filler namespace 'zq*'");
  }
  return w;
}

}  // namespace detail

struct PlantedTruth {
  // per category, the exact planted NLS target by day (noise included)
  std::map<std::string, std::vector<double>> nls_target;
};

// Emits docs_per_day documents per stimulus day through sink(RawDocument&&).
// Each token is an unambiguous signal word for category c with probability
// q_c(t)/100 where q_c(t) = p_B(1 + NLS_target(t)/100), so the expected
// pipeline NLS equals the planted target exactly.
template <class Sink>
inline PlantedTruth gen_nls_corpus(const PerceptionScenario& scenario, const Lexicon& lex,
                                   const EpiSeries& stimulus, uint64_t seed, Sink&& sink) {
  if (scenario.days < 1) throw ConfigError("scenario: days must be >= 1");
  if (scenario.docs_per_day < 1) throw ConfigError("scenario: docs_per_day must be >= 1");
  if (scenario.min_tokens < 1 || scenario.max_tokens < scenario.min_tokens) {
    throw ConfigError("scenario: token range invalid");
  }
  if (stimulus.deaths.size() < static_cast<size_t>(scenario.days)) {
    throw ConfigError("scenario: stimulus shorter than scenario days");
  }

  struct Target {
    std::string category;
    PlantedModel model;
    double base_rate;
    std::vector<std::string> words;
  };
  std::vector<Target> targets;
  auto add_target = [&](const std::string& cat, const PlantedModel& m) {
    const int ci = lex.category_index(cat);
    if (ci < 0) throw ConfigError("scenario: category '" + cat + "' not in lexicon");
    targets.push_back({cat, m, lex.base_rate(static_cast<uint16_t>(ci)),
                       detail::category_signal_words(lex, cat)});
  };
  add_target(scenario.target_category, scenario.model);
  for (const auto& extra : scenario.extra_categories) add_target(extra.category, extra.model);

  PlantedTruth truth;
  for (const auto& t : targets) {
    truth.nls_target[t.category].assign(static_cast<size_t>(scenario.days), 0.0);
  }

  uint64_t filler_counter = 0;
  for (int day = 0; day < scenario.days; ++day) {
    auto rng = make_rng(derive_seed(seed, 0x5c0ull, static_cast<uint64_t>(day)));
    const Date date = stimulus.deaths.date_at(static_cast<size_t>(day));
    const double s = stimulus.deaths[static_cast<size_t>(day)];
    if (is_missing(s) || !(s > 0.0)) {
      throw ConfigError("scenario: nonpositive stimulus on day " + to_string(date));
    }
    // per-category token emission probability for this day
    std::vector<double> q(targets.size());
    double q_total = 0.0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (size_t c = 0; c < targets.size(); ++c) {
      double target = planted_value(targets[c].model, s);
      if (targets[c].model.noise_sd > 0.0) target += targets[c].model.noise_sd * gauss(rng);
      truth.nls_target[targets[c].category][static_cast<size_t>(day)] = target;
      q[c] = targets[c].base_rate * (1.0 + target / 100.0);
      if (q[c] < 0.0 || q[c] > 100.0) {
        throw ConfigError("scenario: infeasible per-token probability " + format_double(q[c]) +
                          " for category '" + targets[c].category + "' on day " + to_string(date));
      }
      q_total += q[c];
    }
    if (q_total > 100.0) {
      throw ConfigError("scenario: planted categories sum above 100% on day " + to_string(date));
    }

    std::uniform_int_distribution<int> n_tokens_dist(scenario.min_tokens, scenario.max_tokens);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::string text;
    for (int doc = 0; doc < scenario.docs_per_day; ++doc) {
      const int n_tokens = n_tokens_dist(rng);
      text.clear();
      for (int tk = 0; tk < n_tokens; ++tk) {
        if (tk) text.push_back(' ');
        const double u = 100.0 * unit(rng);
        double acc = 0.0;
        bool emitted = false;
        for (size_t c = 0; c < targets.size(); ++c) {
          acc += q[c];
          if (u < acc) {
            const auto& words = targets[c].words;
            text += words[std::uniform_int_distribution<size_t>(0, words.size() - 1)(rng)];
            emitted = true;
            break;
          }
        }
        if (!emitted) text += detail::filler_word(lex, filler_counter++);
      }
      RawDocument d;
      d.id = scenario.country + "-" + std::to_string(day) + "-" + std::to_string(doc);
      d.date = date;
      d.country = scenario.country;
      d.lang = scenario.lang;
      d.text = text;
      sink(std::move(d));
    }
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Co-occurrence corpus with a planted two-block structure

struct CoocScenario {
  int death_vocab = 10;
  int affect_vocab = 10;
  double within_rate = 0.5;  // probability of a same-category word pair per tweet
  double cross_rate = 0.1;   // epsilon: probability of a cross-category pair
  int tweets_per_snapshot = 500;
  int snapshots = 5;
  std::string country = "XA";
  std::string lang = "en";
  Date start_date = make_date(2020, 3, 11);
};

// Lexicon matching the generator's vocabulary: Death holds the anchor
// pattern death* plus dword<i>, Affect holds aword<i>.
inline Lexicon make_cooc_lexicon(const CoocScenario& scenario) {
  if (scenario.death_vocab < 2 || scenario.affect_vocab < 2) {
    throw ConfigError("cooc scenario: need at least 2 words per category");
  }
  Category death{"Death", 1.0, {}, {"death"}};
  for (int i = 1; i < scenario.death_vocab; ++i) death.exact_words.push_back("dword" + std::to_string(i));
  Category affect{"Affect", 1.0, {}, {}};
  for (int i = 0; i < scenario.affect_vocab; ++i) affect.exact_words.push_back("aword" + std::to_string(i));
  return Lexicon("en", {std::move(death), std::move(affect)});
}

// Per tweet: a within-category pair with probability within_rate and a
// cross-category pair with probability cross_rate. Expected Q_LIWC is
// strictly decreasing in cross_rate.
template <class Sink>
inline void gen_cooc_corpus(const CoocScenario& scenario, uint64_t seed, Sink&& sink) {
  if (scenario.within_rate < 0 || scenario.within_rate > 1 || scenario.cross_rate < 0 ||
      scenario.cross_rate > 1) {
    throw ConfigError("cooc scenario: rates must lie in [0, 1]");
  }
  if (scenario.tweets_per_snapshot < 1 || scenario.snapshots < 1) {
    throw ConfigError("cooc scenario: snapshot sizes must be positive");
  }
  std::vector<std::string> death_words, affect_words;
  death_words.push_back("death");
  for (int i = 1; i < scenario.death_vocab; ++i) death_words.push_back("dword" + std::to_string(i));
  for (int i = 0; i < scenario.affect_vocab; ++i) affect_words.push_back("aword" + std::to_string(i));

  uint64_t doc_counter = 0;
  for (int snap = 0; snap < scenario.snapshots; ++snap) {
    auto rng = make_rng(derive_seed(seed, 0xc00cull, static_cast<uint64_t>(snap)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick = [&](const std::vector<std::string>& words) -> const std::string& {
      return words[std::uniform_int_distribution<size_t>(0, words.size() - 1)(rng)];
    };
    auto pick_two = [&](const std::vector<std::string>& words, std::string& a, std::string& b) {
      const size_t i = std::uniform_int_distribution<size_t>(0, words.size() - 1)(rng);
      size_t j = std::uniform_int_distribution<size_t>(0, words.size() - 2)(rng);
      if (j >= i) ++j;
      a = words[i];
      b = words[j];
    };
    for (int tw = 0; tw < scenario.tweets_per_snapshot; ++tw) {
      std::string text = "filler" + std::to_string(doc_counter % 97);
      if (unit(rng) < scenario.within_rate) {
        std::string a, b;
        pick_two(unit(rng) < 0.5 ? death_words : affect_words, a, b);
        text += " " + a + " " + b;
      }
      if (unit(rng) < scenario.cross_rate) {
        text += " " + pick(death_words) + " " + pick(affect_words);
      }
      RawDocument d;
      d.id = scenario.country + "-c" + std::to_string(doc_counter++);
      // spread each snapshot's tweets over ~3 calendar days
      d.date = scenario.start_date + snap * 3 + (3 * tw) / scenario.tweets_per_snapshot;
      d.country = scenario.country;
      d.lang = scenario.lang;
      d.text = text;
      sink(std::move(d));
    }
  }
}

}  // namespace percept
