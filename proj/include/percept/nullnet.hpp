#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "percept/common.hpp"
#include "percept/parallel.hpp"
#include "percept/rng.hpp"
#include "percept/semnet.hpp"

namespace percept {

// Discrete distribution with values in frequency-estimation form.
struct Categorical {
  std::vector<int64_t> values;
  std::vector<double> probs;  // same order, sums to 1
  std::vector<double> cum;

  void finalize() {
    cum.resize(probs.size());
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cum[i] = acc;
    }
    if (!cum.empty()) cum.back() = 1.0;
  }

  int64_t sample(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const size_t i = std::min(static_cast<size_t>(it - cum.begin()), values.size() - 1);
    return values[i];
  }
};

// Weighted configuration model estimated from an observed snapshot:
// degrees D_i ~ p(d), per-stub weights W_ik ~ p(w | D_i = d), equal-weight
// stubs paired uniformly.
struct NullModelSpec {
  Categorical degree_dist;                     // p(d)
  std::map<int64_t, Categorical> weight_dist;  // d -> p(w | d)
  size_t n_nodes = 0;
  size_t ensemble_size = 100;  // J
  uint64_t seed = 0;
};

inline NullModelSpec estimate_spec(const CoocGraph& graph) {
  if (graph.node_count() == 0) throw DataError("estimate_spec: empty graph");
  NullModelSpec spec;
  spec.n_nodes = graph.node_count();
  const auto degree = graph.degree();

  std::map<int64_t, int64_t> deg_counts;
  for (int d : degree) ++deg_counts[d];
  for (const auto& [d, c] : deg_counts) {
    spec.degree_dist.values.push_back(d);
    spec.degree_dist.probs.push_back(static_cast<double>(c) /
                                     static_cast<double>(graph.node_count()));
  }
  spec.degree_dist.finalize();

  // each edge endpoint contributes one (degree of endpoint, weight) observation
  std::map<int64_t, std::map<int64_t, int64_t>> w_counts;
  for (const auto& e : graph.edges) {
    ++w_counts[degree[static_cast<size_t>(e.u)]][e.w];
    ++w_counts[degree[static_cast<size_t>(e.v)]][e.w];
  }
  for (const auto& [d, ws] : w_counts) {
    Categorical cat;
    int64_t total = 0;
    for (const auto& [w, c] : ws) total += c;
    for (const auto& [w, c] : ws) {
      cat.values.push_back(w);
      cat.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    cat.finalize();
    spec.weight_dist.emplace(d, std::move(cat));
  }
  return spec;
}

struct NullSampleReport {
  std::vector<int64_t> drawn_weights;      // every stub weight drawn
  std::vector<int64_t> discarded_weights;  // stubs dropped (odd class, self-pair bailout)
  std::vector<int64_t> paired_weights;     // one entry per pre-merge pairing
};

// One realization. Node identities and category labels carry over from the
// observed graph positionally.
inline CoocGraph sample_null(const NullModelSpec& spec, size_t n_nodes, uint64_t seed,
                             NullSampleReport* report = nullptr) {
  if (n_nodes != spec.n_nodes) {
    throw InternalError("sample_null: node count differs from estimation");
  }
  Rng rng = make_rng(seed);

  std::map<int64_t, std::vector<int32_t>> stubs_by_weight;  // ordered for determinism
  for (size_t i = 0; i < n_nodes; ++i) {
    const int64_t d = spec.degree_dist.sample(rng);
    const auto wit = spec.weight_dist.find(d);
    for (int64_t k = 0; k < d; ++k) {
      // degree values observed on an edgeless estimate have no weight law;
      // such stubs cannot exist because every observed degree >= 1 has edges
      if (wit == spec.weight_dist.end()) break;
      const int64_t w = wit->second.sample(rng);
      stubs_by_weight[w].push_back(static_cast<int32_t>(i));
      if (report) report->drawn_weights.push_back(w);
    }
  }

  std::map<std::pair<int32_t, int32_t>, int64_t> edge_acc;
  auto discard = [&](int64_t w) {
    if (report) report->discarded_weights.push_back(w);
  };

  for (auto& [w, stubs] : stubs_by_weight) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    if (stubs.size() % 2 == 1) {
      discard(w);
      stubs.pop_back();
    }
    while (!stubs.empty()) {
      const int32_t a = stubs.back();
      stubs.pop_back();
      bool paired = false;
      size_t last_j = 0;
      for (int attempt = 0; attempt < 16 && !stubs.empty(); ++attempt) {
        const size_t j = std::uniform_int_distribution<size_t>(0, stubs.size() - 1)(rng);
        last_j = j;
        if (stubs[j] != a) {
          int32_t u = a, v = stubs[j];
          stubs[j] = stubs.back();
          stubs.pop_back();
          if (u > v) std::swap(u, v);
          edge_acc[{u, v}] += w;
          if (report) report->paired_weights.push_back(w);
          paired = true;
          break;
        }
      }
      if (!paired) {
        // retries exhausted (weight class dominated by one node): drop the pair
        discard(w);
        if (!stubs.empty()) {
          discard(w);
          stubs[last_j] = stubs.back();
          stubs.pop_back();
        }
      }
    }
  }

  CoocGraph g;
  g.nodes = std::vector<std::string>();
  g.nodes.reserve(n_nodes);
  g.labels.reserve(n_nodes);
  for (size_t i = 0; i < n_nodes; ++i) {
    g.nodes.push_back("n" + std::to_string(i));
    g.labels.push_back(NodeLabel::Death);
  }
  for (const auto& [uv, w] : edge_acc) g.edges.push_back({uv.first, uv.second, w});
  g.recompute_strengths();
  return g;
}

inline CoocGraph sample_null_like(const CoocGraph& observed, const NullModelSpec& spec,
                                  uint64_t seed, NullSampleReport* report = nullptr) {
  CoocGraph g = sample_null(spec, observed.node_count(), seed, report);
  g.nodes = observed.nodes;
  g.labels = observed.labels;
  return g;
}

struct NullEnsembleStats {
  double mean_q = kMissing;
  double mean_f = kMissing;
  std::vector<double> q_values;  // per realization
  std::vector<double> f_values;  // per realization, kMissing where anchor isolated
  size_t f_missing = 0;
  int64_t discarded_stubs = 0;
  size_t ensemble_size = 0;
  uint64_t seed = 0;
};

// J null realizations measured with the observed partition labels.
// Realizations run independently (parallelizable); aggregation happens over
// the collected arrays so the result is order-independent.
inline NullEnsembleStats ensemble_measures(const CoocGraph& observed, std::string_view anchor,
                                           size_t j_realizations, uint64_t seed, int threads = 1) {
  if (j_realizations < 1) throw InternalError("ensemble_measures: J must be >= 1");
  const NullModelSpec spec = estimate_spec(observed);
  const auto partition = category_partition(observed);

  NullEnsembleStats stats;
  stats.ensemble_size = j_realizations;
  stats.seed = seed;
  stats.q_values.assign(j_realizations, kMissing);
  stats.f_values.assign(j_realizations, kMissing);
  std::vector<int64_t> discards(j_realizations, 0);

  const std::string anchor_str(anchor);
  parallel_for_index(j_realizations, threads, [&](size_t j, int) {
    NullSampleReport report;
    const CoocGraph g = sample_null_like(observed, spec, derive_seed(seed, 0x9011ull, j), &report);
    stats.q_values[j] = modularity_fixed(g, partition);
    stats.f_values[j] = f_death(g, anchor_str, partition);
    discards[j] = static_cast<int64_t>(report.discarded_weights.size());
  });

  KahanSum q_sum, f_sum;
  size_t q_n = 0, f_n = 0;
  for (size_t j = 0; j < j_realizations; ++j) {
    if (!is_missing(stats.q_values[j])) {
      q_sum.add(stats.q_values[j]);
      ++q_n;
    }
    if (!is_missing(stats.f_values[j])) {
      f_sum.add(stats.f_values[j]);
      ++f_n;
    }
    stats.discarded_stubs += discards[j];
  }
  stats.f_missing = j_realizations - f_n;
  stats.mean_q = q_n == 0 ? kMissing : q_sum.value() / static_cast<double>(q_n);
  stats.mean_f = f_n == 0 ? kMissing : f_sum.value() / static_cast<double>(f_n);
  return stats;
}

}  // namespace percept
