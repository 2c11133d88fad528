#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "percept/common.hpp"
#include "percept/corpus.hpp"
#include "percept/date.hpp"
#include "percept/lexicon.hpp"
#include "percept/rng.hpp"

namespace percept {

enum class NodeLabel : uint8_t { Death = 0, Affect = 1 };

inline const char* to_string(NodeLabel l) { return l == NodeLabel::Death ? "Death" : "Affect"; }

struct CoocEdge {
  int32_t u = 0;
  int32_t v = 0;  // u < v always
  int64_t w = 0;
};

// Symmetric weighted word-class graph with zero diagonal. Node order is
// lexicographic in the class representative, so construction is invariant
// under tweet permutations.
struct CoocGraph {
  std::vector<std::string> nodes;   // token-class representatives
  std::vector<NodeLabel> labels;
  std::vector<CoocEdge> edges;      // sorted by (u, v)
  std::vector<int64_t> strength;    // k_i = sum_j A_ij
  int64_t total_strength = 0;       // 2m

  size_t node_count() const { return nodes.size(); }
  size_t edge_count() const { return edges.size(); }

  int find_node(std::string_view rep) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), rep);
    if (it == nodes.end() || *it != rep) return -1;
    return static_cast<int>(it - nodes.begin());
  }

  std::vector<int> degree() const {
    std::vector<int> deg(nodes.size(), 0);
    for (const auto& e : edges) {
      ++deg[static_cast<size_t>(e.u)];
      ++deg[static_cast<size_t>(e.v)];
    }
    return deg;
  }

  void recompute_strengths() {
    strength.assign(nodes.size(), 0);
    total_strength = 0;
    for (const auto& e : edges) {
      strength[static_cast<size_t>(e.u)] += e.w;
      strength[static_cast<size_t>(e.v)] += e.w;
      total_strength += 2 * e.w;
    }
  }
};

struct CoocOptions {
  std::string death_category = "Death";
  std::string affect_category = "Affect";
  bool death_wins_overlap = true;  // label precedence when a class is in both
  // When set, only these class representatives enter the graph (document
  // frequency filtering hook used by build_snapshots).
  const std::unordered_set<std::string>* allowed_classes = nullptr;
};

struct CoocBuildResult {
  CoocGraph graph;
  int64_t n_tweets = 0;
  int64_t n_contributing = 0;   // tweets with >= 2 distinct retained classes
  int64_t overlap_classes = 0;  // classes found in both categories
};

namespace detail {

struct ClassInfo {
  std::string rep;
  NodeLabel label;
  bool in_scope;
};

// Resolve a token to its Death/Affect class via the winning pattern.
inline ClassInfo resolve_class(const Lexicon& lex, std::string_view token,
                               const CoocOptions& opts, bool* overlap) {
  ClassInfo info{{}, NodeLabel::Death, false};
  const int32_t win = lex.matcher().winning_pattern(token);
  if (win < 0) return info;
  const auto& pat = lex.matcher().pattern(win);
  bool in_death = false, in_affect = false;
  for (uint16_t c : pat.categories) {
    const auto& name = lex.category_name(c);
    if (name == opts.death_category) in_death = true;
    if (name == opts.affect_category) in_affect = true;
  }
  if (!in_death && !in_affect) return info;
  info.in_scope = true;
  info.rep = pat.representative;
  if (in_death && in_affect) {
    if (overlap) *overlap = true;
    info.label = opts.death_wins_overlap ? NodeLabel::Death : NodeLabel::Affect;
  } else {
    info.label = in_death ? NodeLabel::Death : NodeLabel::Affect;
  }
  return info;
}

}  // namespace detail

// A(T) = B(T)^T B(T) over token classes with the diagonal dropped, where
// B_tk counts instances of class k in tweet t. Only tweets with at least two
// distinct classes in Death-or-Affect contribute.
inline CoocBuildResult cooc_graph(std::span<const std::vector<std::string>> tweets,
                                  const Lexicon& lex, const CoocOptions& opts = {}) {
  CoocBuildResult res;
  res.n_tweets = static_cast<int64_t>(tweets.size());

  std::unordered_map<std::string, int32_t> intern;  // rep -> temp id
  std::vector<std::string> reps;
  std::vector<NodeLabel> labels;
  std::unordered_set<std::string> overlap_seen;

  std::unordered_map<int64_t, int64_t> edge_acc;  // (u<<32|v) -> weight, u < v
  std::unordered_map<std::string, std::pair<int64_t, NodeLabel>> tweet_counts;

  for (const auto& tokens : tweets) {
    tweet_counts.clear();
    for (const auto& tok : tokens) {
      bool overlap = false;
      const auto info = detail::resolve_class(lex, tok, opts, &overlap);
      if (!info.in_scope) continue;
      if (overlap && overlap_seen.insert(info.rep).second) ++res.overlap_classes;
      if (opts.allowed_classes && !opts.allowed_classes->count(info.rep)) continue;
      auto [it, fresh] = tweet_counts.try_emplace(info.rep, 0, info.label);
      ++it->second.first;
    }
    // only tweets with >= 2 distinct classes enter B; their classes become nodes
    if (tweet_counts.size() < 2) continue;
    ++res.n_contributing;
    std::vector<std::pair<int32_t, int64_t>> counts;
    counts.reserve(tweet_counts.size());
    for (const auto& [rep, cl] : tweet_counts) {
      auto [it, fresh] = intern.emplace(rep, static_cast<int32_t>(reps.size()));
      if (fresh) {
        reps.push_back(rep);
        labels.push_back(cl.second);
      }
      counts.emplace_back(it->second, cl.first);
    }
    std::sort(counts.begin(), counts.end());
    for (size_t a = 0; a < counts.size(); ++a) {
      for (size_t b = a + 1; b < counts.size(); ++b) {
        const int64_t key = (static_cast<int64_t>(counts[a].first) << 32) | counts[b].first;
        edge_acc[key] += counts[a].second * counts[b].second;
      }
    }
  }

  // canonical node order: lexicographic representative
  std::vector<int32_t> order(reps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int32_t a, int32_t b) { return reps[static_cast<size_t>(a)] < reps[static_cast<size_t>(b)]; });
  std::vector<int32_t> remap(reps.size());
  auto& g = res.graph;
  g.nodes.resize(reps.size());
  g.labels.resize(reps.size());
  for (size_t i = 0; i < order.size(); ++i) {
    remap[static_cast<size_t>(order[i])] = static_cast<int32_t>(i);
    g.nodes[i] = reps[static_cast<size_t>(order[i])];
    g.labels[i] = labels[static_cast<size_t>(order[i])];
  }
  g.edges.reserve(edge_acc.size());
  for (const auto& [key, w] : edge_acc) {
    int32_t u = remap[static_cast<size_t>(key >> 32)];
    int32_t v = remap[static_cast<size_t>(key & 0xffffffff)];
    if (u > v) std::swap(u, v);
    g.edges.push_back({u, v, w});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const CoocEdge& a, const CoocEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  g.recompute_strengths();
  return res;
}

// ---------------------------------------------------------------------------
// Partition measures

// Weighted modularity of a fixed partition (Newman):
// Q = (1/2m) sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j).
inline double modularity_fixed(const CoocGraph& g, std::span<const int> community) {
  if (community.size() != g.node_count()) {
    throw InternalError("modularity_fixed: partition size mismatch");
  }
  if (g.total_strength <= 0) return kMissing;
  const double two_m = static_cast<double>(g.total_strength);
  double within = 0.0;  // sum_ij A_ij delta / 2m accumulates edge pairs twice
  for (const auto& e : g.edges) {
    if (community[static_cast<size_t>(e.u)] == community[static_cast<size_t>(e.v)]) {
      within += 2.0 * static_cast<double>(e.w);
    }
  }
  std::map<int, double> comm_strength;
  for (size_t i = 0; i < g.node_count(); ++i) {
    comm_strength[community[i]] += static_cast<double>(g.strength[i]);
  }
  double expected = 0.0;
  for (const auto& [c, s] : comm_strength) expected += s * s / two_m;
  return (within - expected) / two_m;
}

inline std::vector<int> category_partition(const CoocGraph& g) {
  std::vector<int> part(g.node_count());
  for (size_t i = 0; i < g.node_count(); ++i) part[i] = static_cast<int>(g.labels[i]);
  return part;
}

inline double modularity_fixed(const CoocGraph& g) {
  const auto part = category_partition(g);
  return modularity_fixed(g, part);
}

// Fraction of the anchor node's strength attached to same-category nodes.
// Missing when the anchor is absent or isolated.
inline double f_death(const CoocGraph& g, std::string_view anchor, std::span<const int> community) {
  const int a = g.find_node(anchor);
  if (a < 0) return kMissing;
  const auto ai = static_cast<size_t>(a);
  if (g.strength[ai] <= 0) return kMissing;
  int64_t same = 0;
  for (const auto& e : g.edges) {
    if (e.u != a && e.v != a) continue;
    const auto other = static_cast<size_t>(e.u == a ? e.v : e.u);
    if (community[other] == community[ai]) same += e.w;
  }
  return static_cast<double>(same) / static_cast<double>(g.strength[ai]);
}

inline double f_death(const CoocGraph& g, std::string_view anchor) {
  const auto part = category_partition(g);
  return f_death(g, anchor, part);
}

// ---------------------------------------------------------------------------
// Louvain community detection

namespace detail {

struct WorkGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;  // neighbor, weight (no self)
  std::vector<double> self;                              // A_ii
  std::vector<double> k;                                 // strength incl. self
  double two_m = 0.0;
  size_t n() const { return adj.size(); }
};

inline WorkGraph to_work_graph(const CoocGraph& g) {
  WorkGraph w;
  w.adj.resize(g.node_count());
  w.self.assign(g.node_count(), 0.0);
  w.k.assign(g.node_count(), 0.0);
  for (const auto& e : g.edges) {
    w.adj[static_cast<size_t>(e.u)].emplace_back(e.v, static_cast<double>(e.w));
    w.adj[static_cast<size_t>(e.v)].emplace_back(e.u, static_cast<double>(e.w));
  }
  for (size_t i = 0; i < w.n(); ++i) {
    std::sort(w.adj[i].begin(), w.adj[i].end());
    for (const auto& [j, wt] : w.adj[i]) w.k[i] += wt;
    w.two_m += w.k[i];
  }
  return w;
}

inline double work_modularity(const WorkGraph& g, const std::vector<int>& comm) {
  if (g.two_m <= 0) return 0.0;
  std::unordered_map<int, double> sum_in, sum_tot;
  for (size_t i = 0; i < g.n(); ++i) {
    sum_tot[comm[i]] += g.k[i];
    sum_in[comm[i]] += 2.0 * g.self[i];  // A_ii = twice the stored loop weight
    for (const auto& [j, w] : g.adj[i]) {
      if (comm[static_cast<size_t>(j)] == comm[i]) sum_in[comm[i]] += w;
    }
  }
  double q = 0.0;
  for (const auto& [c, tot] : sum_tot) {
    q += sum_in[c] / g.two_m - (tot / g.two_m) * (tot / g.two_m);
  }
  return q;
}

// One level of local moves; returns true if any node moved.
inline bool local_moves(const WorkGraph& g, std::vector<int>& comm, const std::vector<int>& order) {
  std::vector<double> sum_tot(g.n(), 0.0);
  for (size_t i = 0; i < g.n(); ++i) sum_tot[static_cast<size_t>(comm[i])] += g.k[i];
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (int node : order) {
      const auto ni = static_cast<size_t>(node);
      const int old_c = comm[ni];
      // weights from node into each adjacent community
      std::unordered_map<int, double> links;
      links[old_c] += 0.0;
      for (const auto& [j, w] : g.adj[ni]) links[comm[static_cast<size_t>(j)]] += w;
      sum_tot[static_cast<size_t>(old_c)] -= g.k[ni];
      int best_c = old_c;
      double best_gain = links[old_c] - sum_tot[static_cast<size_t>(old_c)] * g.k[ni] / g.two_m;
      // deterministic scan: ascending community id
      std::vector<std::pair<int, double>> cands(links.begin(), links.end());
      std::sort(cands.begin(), cands.end());
      for (const auto& [c, l] : cands) {
        if (c == old_c) continue;
        const double gain = l - sum_tot[static_cast<size_t>(c)] * g.k[ni] / g.two_m;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_c = c;
        }
      }
      comm[ni] = best_c;
      sum_tot[static_cast<size_t>(best_c)] += g.k[ni];
      if (best_c != old_c) {
        moved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

inline WorkGraph aggregate(const WorkGraph& g, const std::vector<int>& comm, int n_comm) {
  WorkGraph out;
  out.adj.resize(static_cast<size_t>(n_comm));
  out.self.assign(static_cast<size_t>(n_comm), 0.0);
  out.k.assign(static_cast<size_t>(n_comm), 0.0);
  out.two_m = g.two_m;
  std::map<std::pair<int, int>, double> acc;
  for (size_t i = 0; i < g.n(); ++i) {
    const int ci = comm[i];
    out.self[static_cast<size_t>(ci)] += g.self[i];
    for (const auto& [j, w] : g.adj[i]) {
      const int cj = comm[static_cast<size_t>(j)];
      if (ci == cj) {
        out.self[static_cast<size_t>(ci)] += w / 2.0;  // each undirected pair seen twice
      } else if (ci < cj) {
        acc[{ci, cj}] += w;
      }
    }
  }
  for (const auto& [key, w] : acc) {
    out.adj[static_cast<size_t>(key.first)].emplace_back(key.second, w);
    out.adj[static_cast<size_t>(key.second)].emplace_back(key.first, w);
  }
  for (size_t i = 0; i < out.n(); ++i) {
    std::sort(out.adj[i].begin(), out.adj[i].end());
    out.k[i] = 2.0 * out.self[i];
    for (const auto& [j, w] : out.adj[i]) out.k[i] += w;
  }
  return out;
}

}  // namespace detail

// Louvain modularity maximization; deterministic for a fixed seed (the seed
// shuffles the node visiting order once per level). Returns compact labels.
// If level_q is given, modularity after each level is appended (never
// decreasing by construction).
inline std::vector<int> louvain(const CoocGraph& graph, uint64_t seed = 0,
                                std::vector<double>* level_q = nullptr) {
  const size_t n = graph.node_count();
  std::vector<int> result(n);
  std::iota(result.begin(), result.end(), 0);
  if (graph.total_strength <= 0) return result;

  detail::WorkGraph wg = detail::to_work_graph(graph);
  auto rng = make_rng(derive_seed(seed, 0x1007a1ull, 0));
  int level = 0;
  for (;;) {
    std::vector<int> order(wg.n());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> comm(wg.n());
    std::iota(comm.begin(), comm.end(), 0);
    const bool improved = detail::local_moves(wg, comm, order);
    // compact community ids
    std::unordered_map<int, int> compact;
    for (int& c : comm) {
      auto [it, fresh] = compact.emplace(c, static_cast<int>(compact.size()));
      c = it->second;
    }
    for (auto& r : result) r = comm[static_cast<size_t>(r)];
    if (level_q) level_q->push_back(detail::work_modularity(wg, comm));
    if (!improved || compact.size() == wg.n()) break;
    wg = detail::aggregate(wg, comm, static_cast<int>(compact.size()));
    ++level;
    if (level > 64) throw InternalError("louvain: did not converge");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Snapshots

struct Snapshot {
  Date start{};
  Date end{};
  CoocGraph graph;
  int64_t n_tweets = 0;
  int64_t n_contributing = 0;
  double contributing_fraction = 0.0;
  int64_t overlap_classes = 0;
};

struct SnapshotSequence {
  std::string country;
  std::vector<Snapshot> snapshots;
};

struct SnapshotOptions {
  int64_t n_per_snapshot = 1000;
  double min_doc_freq = 0.0;  // fraction of snapshot tweets containing a class
  bool count_contributing_only = false;
  CoocOptions cooc;
};

namespace detail {

inline CoocBuildResult build_block(std::span<const std::vector<std::string>> tweets,
                                   const Lexicon& lex, const SnapshotOptions& opts) {
  if (opts.min_doc_freq <= 0.0) return cooc_graph(tweets, lex, opts.cooc);
  // document frequency over all tweets in the block
  std::unordered_map<std::string, int64_t> df;
  std::unordered_set<std::string> in_tweet;
  for (const auto& tokens : tweets) {
    in_tweet.clear();
    for (const auto& tok : tokens) {
      const auto info = resolve_class(lex, tok, opts.cooc, nullptr);
      if (info.in_scope) in_tweet.insert(info.rep);
    }
    for (const auto& rep : in_tweet) ++df[rep];
  }
  std::unordered_set<std::string> allowed;
  const auto total = static_cast<double>(tweets.size());
  for (const auto& [rep, count] : df) {
    if (static_cast<double>(count) / total >= opts.min_doc_freq) allowed.insert(rep);
  }
  CoocOptions filtered = opts.cooc;
  filtered.allowed_classes = &allowed;
  return cooc_graph(tweets, lex, filtered);
}

}  // namespace detail

// Splits a date-ordered country stream into equal-count blocks (the final
// block merges backward when under half size) and builds one graph per block.
inline SnapshotSequence build_snapshots(std::span<const RawDocument> docs, const Lexicon& lex,
                                        std::string country, const SnapshotOptions& opts) {
  if (opts.n_per_snapshot <= 0) throw InternalError("build_snapshots: n_per_snapshot must be > 0");
  for (size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].date < docs[i - 1].date) {
      throw DataError("build_snapshots: documents not date-ordered");
    }
  }
  SnapshotSequence seq;
  seq.country = std::move(country);
  if (docs.empty()) return seq;

  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(docs.size());
  for (const auto& d : docs) token_lists.push_back(tokenize(d.text));

  // contributing pre-count used only when blocks count contributing tweets
  std::vector<char> contributes;
  if (opts.count_contributing_only) {
    contributes.resize(docs.size(), 0);
    std::unordered_set<std::string> classes;
    for (size_t i = 0; i < docs.size(); ++i) {
      classes.clear();
      for (const auto& tok : token_lists[i]) {
        const auto info = detail::resolve_class(lex, tok, opts.cooc, nullptr);
        if (info.in_scope) classes.insert(info.rep);
      }
      contributes[i] = classes.size() >= 2 ? 1 : 0;
    }
  }

  std::vector<std::pair<size_t, size_t>> blocks;  // [begin, end)
  size_t begin = 0;
  int64_t in_block = 0;
  for (size_t i = 0; i < docs.size(); ++i) {
    in_block += opts.count_contributing_only ? contributes[i] : 1;
    if (in_block >= opts.n_per_snapshot) {
      blocks.emplace_back(begin, i + 1);
      begin = i + 1;
      in_block = 0;
    }
  }
  if (begin < docs.size()) blocks.emplace_back(begin, docs.size());
  if (blocks.size() >= 2) {
    const auto& last = blocks.back();
    const auto last_count =
        opts.count_contributing_only
            ? static_cast<int64_t>(std::count(contributes.begin() + static_cast<ptrdiff_t>(last.first),
                                              contributes.begin() + static_cast<ptrdiff_t>(last.second), 1))
            : static_cast<int64_t>(last.second - last.first);
    if (2 * last_count <= opts.n_per_snapshot) {  // half-full or less merges backward
      blocks[blocks.size() - 2].second = last.second;
      blocks.pop_back();
    }
  }

  for (const auto& [b, e] : blocks) {
    auto res = detail::build_block(
        std::span<const std::vector<std::string>>(token_lists.data() + b, e - b), lex, opts);
    Snapshot snap;
    snap.start = docs[b].date;
    snap.end = docs[e - 1].date;
    snap.graph = std::move(res.graph);
    snap.n_tweets = static_cast<int64_t>(e - b);
    snap.n_contributing = res.n_contributing;
    snap.overlap_classes = res.overlap_classes;
    snap.contributing_fraction =
        snap.n_tweets == 0 ? 0.0
                           : static_cast<double>(snap.n_contributing) /
                                 static_cast<double>(snap.n_tweets);
    seq.snapshots.push_back(std::move(snap));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// GML export / import

namespace detail {

inline void gml_escape(std::ostream& os, std::string_view s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << '"';
}

}  // namespace detail

// Writes the graph in GML with category (and optional community) node
// attributes plus free-form graph-level metadata.
inline void write_gml(std::ostream& os, const CoocGraph& g,
                      const std::vector<std::pair<std::string, std::string>>& metadata = {},
                      std::span<const int> community = {}) {
  os << "graph [\n  directed 0\n";
  for (const auto& [k, v] : metadata) {
    os << "  " << k << ' ';
    detail::gml_escape(os, v);
    os << '\n';
  }
  for (size_t i = 0; i < g.node_count(); ++i) {
    os << "  node [\n    id " << i << "\n    label ";
    detail::gml_escape(os, g.nodes[i]);
    os << "\n    category ";
    detail::gml_escape(os, to_string(g.labels[i]));
    os << '\n';
    if (!community.empty()) os << "    community " << community[i] << '\n';
    os << "  ]\n";
  }
  for (const auto& e : g.edges) {
    os << "  edge [\n    source " << e.u << "\n    target " << e.v << "\n    weight " << e.w
       << "\n  ]\n";
  }
  os << "]\n";
}

struct GmlGraph {
  CoocGraph graph;
  std::map<std::string, std::string> metadata;
};

// Minimal reader for the writer's own output.
inline GmlGraph read_gml(std::istream& in) {
  struct Tok {
    std::string text;
    bool quoted = false;
  };
  std::vector<Tok> tokens;
  {
    std::string tok;
    bool quoted = false;
    int c;
    while ((c = in.get()) != std::char_traits<char>::eof()) {
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '\\') {
          const int next = in.get();
          if (next != std::char_traits<char>::eof()) tok.push_back(static_cast<char>(next));
        } else if (ch == '"') {
          quoted = false;
          tokens.push_back({tok, true});
          tok.clear();
        } else {
          tok.push_back(ch);
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) {
          tokens.push_back({tok, false});
          tok.clear();
        }
      } else {
        tok.push_back(ch);
      }
    }
    if (!tok.empty()) tokens.push_back({tok, false});
  }

  GmlGraph out;
  struct NodeRec {
    int64_t id = -1;
    std::string label;
    std::string category;
  };
  std::vector<NodeRec> nodes;
  std::vector<std::array<int64_t, 3>> edges;

  size_t i = 0;
  if (i + 1 < tokens.size() && tokens[i].text == "graph" && tokens[i + 1].text == "[") i += 2;
  int depth = 1;
  while (i < tokens.size() && depth > 0) {
    const std::string& t = tokens[i].text;
    if (t == "]" && !tokens[i].quoted) {
      --depth;
      ++i;
      continue;
    }
    if ((t == "node" || t == "edge") && i + 1 < tokens.size() && tokens[i + 1].text == "[") {
      const bool is_node = t == "node";
      i += 2;
      NodeRec rec;
      std::array<int64_t, 3> edge{-1, -1, 0};
      while (i < tokens.size() && !(tokens[i].text == "]" && !tokens[i].quoted)) {
        const std::string key = tokens[i++].text;
        if (i >= tokens.size()) break;
        const std::string val = tokens[i++].text;
        if (is_node) {
          if (key == "id") rec.id = std::stoll(val);
          if (key == "label") rec.label = val;
          if (key == "category") rec.category = val;
        } else {
          if (key == "source") edge[0] = std::stoll(val);
          if (key == "target") edge[1] = std::stoll(val);
          if (key == "weight") edge[2] = std::stoll(val);
        }
      }
      ++i;  // consume ']'
      if (is_node) {
        nodes.push_back(std::move(rec));
      } else {
        edges.push_back(edge);
      }
      continue;
    }
    // graph-level key/value
    const std::string key = tokens[i++].text;
    if (i >= tokens.size()) break;
    out.metadata[key] = tokens[i++].text;
  }

  auto& g = out.graph;
  std::sort(nodes.begin(), nodes.end(), [](const NodeRec& a, const NodeRec& b) { return a.id < b.id; });
  std::unordered_map<int64_t, int32_t> id_map;
  for (const auto& rec : nodes) {
    id_map[rec.id] = static_cast<int32_t>(g.nodes.size());
    g.nodes.push_back(rec.label);
    g.labels.push_back(rec.category == "Affect" ? NodeLabel::Affect : NodeLabel::Death);
  }
  for (const auto& [s, t, w] : edges) {
    auto su = id_map.find(s);
    auto sv = id_map.find(t);
    if (su == id_map.end() || sv == id_map.end()) throw DataError("gml: edge references unknown node");
    int32_t u = su->second, v = sv->second;
    if (u > v) std::swap(u, v);
    g.edges.push_back({u, v, w});
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const CoocEdge& a, const CoocEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  g.recompute_strengths();
  return out;
}

// Visualization export: filters edges below the threshold, drops isolated
// nodes, and annotates nodes with category and community labels.
inline void export_viz(std::ostream& os, const CoocGraph& g, std::span<const int> community,
                       int64_t min_edge_weight,
                       const std::vector<std::pair<std::string, std::string>>& metadata = {}) {
  std::vector<CoocEdge> kept;
  for (const auto& e : g.edges) {
    if (e.w >= min_edge_weight) kept.push_back(e);
  }
  std::vector<int32_t> remap(g.node_count(), -1);
  CoocGraph sub;
  std::vector<int> sub_comm;
  for (const auto& e : kept) {
    for (int32_t id : {e.u, e.v}) {
      if (remap[static_cast<size_t>(id)] < 0) {
        remap[static_cast<size_t>(id)] = static_cast<int32_t>(sub.nodes.size());
        sub.nodes.push_back(g.nodes[static_cast<size_t>(id)]);
        sub.labels.push_back(g.labels[static_cast<size_t>(id)]);
        sub_comm.push_back(community.empty() ? 0 : community[static_cast<size_t>(id)]);
      }
    }
    sub.edges.push_back({remap[static_cast<size_t>(e.u)], remap[static_cast<size_t>(e.v)], e.w});
  }
  sub.recompute_strengths();
  write_gml(os, sub, metadata, sub_comm);
}

}  // namespace percept
