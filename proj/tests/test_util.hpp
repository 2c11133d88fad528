#pragma once

// Shared test oracles. Everything here is deliberately naive and independent
// of the implementation paths it checks.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "percept/lexicon.hpp"
#include "percept/semnet.hpp"

namespace testutil {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature

inline double simpson(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, double whole, int depth) {
  const double c = 0.5 * (a + b);
  const double left = simpson(f, a, c);
  const double right = simpson(f, c, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, c, eps / 2.0, left, depth - 1) +
         adaptive_simpson(f, c, b, eps / 2.0, right, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-12) {
  return adaptive_simpson(f, a, b, eps, simpson(f, a, b), 60);
}

inline double student_t_pdf(double t, double dof) {
  return std::exp(std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0)) /
         std::sqrt(dof * M_PI) * std::pow(1.0 + t * t / dof, -(dof + 1.0) / 2.0);
}

// Two-sided P(|T| >= |t|) by numerical integration of the density.
inline double student_t_two_sided_p_oracle(double t, double dof) {
  const double at = std::abs(t);
  const double central = integrate([&](double x) { return student_t_pdf(x, dof); }, 0.0, at);
  return 1.0 - 2.0 * central;
}

// ---------------------------------------------------------------------------
// Naive lexicon matching

inline std::vector<std::string> naive_match(const percept::Lexicon& lex, std::string_view token) {
  std::vector<std::string> out;
  for (const auto& cat : lex.categories()) {
    bool hit = false;
    for (const auto& w : cat.exact_words) {
      if (token == w) hit = true;
    }
    for (const auto& p : cat.prefix_patterns) {
      if (token.substr(0, p.size()) == p) hit = true;
    }
    if (hit) out.push_back(cat.name);
  }
  return out;
}

// exact > longest prefix; empty representative means unmatched
inline std::string naive_winner(const percept::Lexicon& lex, std::string_view token) {
  for (const auto& cat : lex.categories()) {
    for (const auto& w : cat.exact_words) {
      if (token == w) return w;
    }
  }
  std::string best;
  for (const auto& cat : lex.categories()) {
    for (const auto& p : cat.prefix_patterns) {
      if (token.substr(0, p.size()) == p && p.size() > best.size()) best = p;
    }
  }
  if (!best.empty()) best.push_back('*');
  return best;
}

// ---------------------------------------------------------------------------
// Dense graph oracles

inline std::vector<std::vector<double>> dense_adjacency(const percept::CoocGraph& g) {
  std::vector<std::vector<double>> a(g.node_count(), std::vector<double>(g.node_count(), 0.0));
  for (const auto& e : g.edges) {
    a[static_cast<size_t>(e.u)][static_cast<size_t>(e.v)] += static_cast<double>(e.w);
    a[static_cast<size_t>(e.v)][static_cast<size_t>(e.u)] += static_cast<double>(e.w);
  }
  return a;
}

// Literal double loop over the modularity formula.
inline double naive_modularity(const percept::CoocGraph& g, const std::vector<int>& comm) {
  const auto a = dense_adjacency(g);
  const size_t n = g.node_count();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) k[i] += a[i][j];
    two_m += k[i];
  }
  if (two_m <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  double q = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (comm[i] != comm[j]) continue;
      q += a[i][j] - k[i] * k[j] / two_m;
    }
  }
  return q / two_m;
}

// Enumerates all set partitions of n items (restricted growth strings).
inline void for_each_partition(size_t n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> labels(n, 0);
  std::function<void(size_t, int)> rec = [&](size_t i, int max_used) {
    if (i == n) {
      f(labels);
      return;
    }
    for (int c = 0; c <= max_used + 1; ++c) {
      labels[i] = c;
      rec(i + 1, std::max(max_used, c));
    }
  };
  rec(0, -1);
}

// Builds a CoocGraph from an explicit undirected edge list.
inline percept::CoocGraph make_graph(size_t n, const std::vector<std::tuple<int, int, int64_t>>& edges,
                                     const std::vector<percept::NodeLabel>& labels = {}) {
  percept::CoocGraph g;
  for (size_t i = 0; i < n; ++i) {
    std::string name = "n";
    name += static_cast<char>('a' + (i % 26));
    name += std::to_string(i);
    g.nodes.push_back(name);
    g.labels.push_back(labels.empty() ? percept::NodeLabel::Death : labels[i]);
  }
  for (const auto& [u, v, w] : edges) {
    int32_t a = u, b = v;
    if (a > b) std::swap(a, b);
    g.edges.push_back({a, b, w});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const percept::CoocEdge& x, const percept::CoocEdge& y) {
    return std::tie(x.u, x.v) < std::tie(y.u, y.v);
  });
  g.recompute_strengths();
  return g;
}

}  // namespace testutil
