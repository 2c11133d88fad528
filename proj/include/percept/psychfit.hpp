#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "percept/common.hpp"
#include "percept/date.hpp"
#include "percept/series.hpp"
#include "percept/stats.hpp"

namespace percept {

struct OlsResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double t_stat = 0.0;
  double p_value = 0.0;
  double ci_lo = 0.0;  // 95% on the slope
  double ci_hi = 0.0;
  size_t n = 0;
};

// Simple least squares of y on x with t inference on the slope (n-2 dof).
inline OlsResult ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InternalError("ols: length mismatch");
  const size_t n = x.size();
  if (n < 3) throw DataError("ols: need at least 3 points, got " + std::to_string(n));
  const double mx = mean(x);
  const double my = mean(y);
  KahanSum sxx, sxy;
  for (size_t i = 0; i < n; ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (!(sxx.value() > 0.0)) throw DataError("ols: regressor is constant");

  OlsResult res;
  res.n = n;
  res.slope = sxy.value() / sxx.value();
  res.intercept = my - res.slope * mx;
  KahanSum sse;
  for (size_t i = 0; i < n; ++i) {
    const double e = y[i] - (res.intercept + res.slope * x[i]);
    sse.add(e * e);
  }
  const double dof = static_cast<double>(n - 2);
  const double sigma2 = sse.value() / dof;
  res.slope_se = std::sqrt(sigma2 / sxx.value());
  if (res.slope_se > 0.0) {
    res.t_stat = res.slope / res.slope_se;
    res.p_value = student_t_two_sided_p(res.t_stat, dof);
    const double t975 = student_t_quantile(0.975, dof);
    res.ci_lo = res.slope - t975 * res.slope_se;
    res.ci_hi = res.slope + t975 * res.slope_se;
  } else {
    // exact fit: infinite t, zero p, degenerate interval at the estimate
    res.t_stat = res.slope >= 0 ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    res.p_value = 0.0;
    res.ci_lo = res.ci_hi = res.slope;
  }
  return res;
}

// sqrt(mean squared residual) normalized by the observed range of p.
inline double nrmse(std::span<const double> p, std::span<const double> p_hat) {
  if (p.size() != p_hat.size()) throw InternalError("nrmse: length mismatch");
  if (p.empty()) throw DataError("nrmse: empty series");
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  if (!(*hi > *lo)) throw DataError("nrmse: constant observed series");
  KahanSum sse;
  for (size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] - p_hat[i];
    sse.add(e * e);
  }
  return std::sqrt(sse.value() / static_cast<double>(p.size())) / (*hi - *lo);
}

// R^2 = 1 - sum e^2 / ((n-1) var_p); can be negative for models fit on a
// transformed scale.
inline double r_squared(std::span<const double> p, std::span<const double> p_hat) {
  if (p.size() != p_hat.size()) throw InternalError("r_squared: length mismatch");
  if (p.size() < 2) throw DataError("r_squared: need at least 2 points");
  const double var_p = sample_variance(p);
  if (!(var_p > 0.0)) throw DataError("r_squared: zero variance in observed series");
  KahanSum sse;
  for (size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] - p_hat[i];
    sse.add(e * e);
  }
  return 1.0 - sse.value() / (static_cast<double>(p.size() - 1) * var_p);
}

// ---------------------------------------------------------------------------
// Perception models

enum class ModelKind { WeberFechner, PowerLaw, Linear };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::WeberFechner:
      return "weber_fechner";
    case ModelKind::PowerLaw:
      return "power_law";
    default:
      return "linear";
  }
}

struct FitSample {
  std::vector<Date> dates;  // empty when alignment info is not needed
  std::vector<double> p;    // perception (NLS values)
  std::vector<double> s;    // stimulus (daily deaths)
};

// Date-aligned sample; pairs with either side missing are dropped.
inline FitSample make_fit_sample(const DailySeries& p, const DailySeries& s) {
  FitSample out;
  if (p.empty() || s.empty()) return out;
  const Date lo = std::max(p.start, s.start);
  const Date hi = std::min(p.end_date(), s.end_date());
  for (Date d = lo; d <= hi; ++d) {
    const double pv = p.at_date(d);
    const double sv = s.at_date(d);
    if (is_missing(pv) || is_missing(sv)) continue;
    out.dates.push_back(d);
    out.p.push_back(pv);
    out.s.push_back(sv);
  }
  return out;
}

struct FitResult {
  ModelKind model = ModelKind::Linear;
  // (k, s0) for Weber-Fechner, (beta, nu) for the power law, (a, b) linear
  double sensitivity = 0.0;  // k | beta | a
  double scale = 0.0;        // s0 | nu | b
  OlsResult inference;       // on the regression slope (= sensitivity)
  double nrmse = 0.0;        // always on the linear p scale
  double r_squared = 0.0;    // always on the linear p scale
  size_t n = 0;
  size_t dropped_nonpos_s = 0;
  size_t dropped_nonpos_p = 0;
  std::vector<double> p_used, s_used, p_hat;
  std::vector<double> residuals;  // p - p_hat
};

namespace detail {

inline void finish_fit(FitResult& fit) {
  fit.n = fit.p_used.size();
  fit.residuals.resize(fit.n);
  for (size_t i = 0; i < fit.n; ++i) fit.residuals[i] = fit.p_used[i] - fit.p_hat[i];
  fit.nrmse = percept::nrmse(fit.p_used, fit.p_hat);
  fit.r_squared = percept::r_squared(fit.p_used, fit.p_hat);
}

[[noreturn]] inline void too_few(const char* model, size_t n, size_t drop_s, size_t drop_p) {
  throw DataError(std::string(model) + ": only " + std::to_string(n) +
                  " usable pairs after dropping " + std::to_string(drop_s) +
                  " with s<=0 and " + std::to_string(drop_p) + " with p<=0");
}

}  // namespace detail

// p = k ln(s / s0) + R. Regress p on ln s; s0 = exp(-intercept / k),
// reported as +infinity when k <= 0 (Table-2 "inf" convention).
inline FitResult fit_weber_fechner(const FitSample& sample) {
  FitResult fit;
  fit.model = ModelKind::WeberFechner;
  std::vector<double> ln_s;
  for (size_t i = 0; i < sample.p.size(); ++i) {
    if (!(sample.s[i] > 0.0)) {
      ++fit.dropped_nonpos_s;
      continue;
    }
    fit.p_used.push_back(sample.p[i]);
    fit.s_used.push_back(sample.s[i]);
    ln_s.push_back(std::log(sample.s[i]));
  }
  if (fit.p_used.size() < 3) {
    detail::too_few("fit_weber_fechner", fit.p_used.size(), fit.dropped_nonpos_s, 0);
  }
  fit.inference = ols(ln_s, fit.p_used);
  const double k = fit.inference.slope;
  const double c = fit.inference.intercept;
  fit.sensitivity = k;
  double s0 = std::exp(-c / k);
  if (k <= 0.0 || !std::isfinite(s0)) s0 = std::numeric_limits<double>::infinity();
  fit.scale = s0;
  fit.p_hat.resize(fit.p_used.size());
  for (size_t i = 0; i < fit.p_used.size(); ++i) fit.p_hat[i] = c + k * ln_s[i];
  detail::finish_fit(fit);
  return fit;
}

// p = nu * s^beta + R~. Fit as log-log regression; error metrics are
// computed on the linear p scale, so R^2 can go negative.
inline FitResult fit_power_law(const FitSample& sample) {
  FitResult fit;
  fit.model = ModelKind::PowerLaw;
  std::vector<double> ln_s, ln_p;
  for (size_t i = 0; i < sample.p.size(); ++i) {
    if (!(sample.s[i] > 0.0)) {
      ++fit.dropped_nonpos_s;
      continue;
    }
    if (!(sample.p[i] > 0.0)) {
      ++fit.dropped_nonpos_p;
      continue;
    }
    fit.p_used.push_back(sample.p[i]);
    fit.s_used.push_back(sample.s[i]);
    ln_s.push_back(std::log(sample.s[i]));
    ln_p.push_back(std::log(sample.p[i]));
  }
  if (fit.p_used.size() < 3) {
    detail::too_few("fit_power_law", fit.p_used.size(), fit.dropped_nonpos_s,
                    fit.dropped_nonpos_p);
  }
  fit.inference = ols(ln_s, ln_p);
  fit.sensitivity = fit.inference.slope;              // beta
  fit.scale = std::exp(fit.inference.intercept);      // nu
  fit.p_hat.resize(fit.p_used.size());
  for (size_t i = 0; i < fit.p_used.size(); ++i) {
    fit.p_hat[i] = fit.scale * std::pow(fit.s_used[i], fit.sensitivity);
  }
  detail::finish_fit(fit);
  return fit;
}

// p = a s + b, the benchmark model; no positivity filtering.
inline FitResult fit_linear(const FitSample& sample) {
  FitResult fit;
  fit.model = ModelKind::Linear;
  fit.p_used = sample.p;
  fit.s_used = sample.s;
  if (fit.p_used.size() < 3) detail::too_few("fit_linear", fit.p_used.size(), 0, 0);
  fit.inference = ols(fit.s_used, fit.p_used);
  fit.sensitivity = fit.inference.slope;      // a
  fit.scale = fit.inference.intercept;        // b
  fit.p_hat.resize(fit.p_used.size());
  for (size_t i = 0; i < fit.p_used.size(); ++i) {
    fit.p_hat[i] = fit.scale + fit.sensitivity * fit.s_used[i];
  }
  detail::finish_fit(fit);
  return fit;
}

// ---------------------------------------------------------------------------
// Model comparison (Table-4 style) and rank agreement

// Minimum NRMSE wins; ties break Weber-Fechner > power law > linear.
inline ModelKind best_model(double nrmse_wf, double nrmse_power, double nrmse_linear) {
  ModelKind best = ModelKind::WeberFechner;
  double best_v = nrmse_wf;
  if (nrmse_power < best_v) {
    best = ModelKind::PowerLaw;
    best_v = nrmse_power;
  }
  if (nrmse_linear < best_v) best = ModelKind::Linear;
  return best;
}

inline ModelKind second_model(double nrmse_wf, double nrmse_power, double nrmse_linear) {
  struct Entry {
    ModelKind m;
    double v;
    int pref;
  };
  std::vector<Entry> entries{{ModelKind::WeberFechner, nrmse_wf, 0},
                             {ModelKind::PowerLaw, nrmse_power, 1},
                             {ModelKind::Linear, nrmse_linear, 2}};
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.v < b.v || (a.v == b.v && a.pref < b.pref);
  });
  return entries[1].m;
}

struct ModelComparisonRow {
  std::string country;
  double nrmse_power = kMissing;
  double nrmse_wf = kMissing;
  double nrmse_linear = kMissing;
  ModelKind best = ModelKind::WeberFechner;
  ModelKind second = ModelKind::PowerLaw;
};

struct ModelComparison {
  std::vector<ModelComparisonRow> rows;
  double mean_power = kMissing, mean_wf = kMissing, mean_linear = kMissing;
  double prop_best_power = 0, prop_best_wf = 0, prop_best_linear = 0;
  double prop_second_power = 0, prop_second_wf = 0, prop_second_linear = 0;
};

inline ModelComparison compare_models(std::vector<ModelComparisonRow> rows) {
  ModelComparison out;
  out.rows = std::move(rows);
  if (out.rows.empty()) return out;
  KahanSum sp, sw, sl;
  int bp = 0, bw = 0, bl = 0, sp2 = 0, sw2 = 0, sl2 = 0;
  for (auto& row : out.rows) {
    row.best = best_model(row.nrmse_wf, row.nrmse_power, row.nrmse_linear);
    row.second = second_model(row.nrmse_wf, row.nrmse_power, row.nrmse_linear);
    sp.add(row.nrmse_power);
    sw.add(row.nrmse_wf);
    sl.add(row.nrmse_linear);
    (row.best == ModelKind::PowerLaw ? bp : row.best == ModelKind::WeberFechner ? bw : bl) += 1;
    (row.second == ModelKind::PowerLaw  ? sp2
     : row.second == ModelKind::WeberFechner ? sw2
                                             : sl2) += 1;
  }
  const double n = static_cast<double>(out.rows.size());
  out.mean_power = sp.value() / n;
  out.mean_wf = sw.value() / n;
  out.mean_linear = sl.value() / n;
  out.prop_best_power = bp / n;
  out.prop_best_wf = bw / n;
  out.prop_best_linear = bl / n;
  out.prop_second_power = sp2 / n;
  out.prop_second_wf = sw2 / n;
  out.prop_second_linear = sl2 / n;
  return out;
}

// Average ranks in descending order of value (rank 1 = most sensitive).
inline std::vector<double> descending_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

struct RankComparison {
  std::vector<std::string> countries;  // sorted
  std::vector<double> sensitivity_a, sensitivity_b;
  std::vector<double> rank_a, rank_b;
  double rank_correlation = kMissing;  // Spearman
};

// Spearman agreement of two per-country sensitivity maps (e.g. k vs beta).
inline RankComparison rank_compare(const std::map<std::string, double>& a,
                                   const std::map<std::string, double>& b) {
  std::string diff;
  for (const auto& [c, v] : a) {
    if (!b.count(c)) diff += " " + c + "(first-only)";
  }
  for (const auto& [c, v] : b) {
    if (!a.count(c)) diff += " " + c + "(second-only)";
  }
  if (!diff.empty()) throw DataError("rank_compare: country sets differ:" + diff);
  if (a.size() < 3) throw DataError("rank_compare: need at least 3 countries");

  RankComparison out;
  for (const auto& [c, v] : a) {
    out.countries.push_back(c);
    out.sensitivity_a.push_back(v);
    out.sensitivity_b.push_back(b.at(c));
  }
  out.rank_a = descending_ranks(out.sensitivity_a);
  out.rank_b = descending_ranks(out.sensitivity_b);

  // Spearman = Pearson over the rank vectors
  std::vector<std::pair<double, double>> pairs;
  for (size_t i = 0; i < out.rank_a.size(); ++i) pairs.emplace_back(out.rank_a[i], out.rank_b[i]);
  out.rank_correlation = pearson_pairs(pairs).r;
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot-level correlations (rho_Q, rho_f)

enum class SnapshotAlignment { Midpoint, Start, End };

inline Date snapshot_date(Date start, Date end, SnapshotAlignment align) {
  switch (align) {
    case SnapshotAlignment::Start:
      return start;
    case SnapshotAlignment::End:
      return end;
    default:
      return start + (end - start) / 2;
  }
}

struct SnapshotCorrelation {
  double r = kMissing;
  size_t n = 0;
  std::vector<Date> dates;       // aligned nominal dates, one per usable snapshot
  std::vector<double> log_s;     // log of mean daily deaths within each range
  std::vector<double> measure;
};

// Pearson between a per-snapshot measure and log mean daily deaths within
// each snapshot range. Snapshots with no positive stimulus or a missing
// measure are dropped.
inline SnapshotCorrelation correlate_snapshots(std::span<const std::pair<Date, Date>> ranges,
                                               std::span<const double> measure,
                                               const DailySeries& stimulus,
                                               SnapshotAlignment align = SnapshotAlignment::Midpoint) {
  if (ranges.size() != measure.size()) {
    throw InternalError("correlate_snapshots: length mismatch");
  }
  SnapshotCorrelation out;
  std::vector<std::pair<double, double>> pairs;
  for (size_t i = 0; i < ranges.size(); ++i) {
    if (is_missing(measure[i])) continue;
    KahanSum sum;
    size_t cnt = 0;
    for (Date d = ranges[i].first; d <= ranges[i].second; ++d) {
      const double v = stimulus.at_date(d);
      if (is_missing(v)) continue;
      sum.add(v);
      ++cnt;
    }
    if (cnt == 0) continue;
    const double s_mean = sum.value() / static_cast<double>(cnt);
    if (!(s_mean > 0.0)) continue;
    out.dates.push_back(snapshot_date(ranges[i].first, ranges[i].second, align));
    out.log_s.push_back(std::log(s_mean));
    out.measure.push_back(measure[i]);
    pairs.emplace_back(out.log_s.back(), measure[i]);
  }
  const PearsonResult pr = pearson_pairs(pairs);
  out.r = pr.r;
  out.n = pr.n;
  return out;
}

}  // namespace percept
