#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "percept/psychfit.hpp"
#include "test_util.hpp"

using namespace percept;

namespace {

FitSample sample_from(std::vector<double> s, std::vector<double> p) {
  FitSample out;
  out.s = std::move(s);
  out.p = std::move(p);
  return out;
}

}  // namespace

TEST_CASE("ols recovers a noiseless line") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i + 1.0);
  }
  const auto res = ols(x, y);
  CHECK(res.slope == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(res.intercept == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(res.p_value == Catch::Approx(0.0).margin(1e-12));
  CHECK(res.ci_lo <= res.slope);
  CHECK(res.ci_hi >= res.slope);
}

TEST_CASE("ols rejects degenerate inputs") {
  std::vector<double> two{1, 2}, x_const{3, 3, 3}, y{1, 2, 3};
  CHECK_THROWS_AS(ols(two, two), DataError);
  CHECK_THROWS_AS(ols(x_const, y), DataError);
}

TEST_CASE("ols on independent noise rarely finds significance") {
  int insignificant = 0;
  const int runs = 100;
  for (int run = 0; run < runs; ++run) {
    std::mt19937_64 rng(derive_seed(777, 1, run));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(200), y(200);
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = gauss(rng);
      y[i] = gauss(rng);
    }
    const auto res = ols(x, y);
    CHECK(std::abs(res.slope) < 0.5);
    if (res.p_value > 0.05) ++insignificant;
  }
  CHECK(insignificant >= 90);
}

TEST_CASE("ols p-value agrees with the numerical integration oracle") {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(40), y(40);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i);
    y[i] = 0.05 * x[i] + gauss(rng);
  }
  const auto res = ols(x, y);
  const double oracle =
      testutil::student_t_two_sided_p_oracle(res.t_stat, static_cast<double>(res.n - 2));
  CHECK(res.p_value == Catch::Approx(oracle).margin(1e-6));
}

TEST_CASE("weber-fechner noiseless inversion") {
  std::vector<double> s, p;
  for (int i = 1; i <= 30; ++i) {
    s.push_back(i * 3.0);
    p.push_back(0.8 * std::log(i * 3.0 / 5.0));
  }
  const auto fit = fit_weber_fechner(sample_from(s, p));
  CHECK(fit.sensitivity == Catch::Approx(0.8).epsilon(1e-9));
  CHECK(fit.scale == Catch::Approx(5.0).epsilon(1e-9));
  CHECK(fit.nrmse == Catch::Approx(0.0).margin(1e-12));
  CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
  CHECK(fit.n == 30);
}

TEST_CASE("weber-fechner drops nonpositive stimulus days and counts them") {
  std::vector<double> s{-1.0, 0.0, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> p;
  for (double sv : s) p.push_back(sv > 0 ? 0.5 * std::log(sv / 2.0) : 99.0);
  const auto fit = fit_weber_fechner(sample_from(s, p));
  CHECK(fit.dropped_nonpos_s == 2);
  CHECK(fit.n == 4);
  CHECK(fit.sensitivity == Catch::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("weber-fechner reports infinite threshold for non-positive slope") {
  // p decreasing in log s: k < 0, Spain-like
  std::vector<double> s{1, 2, 4, 8, 16};
  std::vector<double> p{5, 4, 3, 2, 1};
  const auto fit = fit_weber_fechner(sample_from(s, p));
  CHECK(fit.sensitivity < 0.0);
  CHECK(std::isinf(fit.scale));
  CHECK(fit.scale > 0.0);
}

TEST_CASE("weber-fechner equivariance under stimulus rescaling") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> gauss(0.0, 0.3);
  std::vector<double> s, p;
  for (int i = 1; i <= 60; ++i) {
    s.push_back(std::exp(0.1 * i));
    p.push_back(0.7 * std::log(s.back() / 3.0) + gauss(rng));
  }
  const auto base = fit_weber_fechner(sample_from(s, p));
  const double c = 12.5;
  std::vector<double> cs;
  for (double v : s) cs.push_back(c * v);
  const auto scaled = fit_weber_fechner(sample_from(cs, p));
  CHECK(scaled.sensitivity == Catch::Approx(base.sensitivity).epsilon(1e-9));
  CHECK(scaled.scale == Catch::Approx(c * base.scale).epsilon(1e-9));
  CHECK(scaled.nrmse == Catch::Approx(base.nrmse).epsilon(1e-9));
  CHECK(scaled.r_squared == Catch::Approx(base.r_squared).epsilon(1e-9));
}

TEST_CASE("power law noiseless inversion") {
  std::vector<double> s, p;
  for (int i = 1; i <= 25; ++i) {
    s.push_back(i);
    p.push_back(2.0 * std::sqrt(i));
  }
  const auto fit = fit_power_law(sample_from(s, p));
  CHECK(fit.sensitivity == Catch::Approx(0.5).epsilon(1e-9));
  CHECK(fit.scale == Catch::Approx(2.0).epsilon(1e-9));
  CHECK(fit.nrmse == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("power law drops nonpositive perception values") {
  std::vector<double> s{1, 2, 3, 4, 5, 6};
  std::vector<double> p{-0.5, 0.0, 1.0, 1.3, 1.5, 1.7};
  const auto fit = fit_power_law(sample_from(s, p));
  CHECK(fit.dropped_nonpos_p == 2);
  CHECK(fit.n == 4);
}

TEST_CASE("power law beta is invariant under stimulus rescaling") {
  std::mt19937_64 rng(66);
  std::normal_distribution<double> gauss(0.0, 0.05);
  std::vector<double> s, p;
  for (int i = 1; i <= 50; ++i) {
    s.push_back(i * 2.0);
    p.push_back(1.5 * std::pow(s.back(), 0.32) * std::exp(gauss(rng)));
  }
  const auto base = fit_power_law(sample_from(s, p));
  const double c = 7.0;
  std::vector<double> cs;
  for (double v : s) cs.push_back(c * v);
  const auto scaled = fit_power_law(sample_from(cs, p));
  CHECK(scaled.sensitivity == Catch::Approx(base.sensitivity).epsilon(1e-9));
  // nu rescales by c^-beta
  CHECK(scaled.scale ==
        Catch::Approx(base.scale * std::pow(c, -base.sensitivity)).epsilon(1e-9));
}

TEST_CASE("power law R^2 on the linear scale can go negative") {
  // log-log fit dominated by low-s points mispredicts the linear scale badly
  std::vector<double> s{1, 1.1, 1.2, 1.3, 500, 600};
  std::vector<double> p{0.01, 100, 0.01, 100, 50, 49};
  const auto fit = fit_power_law(sample_from(s, p));
  CHECK(fit.r_squared < 0.0);
  CHECK(fit.nrmse >= 0.0);
}

TEST_CASE("linear noiseless inversion and no filtering") {
  std::vector<double> s{-5, 0, 10, 20, 40};
  std::vector<double> p;
  for (double sv : s) p.push_back(0.05 * sv + 2.0);
  const auto fit = fit_linear(sample_from(s, p));
  CHECK(fit.sensitivity == Catch::Approx(0.05).epsilon(1e-12));
  CHECK(fit.scale == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(fit.n == 5);  // negative and zero stimulus retained
  CHECK(fit.dropped_nonpos_s == 0);
}

TEST_CASE("fits fail loudly when too few pairs remain") {
  std::vector<double> s{-1, -2, -3, 1, 2};
  std::vector<double> p{1, 1, 1, 1, 1};
  CHECK_THROWS_WITH(fit_weber_fechner(sample_from(s, p)),
                    Catch::Matchers::ContainsSubstring("2 usable pairs"));
  std::vector<double> tiny_s{1, 2};
  std::vector<double> tiny_p{1, 2};
  CHECK_THROWS_AS(fit_linear(sample_from(tiny_s, tiny_p)), DataError);
}

TEST_CASE("nrmse fixtures") {
  std::vector<double> p{0.0, 2.0};
  std::vector<double> p_hat{1.0, 1.0};
  CHECK(nrmse(p, p_hat) == Catch::Approx(0.5).margin(1e-15));
  CHECK(nrmse(p, p) == 0.0);
  std::vector<double> flat{3.0, 3.0};
  CHECK_THROWS_AS(nrmse(flat, p_hat), DataError);
}

TEST_CASE("nrmse is invariant under joint positive scaling") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<double> p(50), q(50);
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = dist(rng);
    q[i] = dist(rng);
  }
  const double base = nrmse(p, q);
  for (double c : {0.5, 3.0, 1000.0}) {
    std::vector<double> cp = p, cq = q;
    for (auto& v : cp) v *= c;
    for (auto& v : cq) v *= c;
    CHECK(nrmse(cp, cq) == Catch::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("r_squared fixtures and naive oracle") {
  std::vector<double> p{1.0, 2.0, 3.0, 4.0};
  CHECK(r_squared(p, p) == 1.0);
  const double mu = 2.5;
  std::vector<double> pm(4, mu);
  CHECK(r_squared(p, pm) == Catch::Approx(0.0).margin(1e-15));
  std::vector<double> worse{4.0, 1.0, 5.0, 0.0};
  CHECK(r_squared(p, worse) < 0.0);

  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> obs(200), pred(200);
  for (size_t i = 0; i < obs.size(); ++i) {
    obs[i] = gauss(rng) * 3.0 + 1.0;
    pred[i] = obs[i] + gauss(rng) * 0.5;
  }
  long double m = 0;
  for (double v : obs) m += v;
  m /= obs.size();
  long double sse = 0, sst = 0;
  for (size_t i = 0; i < obs.size(); ++i) {
    sse += (obs[i] - pred[i]) * (obs[i] - pred[i]);
    sst += (obs[i] - m) * (obs[i] - m);
  }
  const double oracle = static_cast<double>(1.0L - sse / sst);
  CHECK(r_squared(obs, pred) == Catch::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("best model argmin with documented tie breaks") {
  CHECK(best_model(0.1, 0.2, 0.3) == ModelKind::WeberFechner);
  CHECK(best_model(0.2, 0.1, 0.3) == ModelKind::PowerLaw);
  CHECK(best_model(0.3, 0.2, 0.1) == ModelKind::Linear);
  // ties prefer Weber-Fechner > power > linear
  CHECK(best_model(0.1, 0.1, 0.1) == ModelKind::WeberFechner);
  CHECK(best_model(0.2, 0.1, 0.1) == ModelKind::PowerLaw);
  CHECK(second_model(0.1, 0.2, 0.3) == ModelKind::PowerLaw);
  CHECK(second_model(0.1, 0.3, 0.2) == ModelKind::Linear);
  CHECK(second_model(0.1, 0.1, 0.1) == ModelKind::PowerLaw);
}

TEST_CASE("model comparison proportions") {
  std::vector<ModelComparisonRow> rows(4);
  rows[0].country = "AA";
  rows[0].nrmse_wf = 0.10;
  rows[0].nrmse_power = 0.11;
  rows[0].nrmse_linear = 0.2;
  rows[1].country = "BB";
  rows[1].nrmse_wf = 0.12;
  rows[1].nrmse_power = 0.11;
  rows[1].nrmse_linear = 0.2;
  rows[2].country = "CC";
  rows[2].nrmse_wf = 0.3;
  rows[2].nrmse_power = 0.25;
  rows[2].nrmse_linear = 0.2;
  rows[3].country = "DD";
  rows[3].nrmse_wf = 0.10;
  rows[3].nrmse_power = 0.2;
  rows[3].nrmse_linear = 0.3;
  const auto comp = compare_models(rows);
  CHECK(comp.prop_best_wf == Catch::Approx(0.5));
  CHECK(comp.prop_best_power == Catch::Approx(0.25));
  CHECK(comp.prop_best_linear == Catch::Approx(0.25));
  CHECK(comp.mean_wf == Catch::Approx((0.10 + 0.12 + 0.3 + 0.10) / 4.0));
}

TEST_CASE("rank comparison basics") {
  std::map<std::string, double> a{{"X", 3.0}, {"Y", 2.0}, {"Z", 1.0}};
  std::map<std::string, double> same = a;
  CHECK(rank_compare(a, same).rank_correlation == Catch::Approx(1.0));
  std::map<std::string, double> reversed{{"X", 1.0}, {"Y", 2.0}, {"Z", 3.0}};
  CHECK(rank_compare(a, reversed).rank_correlation == Catch::Approx(-1.0));
  std::map<std::string, double> mismatched{{"X", 1.0}, {"Y", 2.0}, {"W", 3.0}};
  CHECK_THROWS_WITH(rank_compare(a, mismatched), Catch::Matchers::ContainsSubstring("W"));
}

TEST_CASE("ties receive average ranks") {
  const std::vector<double> vals{5.0, 5.0, 1.0};
  const auto ranks = descending_ranks(vals);
  CHECK(ranks[0] == Catch::Approx(1.5));
  CHECK(ranks[1] == Catch::Approx(1.5));
  CHECK(ranks[2] == Catch::Approx(3.0));
}

TEST_CASE("published sensitivity columns agree at rank correlation 0.77") {
  // k (Weber-Fechner slope) and beta (power-law exponent) per country
  const std::map<std::string, double> k{
      {"Argentina", 1.044}, {"Australia", 1.042},      {"Canada", 0.596},
      {"Chile", 0.575},     {"Colombia", 0.604},       {"India", 0.332},
      {"Mexico", 0.846},    {"Nigeria", 0.457},        {"South Africa", 0.282},
      {"Spain", -0.016},    {"United Kingdom", 0.752}, {"United States", 0.788}};
  const std::map<std::string, double> beta{
      {"Argentina", 0.164}, {"Australia", 0.363},      {"Canada", 0.288},
      {"Chile", 0.085},     {"Colombia", 0.112},       {"India", 0.126},
      {"Mexico", 0.141},    {"Nigeria", 0.104},        {"South Africa", 0.087},
      {"Spain", 0.014},     {"United Kingdom", 0.356}, {"United States", 0.309}};
  const auto rc = rank_compare(k, beta);
  CHECK(rc.rank_correlation == Catch::Approx(0.77).margin(0.01));
}

TEST_CASE("make_fit_sample drops pairs with either side missing") {
  DailySeries p{parse_date("2020-01-01"), {1.0, kMissing, 3.0, 4.0}};
  DailySeries s{parse_date("2020-01-01"), {10.0, 20.0, kMissing, 40.0}};
  const auto sample = make_fit_sample(p, s);
  REQUIRE(sample.p.size() == 2);
  CHECK(sample.p == std::vector<double>{1.0, 4.0});
  CHECK(sample.s == std::vector<double>{10.0, 40.0});
  CHECK(sample.dates.size() == 2);
}

TEST_CASE("snapshot correlation over log mean stimulus") {
  // measure rises exactly with log mean deaths -> correlation 1
  DailySeries deaths{parse_date("2020-01-01"), {}};
  for (int i = 0; i < 30; ++i) deaths.values.push_back(std::exp(0.2 * i));
  std::vector<std::pair<Date, Date>> ranges;
  std::vector<double> measure;
  for (int snap = 0; snap < 10; ++snap) {
    const Date start = parse_date("2020-01-01") + snap * 3;
    ranges.emplace_back(start, start + 2);
    double m = 0.0;
    for (int d = 0; d < 3; ++d) m += deaths.values[static_cast<size_t>(snap * 3 + d)];
    measure.push_back(std::log(m / 3.0));
  }
  const auto res = correlate_snapshots(ranges, measure, deaths);
  CHECK(res.n == 10);
  CHECK(res.r == Catch::Approx(1.0).margin(1e-12));
  // midpoint alignment dates
  CHECK(res.dates.front() == parse_date("2020-01-02"));

  // snapshots with a missing measure are dropped
  measure[3] = kMissing;
  const auto res2 = correlate_snapshots(ranges, measure, deaths);
  CHECK(res2.n == 9);
}
