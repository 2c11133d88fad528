#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <sstream>

#include "percept/corpus.hpp"

using namespace percept;

namespace {

std::vector<RawDocument> load_from_string(const std::string& text,
                                          MalformedPolicy policy = MalformedPolicy::Skip,
                                          IngestReport* report = nullptr) {
  std::istringstream in(text);
  std::vector<RawDocument> docs;
  auto r = load_documents(in, [&](RawDocument&& d) { docs.push_back(std::move(d)); }, policy);
  if (report) *report = r;
  return docs;
}

}  // namespace

TEST_CASE("jsonl identity round trip") {
  const auto docs = load_from_string(
      R"({"id":"1","timestamp":"2020-03-11","country":"US","lang":"en","text":"covid deaths rise"})"
      "\n");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].id == "1");
  CHECK(to_string(docs[0].date) == "2020-03-11");
  CHECK(docs[0].country == "US");
  CHECK(docs[0].lang == "en");
  CHECK(docs[0].text == "covid deaths rise");
}

TEST_CASE("empty corpus file") {
  IngestReport report;
  const auto docs = load_from_string("", MalformedPolicy::Skip, &report);
  CHECK(docs.empty());
  CHECK(report.loaded == 0);
  CHECK(report.skipped == 0);
}

TEST_CASE("malformed lines: skip mode counts, abort mode throws") {
  const std::string text =
      R"({"id":"1","timestamp":"2020-03-11","country":"US","lang":"en","text":"a"})"
      "\n"
      R"({"id":"2","timestamp":"2020-03-11","country":"US","lang":"en","text":"b"})"
      "\n"
      "this is not json\n"
      R"({"id":"3","timestamp":"2020-03-12","country":"GB","lang":"en","text":"c"})"
      "\n";
  IngestReport report;
  const auto docs = load_from_string(text, MalformedPolicy::Skip, &report);
  CHECK(docs.size() == 3);
  CHECK(report.loaded == 3);
  CHECK(report.skipped == 1);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].first == 3);  // line number

  CHECK_THROWS_AS(load_from_string(text, MalformedPolicy::Abort), DataError);
}

TEST_CASE("missing fields and duplicate ids are malformed") {
  const std::string text =
      R"({"id":"1","timestamp":"2020-03-11","country":"US","lang":"en"})"
      "\n"
      R"({"id":"2","timestamp":"2020-03-11","country":"US","lang":"en","text":"x"})"
      "\n"
      R"({"id":"2","timestamp":"2020-03-12","country":"US","lang":"en","text":"y"})"
      "\n";
  IngestReport report;
  const auto docs = load_from_string(text, MalformedPolicy::Skip, &report);
  CHECK(docs.size() == 1);
  CHECK(report.skipped == 2);
}

TEST_CASE("document writer round trips through the loader") {
  RawDocument d{"id-7", parse_date("2020-05-01"), "ES", "es", "hola \"mundo\" ñ"};
  std::ostringstream os;
  write_document(os, d);
  const auto docs = load_from_string(os.str());
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].id == d.id);
  CHECK(docs[0].text == d.text);
  CHECK(docs[0].date == d.date);
}

TEST_CASE("epi loading keeps negative values and flags them") {
  std::istringstream in(
      "date,iso_code,new_deaths,new_cases\n"
      "2020-05-24,ES,100,900\n"
      "2020-05-25,ES,-1918,500\n"
      "2020-05-26,ES,50,400\n");
  const auto epi = load_epi(in);
  REQUIRE(epi.count("ES") == 1);
  const auto& es = epi.at("ES");
  CHECK(es.deaths.at_date(parse_date("2020-05-25")) == -1918.0);
  CHECK(es.negative_deaths == 1);
  CHECK(es.negative_cases == 0);
}

TEST_CASE("epi identity for consecutive days") {
  std::istringstream in(
      "date,iso_code,new_deaths,new_cases\n"
      "2020-03-01,US,1,10\n"
      "2020-03-02,US,2,20\n"
      "2020-03-03,US,3,30\n");
  const auto epi = load_epi(in);
  const auto& us = epi.at("US");
  CHECK(us.deaths.values == std::vector<double>{1, 2, 3});
  CHECK(us.cases.values == std::vector<double>{10, 20, 30});
}

TEST_CASE("epi gap days become missing and span is preserved") {
  std::istringstream in(
      "date,iso_code,new_deaths,new_cases\n"
      "2020-03-01,US,1,10\n"
      "2020-03-04,US,4,40\n");
  const auto epi = load_epi(in);
  const auto& us = epi.at("US");
  REQUIRE(us.deaths.size() == 4);
  CHECK(us.deaths[0] == 1.0);
  CHECK(is_missing(us.deaths[1]));
  CHECK(is_missing(us.deaths[2]));
  CHECK(us.deaths[3] == 4.0);
}

TEST_CASE("epi requires the configured columns") {
  std::istringstream in("date,location,deaths\n2020-03-01,US,1\n");
  CHECK_THROWS_WITH(load_epi(in), Catch::Matchers::ContainsSubstring("iso_code"));
}

TEST_CASE("epi honors custom column names") {
  std::istringstream in("day,cc,d,c\n2020-03-01,US,1,10\n");
  EpiColumns cols{"day", "cc", "d", "c"};
  const auto epi = load_epi(in, cols);
  CHECK(epi.at("US").deaths[0] == 1.0);
}

TEST_CASE("epi normalized csv is a fixed point") {
  std::istringstream in(
      "extra,date,iso_code,new_deaths,new_cases\n"
      "x,2020-03-02,US,2,\n"
      "x,2020-03-01,US,1.5,10\n"
      "x,2020-03-01,GB,7,70\n");
  const auto epi1 = load_epi(in);
  std::ostringstream os1;
  write_epi_csv(os1, epi1);
  std::istringstream in2(os1.str());
  const auto epi2 = load_epi(in2);
  std::ostringstream os2;
  write_epi_csv(os2, epi2);
  CHECK(os1.str() == os2.str());
  CHECK(epi2.at("US").deaths[0] == 1.5);
  CHECK(is_missing(epi2.at("US").cases[1]));
}

TEST_CASE("apply_exclusions masks matching windows") {
  DailySeries s{parse_date("2020-01-01"), std::vector<double>(10, 1.0)};
  std::vector<ExclusionWindow> windows{
      {"US", parse_date("2020-01-04"), parse_date("2020-01-05"), "Death", ""}};
  const auto report = apply_exclusions(s, windows, "US", "Death");
  CHECK(report.removed == 2);
  CHECK(s.count_present() == 8);
  CHECK(is_missing(s.values[3]));
  CHECK(is_missing(s.values[4]));
  CHECK(s.values[5] == 1.0);
}

TEST_CASE("apply_exclusions ignores other countries and kinds") {
  DailySeries s{parse_date("2020-01-01"), std::vector<double>(5, 1.0)};
  std::vector<ExclusionWindow> windows{
      {"GB", parse_date("2020-01-02"), parse_date("2020-01-03"), "Death", ""},
      {"US", parse_date("2020-01-02"), parse_date("2020-01-03"), "Anger", ""}};
  const auto report = apply_exclusions(s, windows, "US", "Death");
  CHECK(report.removed == 0);
  CHECK(s.count_present() == 5);
}

TEST_CASE("empty window list leaves series unchanged") {
  DailySeries s{parse_date("2020-01-01"), {1, 2, 3}};
  const auto report = apply_exclusions(s, {}, "US", "Death");
  CHECK(report.removed == 0);
  CHECK(s.values == std::vector<double>{1, 2, 3});
}

TEST_CASE("overlapping windows mask the union") {
  DailySeries s{parse_date("2020-01-01"), std::vector<double>(10, 1.0)};
  std::vector<ExclusionWindow> windows{
      {"US", parse_date("2020-01-02"), parse_date("2020-01-04"), "epi", ""},
      {"US", parse_date("2020-01-03"), parse_date("2020-01-06"), "epi", ""}};
  const auto report = apply_exclusions(s, windows, "US", "epi");
  CHECK(report.removed == 5);  // days 2..6
  for (size_t i = 1; i <= 5; ++i) CHECK(is_missing(s.values[i]));
  CHECK(s.values[0] == 1.0);
  CHECK(s.values[6] == 1.0);
}

TEST_CASE("window outside the series range is a counted no-op") {
  DailySeries s{parse_date("2020-01-01"), {1, 2, 3}};
  std::vector<ExclusionWindow> windows{
      {"US", parse_date("2021-01-01"), parse_date("2021-01-02"), "epi", ""}};
  const auto report = apply_exclusions(s, windows, "US", "epi");
  CHECK(report.removed == 0);
  CHECK(report.out_of_range_windows == 1);
}

TEST_CASE("apply_exclusions is idempotent") {
  DailySeries s{parse_date("2020-01-01"), std::vector<double>(10, 2.0)};
  std::vector<ExclusionWindow> windows{
      {"US", parse_date("2020-01-03"), parse_date("2020-01-07"), "epi", ""}};
  apply_exclusions(s, windows, "US", "epi");
  const auto once = s.values;
  const auto report2 = apply_exclusions(s, windows, "US", "epi");
  CHECK(report2.removed == 0);
  for (size_t i = 0; i < s.size(); ++i) {
    CHECK(is_missing(s.values[i]) == is_missing(once[i]));
    if (!is_missing(once[i])) CHECK(s.values[i] == once[i]);
  }
}

TEST_CASE("grouping partitions documents exactly") {
  std::vector<RawDocument> docs;
  docs.push_back({"1", parse_date("2020-03-11"), "US", "en", "a"});
  docs.push_back({"2", parse_date("2020-03-11"), "US", "en", "b"});
  docs.push_back({"3", parse_date("2020-03-11"), "GB", "en", "c"});
  const auto groups = group_documents(docs);
  REQUIRE(groups.size() == 2);
  CHECK(groups.at(SliceKey{"US", parse_date("2020-03-11")}).doc_indices.size() == 2);
  CHECK(groups.at(SliceKey{"GB", parse_date("2020-03-11")}).doc_indices.size() == 1);

  CHECK(group_documents(std::vector<RawDocument>{}).empty());
}

TEST_CASE("grouping a 1000-document fixture matches the fixture histogram") {
  std::mt19937_64 rng(123);
  const std::vector<std::string> countries{"US", "GB", "ES", "MX"};
  std::map<SliceKey, size_t> expected;
  std::vector<RawDocument> docs;
  for (int i = 0; i < 1000; ++i) {
    RawDocument d;
    d.id = std::to_string(i);
    d.country = countries[rng() % countries.size()];
    d.date = parse_date("2020-03-01") + static_cast<int32_t>(rng() % 30);
    d.lang = "en";
    ++expected[SliceKey{d.country, d.date}];
    docs.push_back(std::move(d));
  }
  const auto groups = group_documents(docs);
  REQUIRE(groups.size() == expected.size());
  size_t total = 0;
  for (const auto& [key, slice] : groups) {
    CHECK(slice.doc_indices.size() == expected.at(key));
    total += slice.doc_indices.size();
  }
  CHECK(total == docs.size());  // partition property
}

TEST_CASE("loaded exclusion windows validate date order") {
  const char* good = R"({"windows": [
    {"country": "ES", "start": "2020-05-24", "end": "2020-05-26", "kind": "Death", "note": "x"}]})";
  const auto windows = exclusions_from_json(nlohmann::json::parse(good));
  REQUIRE(windows.size() == 1);
  CHECK(windows[0].country == "ES");
  const char* bad = R"({"windows": [
    {"country": "ES", "start": "2020-05-26", "end": "2020-05-24", "kind": "Death"}]})";
  CHECK_THROWS_AS(exclusions_from_json(nlohmann::json::parse(bad)), DataError);
}
