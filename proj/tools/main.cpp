#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "percept/pipeline.hpp"

namespace {

// exit codes: 0 ok, 1 usage/config, 2 data, 3 internal invariant
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Overrides {
  std::string config_path;
  int64_t seed = -1;
  int threads = 0;
  std::string output_dir;
  std::string dump_patterns;
};

percept::PipelineConfig effective_config(const Overrides& ov) {
  auto cfg = percept::load_config(ov.config_path);
  if (ov.seed >= 0) cfg.seed = static_cast<uint64_t>(ov.seed);
  if (ov.threads > 0) cfg.threads = ov.threads;
  if (!ov.output_dir.empty()) cfg.paths.output_dir = ov.output_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"percept: lexicon scoring, co-occurrence networks, and psychophysical fits "
               "for document streams"};
  app.require_subcommand(1);

  Overrides ov;
  app.add_option("-c,--config", ov.config_path, "pipeline config (JSON)")->required();
  app.add_option("--seed", ov.seed, "override config seed");
  app.add_option("--threads", ov.threads, "override config thread count");
  app.add_option("--output-dir", ov.output_dir, "override config output directory");

  auto* validate = app.add_subcommand("validate", "check config, lexicon, and referenced paths");
  validate->add_option("--dump-patterns", ov.dump_patterns,
                       "write the compiled lexicon pattern table to this file");
  auto* score = app.add_subcommand("score", "compute National Linguistic Score series");
  auto* correlate = app.add_subcommand("correlate", "correlate NLS with epidemiological series");
  auto* net = app.add_subcommand("net", "build co-occurrence snapshots and partition measures");
  auto* nul = app.add_subcommand("null", "configuration-model null ensembles per snapshot");
  auto* fit = app.add_subcommand("fit", "fit perception models and comparison tables");
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted truth");
  auto* report = app.add_subcommand("report", "join stage outputs into table/figure CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto cfg = effective_config(ov);
    if (validate->parsed()) {
      percept::run_validate(cfg, ov.dump_patterns);
      std::cout << "config OK\n";
    } else if (score->parsed()) {
      percept::run_score(cfg);
    } else if (correlate->parsed()) {
      percept::run_correlate(cfg);
    } else if (net->parsed()) {
      percept::run_net(cfg);
    } else if (nul->parsed()) {
      percept::run_null(cfg);
    } else if (fit->parsed()) {
      percept::run_fit(cfg);
    } else if (synth->parsed()) {
      percept::run_synth(cfg);
    } else if (report->parsed()) {
      percept::run_report(cfg);
    }
    return 0;
  } catch (const percept::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const percept::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
