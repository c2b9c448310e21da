// Command-line front end for the isochrony-aware translation pipeline.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isomt/errors.h"
#include "isomt/experiment.h"

namespace {

struct Common {
  std::string config_path;
  std::string dir = "run";
  std::vector<std::string> sets;
  bool force = false;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "key = value experiment config");
  cmd->add_option("-d,--dir", c.dir, "experiment directory")->capture_default_str();
  cmd->add_option("-s,--set", c.sets, "override a config key, key=value (repeatable)");
  cmd->add_flag("-f,--force", c.force, "overwrite existing outputs");
}

isomt::ExperimentConfig Resolve(const Common& c) {
  isomt::ExperimentConfig config =
      c.config_path.empty() ? isomt::ExperimentConfig() : isomt::ExperimentConfig::Load(c.config_path);
  for (const auto& s : c.sets) config.SetAssignment(s);
  return config;
}

void Log(const std::string& line) { std::cerr << line << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isomt: isochrony-aware machine translation with target factors and counters"};
  app.require_subcommand(1);

  Common prepare_opts, train_opts, translate_opts, evaluate_opts, ablate_opts;
  std::string translate_name = "output", evaluate_name = "output";

  auto* prepare = app.add_subcommand("prepare", "build vocabularies, bins, BPE and prepared corpora");
  AddCommon(prepare, prepare_opts);
  auto* train = app.add_subcommand("train", "train a model on the prepared corpus");
  AddCommon(train, train_opts);
  auto* translate = app.add_subcommand("translate", "decode a prepared split with the best checkpoint");
  AddCommon(translate, translate_opts);
  translate->add_option("-n,--name", translate_name, "output name under translations/")
      ->capture_default_str();
  auto* evaluate = app.add_subcommand("evaluate", "score translations: BLEU, speech overlap, wrong pauses");
  AddCommon(evaluate, evaluate_opts);
  evaluate->add_option("-n,--name", evaluate_name, "translation name to score")->capture_default_str();
  auto* ablate = app.add_subcommand("ablate", "run every grid.<key> cell end to end and tabulate");
  AddCommon(ablate, ablate_opts);
  auto* keys = app.add_subcommand("keys", "list config keys with defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      isomt::Prepare(Resolve(prepare_opts), prepare_opts.dir, prepare_opts.force, Log);
    } else if (*train) {
      const auto result = isomt::TrainExperiment(Resolve(train_opts), train_opts.dir, train_opts.force, Log);
      std::cout << "best epoch " << result.best_epoch << " score " << result.best_score << " after "
                << result.updates << " updates\n";
    } else if (*translate) {
      isomt::TranslateExperiment(Resolve(translate_opts), translate_opts.dir, translate_name,
                                 translate_opts.force, Log);
    } else if (*evaluate) {
      const auto report = isomt::EvaluateExperiment(Resolve(evaluate_opts), evaluate_opts.dir,
                                                    evaluate_name, evaluate_opts.force);
      std::cout << isomt::FormatReportTable({report});
    } else if (*ablate) {
      const auto cells = isomt::Ablate(Resolve(ablate_opts), ablate_opts.dir, ablate_opts.force, Log);
      std::vector<isomt::EvalReport> rows;
      int failed = 0;
      for (const auto& c : cells) {
        if (c.ok) rows.push_back(c.report);
        failed += !c.ok;
      }
      std::cout << isomt::FormatReportTable(rows);
      if (failed > 0) {
        std::cerr << failed << " of " << cells.size() << " cells failed; see ablation/report.txt\n";
        return 1;
      }
    } else if (*keys) {
      for (const auto& k : isomt::ExperimentConfig::Keys()) {
        std::cout << k.name << " = " << k.default_value;
        if (!k.help.empty()) std::cout << "    # " << k.help;
        std::cout << '\n';
      }
    }
  } catch (const isomt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
