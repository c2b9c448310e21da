#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "isomt/errors.h"
#include "isomt/experiment.h"
#include "json.hpp"

namespace isomt {

namespace fs = std::filesystem;

std::vector<AblationCell> ExpandGrid(const ExperimentConfig& config) {
  const auto& grid = config.grid();
  if (grid.empty()) throw ConfigError("ablate needs at least one grid.<key> axis");
  std::vector<AblationCell> cells{AblationCell{}};
  for (const auto& [axis, values] : grid) {
    std::vector<AblationCell> next;
    for (const AblationCell& cell : cells) {
      for (const std::string& v : values) {
        AblationCell c = cell;
        c.settings[axis] = v;
        c.name += (c.name.empty() ? "" : " ") + axis + "=" + v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  for (const AblationCell& cell : cells) {
    ExperimentConfig c = config;
    for (const auto& [k, v] : cell.settings) c.Set(k, v);
    if (c.Get("counters") != "none") {
      try {
        ValidateCounterSet(c.GetList("counters"));
      } catch (const ConfigError& e) {
        throw ConfigError("grid cell '" + cell.name + "': " + e.what());
      }
    }
  }
  return cells;
}

std::vector<AblationCell> Ablate(const ExperimentConfig& config, const std::string& dir, bool force,
                                 const Logger& log) {
  std::vector<AblationCell> cells = ExpandGrid(config);
  const ExperimentPaths paths{dir};
  const std::string report_path = (fs::path(paths.Ablation()) / "report.jsonl").string();
  if (!force && fs::exists(report_path)) {
    throw ConfigError(report_path + " already exists; rerun ablate with --force to overwrite");
  }
  fs::create_directories(paths.Ablation());
  std::mutex log_mutex;
  auto run_cell = [&](std::size_t index) {
    AblationCell& cell = cells[index];
    ExperimentConfig c = config;
    c.ClearGrid();
    for (const auto& [k, v] : cell.settings) c.Set(k, v);
    const std::string cell_dir = (fs::path(paths.Ablation()) / ("cell" + std::to_string(index))).string();
    try {
      Prepare(c, cell_dir, force);
      TrainExperiment(c, cell_dir, force);
      TranslateExperiment(c, cell_dir, "output", force);
      cell.report = EvaluateExperiment(c, cell_dir, "output", force);
      cell.report.name = cell.name;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    if (log) {
      std::lock_guard lock(log_mutex);
      log("cell " + std::to_string(index) + " [" + cell.name + "] " +
          (cell.ok ? "overlap " + std::to_string(cell.report.speech_overlap) + " bleu " +
                         std::to_string(cell.report.bleu)
                   : "failed: " + cell.error));
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1L, config.GetInt("workers")));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::mutex next_mutex;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, cells.size()); ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard lock(next_mutex);
            if (next >= cells.size()) return;
            i = next++;
          }
          run_cell(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::ofstream report(report_path, std::ios::binary);
  std::vector<EvalReport> rows;
  for (const AblationCell& cell : cells) {
    nlohmann::json j{{"name", cell.name}, {"settings", cell.settings}, {"ok", cell.ok}};
    if (cell.ok) {
      j["report"] = nlohmann::json::parse(cell.report.ToJson());
      rows.push_back(cell.report);
    } else {
      j["error"] = cell.error;
    }
    report << j.dump() << '\n';
  }
  std::ostringstream table;
  table << FormatReportTable(rows);
  for (const AblationCell& cell : cells)
    if (!cell.ok) table << "FAILED  " << cell.name << ": " << cell.error << '\n';
  std::ofstream(fs::path(paths.Ablation()) / "report.txt", std::ios::binary) << table.str();

  bool noise_axis = false;
  for (const auto& [axis, values] : config.grid()) noise_axis |= axis == "noise_sigma";
  if (noise_axis) {
    std::ofstream series(fs::path(paths.Ablation()) / "noise_series.tsv", std::ios::binary);
    series << "cell\tnoise_sigma\tbleu\tspeech_overlap\n";
    for (const AblationCell& cell : cells) {
      if (!cell.ok) continue;
      series << cell.name << '\t' << cell.settings.at("noise_sigma") << '\t' << cell.report.bleu << '\t'
             << cell.report.speech_overlap << '\n';
    }
  }
  std::ofstream(fs::path(paths.Ablation()) / "config.txt", std::ios::binary) << config.Serialize();
  return cells;
}

}  // namespace isomt
