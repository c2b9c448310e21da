#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "isomt/model.h"
#include "isomt/records.h"
#include "isomt/report.h"
#include "isomt/search.h"
#include "isomt/train.h"

namespace isomt {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Flat "key = value" document. Every key has a default; unknown keys are
// rejected. "grid.<key> = a | b | c" lines declare ablation axes.
class ExperimentConfig {
 public:
  static const std::vector<ConfigKey>& Keys();

  ExperimentConfig();
  static ExperimentConfig Parse(const std::string& text, const std::string& origin = "config");
  static ExperimentConfig Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  // "key=value"
  void SetAssignment(const std::string& assignment);

  const std::string& Get(const std::string& key) const;
  long GetInt(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  // Comma-separated, empty items dropped.
  std::vector<std::string> GetList(const std::string& key) const;

  const std::vector<std::pair<std::string, std::vector<std::string>>>& grid() const { return grid_; }
  void ClearGrid() { grid_.clear(); }

  // Every key in registry order, then grid axes; re-parses to an equal config.
  std::string Serialize() const;
  bool operator==(const ExperimentConfig&) const = default;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, std::vector<std::string>>> grid_;
};

// Throws ConfigError for counter sets the model cannot use: unknown names, or
// segment without pause (the segment counter reloads through the pause count).
void ValidateCounterSet(const std::vector<std::string>& counters);

// Summary statistics written by prepare and used to size the model.
struct CorpusStats {
  double mean_phone_frames = 1.0;
  int max_duration = 0;
  int max_total = 0;
  int max_segment = 0;
  int max_pauses = 0;
  int source_vocab = 0;
  int target_vocab = 0;
  int interleaved_vocab = 0;
  std::map<std::string, int> split_sizes;
};

using Logger = std::function<void(const std::string&)>;

// Directory layout under one experiment directory.
struct ExperimentPaths {
  std::string root;
  std::string Prepared() const;
  std::string Model() const;
  std::string Translations() const;
  std::string Evaluation() const;
  std::string Ablation() const;
};

CorpusStats Prepare(const ExperimentConfig& config, const std::string& dir, bool force,
                    const Logger& log = {});
ModelConfig BuildModelConfig(const ExperimentConfig& config, const CorpusStats& stats);
DecodeOptions BuildDecodeOptions(const ExperimentConfig& config, const CorpusStats& stats);
TrainResult TrainExperiment(const ExperimentConfig& config, const std::string& dir, bool force,
                            const Logger& log = {});
// Writes translations/<name>.jsonl and <name>.txt for the chosen split.
std::vector<TranslationRecord> TranslateExperiment(const ExperimentConfig& config,
                                                   const std::string& dir, const std::string& name,
                                                   bool force, const Logger& log = {});
// Writes evaluation/<name>.jsonl and <name>.txt.
EvalReport EvaluateExperiment(const ExperimentConfig& config, const std::string& dir,
                              const std::string& name, bool force);

// Decodes `records` in memory with an already-built model.
std::vector<TranslationRecord> TranslateRecords(const Model& model, const ExperimentConfig& config,
                                                const std::string& prepared_dir,
                                                const std::vector<PreparedRecord>& records);

struct AblationCell {
  std::string name;
  std::map<std::string, std::string> settings;
  bool ok = false;
  std::string error;
  EvalReport report;
};

// Cartesian product of the grid axes in declaration order. Throws ConfigError
// if any cell is invalid.
std::vector<AblationCell> ExpandGrid(const ExperimentConfig& config);

// Runs every cell through prepare/train/translate/evaluate in its own
// directory. Failing cells are reported and skipped. Writes ablation/report.jsonl,
// report.txt and, when noise_sigma is an axis, noise_series.tsv.
std::vector<AblationCell> Ablate(const ExperimentConfig& config, const std::string& dir, bool force,
                                 const Logger& log = {});

}  // namespace isomt
