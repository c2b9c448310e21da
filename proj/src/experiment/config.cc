#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "isomt/errors.h"
#include "isomt/experiment.h"

namespace isomt {

namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const ConfigKey* FindKey(const std::string& name) {
  for (const ConfigKey& k : ExperimentConfig::Keys())
    if (k.name == name) return &k;
  return nullptr;
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::vector<ConfigKey>& ExperimentConfig::Keys() {
  static const std::vector<ConfigKey> keys{
      {"seed", "1", "root seed for every random stream"},
      // Data.
      {"corpus", "synthetic", "synthetic | alignment"},
      {"alignment_file", "", "alignment interchange file when corpus = alignment"},
      {"lexicon_file", "", "optional word<TAB>phones lexicon for real corpora"},
      {"num_sentences", "50", "training sentences"},
      {"valid_sentences", "0", "validation sentences"},
      {"test_sentences", "0", "test sentences"},
      {"distinct_sources", "0", "synthetic: distinct source sentences, 0 = all distinct"},
      {"source_vocab", "12", "synthetic: source word types"},
      {"phoneme_inventory", "14", "synthetic: phone types"},
      {"min_words", "2", "synthetic: words per sentence, lower bound"},
      {"max_words", "5", "synthetic: words per sentence, upper bound"},
      {"min_phones_per_word", "1", "synthetic: phones per word, lower bound"},
      {"max_phones_per_word", "3", "synthetic: phones per word, upper bound"},
      {"pause_probability", "0.3", "synthetic: chance of a pause after a non-final word"},
      {"min_base_frames", "3", "synthetic: shortest base phone duration"},
      {"max_base_frames", "9", "synthetic: longest base phone duration"},
      {"phone_jitter_frames", "0", "synthetic: uniform per-phone duration jitter"},
      {"max_final_lengthening", "20", "synthetic: segment-final lengthening upper bound"},
      {"frame_ms", "10", "frame length in milliseconds"},
      {"pause_threshold", "0.3", "silences longer than this many seconds become [pause]"},
      {"noise_sigma", "0", "std-dev in seconds of noise on training segment durations"},
      {"bins", "100", "number of segment-duration bins for source tags"},
      {"bpe_merges", "0", "BPE merges learned on training sources"},
      {"source_tags", "true", "append <||> and segment bin tags to the source"},
      {"constraint_jitter", "0",
       "evaluation constraints are reference segments scaled by U(1-m, 1+m)"},
      // Model.
      {"format", "factored", "factored | interleaved"},
      {"counters", "total,pause,segment", "auxiliary counters, any of total,pause,segment"},
      {"encoder_layers", "2", "transformer encoder layers"},
      {"decoder_layers", "2", "transformer decoder layers"},
      {"model_dim", "128", "model width"},
      {"heads", "4", "attention heads"},
      {"ffn_dim", "256", "feed-forward width"},
      {"dropout", "0.1", "dropout probability during training"},
      {"label_smoothing", "0.1", "label smoothing for every head"},
      {"main_embedding_dim", "128", "main target embedding width"},
      {"dur_embedding_dim", "64", "duration factor embedding size"},
      {"total_embedding_dim", "64", "total counter embedding size"},
      {"pause_embedding_dim", "32", "pause counter embedding size"},
      {"segment_embedding_dim", "64", "segment counter embedding size"},
      {"counter_embedding", "learned", "learned | sinusoidal"},
      {"counter_heads", "true", "give counters output heads"},
      {"dur_loss_weight", "1", "loss weight of the duration head"},
      {"counter_loss_weight", "1", "loss weight shared by all counter heads"},
      {"max_positions", "512", "longest source or target sequence"},
      // Training.
      {"epochs", "600", "training epochs"},
      {"batch_tokens", "256", "target tokens per update"},
      {"learning_rate", "0.003", "peak learning rate"},
      {"warmup_steps", "100", "learning-rate warmup updates"},
      {"clip_norm", "1", "global gradient-norm clip, 0 disables"},
      {"validate_every", "50", "epochs between validations"},
      {"validation_metric", "loss", "loss | exact_match | bleu | overlap"},
      {"stop_loss", "0", "stop once the epoch training loss reaches this value"},
      // Decoding.
      {"split", "auto", "split to translate/evaluate: train | valid | test | auto"},
      {"beam", "1", "beam width, 1 = greedy"},
      {"feedback", "externally_computed", "counter feedback: externally_computed | model_prediction"},
      {"mask_structure", "true", "mask [pause] and </s> by the pause budget"},
      {"max_length_factor", "3", "output budget relative to the frame-implied phone count"},
      {"length_alpha", "1", "length normalization exponent"},
      // Sweeps.
      {"workers", "1", "ablation cells run concurrently"},
  };
  return keys;
}

ExperimentConfig::ExperimentConfig() {
  for (const ConfigKey& k : Keys()) values_[k.name] = k.default_value;
}

void ExperimentConfig::Set(const std::string& key, const std::string& value) {
  if (key.rfind("grid.", 0) == 0) {
    const std::string axis = key.substr(5);
    if (FindKey(axis) == nullptr) throw ConfigError("unknown grid axis '" + axis + "'");
    auto values = SplitOn(value, '|');
    if (values.empty()) throw ConfigError("grid axis '" + axis + "' has no values");
    for (auto& [name, vals] : grid_) {
      if (name == axis) {
        vals = std::move(values);
        return;
      }
    }
    grid_.emplace_back(axis, std::move(values));
    return;
  }
  if (FindKey(key) == nullptr) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = Trim(value);
}

void ExperimentConfig::SetAssignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  Set(Trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ExperimentConfig ExperimentConfig::Parse(const std::string& text, const std::string& origin) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(origin + ": expected key = value", line_no);
    const std::string key = Trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ParseError(origin + ": duplicate key '" + key + "'", line_no);
    try {
      c.Set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(origin + ": " + e.what(), line_no);
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str(), path);
}

const std::string& ExperimentConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

long ExperimentConfig::GetInt(const std::string& key) const {
  const std::string& v = Get(key);
  char* end = nullptr;
  errno = 0;
  const long out = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double ExperimentConfig::GetDouble(const std::string& key) const {
  const std::string& v = Get(key);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

bool ExperimentConfig::GetBool(const std::string& key) const {
  const std::string& v = Get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> ExperimentConfig::GetList(const std::string& key) const {
  return SplitOn(Get(key), ',');
}

std::string ExperimentConfig::Serialize() const {
  std::ostringstream out;
  for (const ConfigKey& k : Keys()) out << k.name << " = " << values_.at(k.name) << '\n';
  for (const auto& [axis, values] : grid_) {
    out << "grid." << axis << " = ";
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " | " : "") << values[i];
    out << '\n';
  }
  return out.str();
}

void ValidateCounterSet(const std::vector<std::string>& counters) {
  std::set<std::string> seen;
  for (const auto& c : counters) {
    if (c != kTotalFactor && c != kPauseFactor && c != kSegmentFactor) {
      throw ConfigError("unknown counter '" + c + "' (expected total, pause or segment)");
    }
    if (!seen.insert(c).second) throw ConfigError("counter '" + c + "' listed twice");
  }
  if (seen.contains(kSegmentFactor) && !seen.contains(kPauseFactor)) {
    throw ConfigError(
        "the segment counter needs the pause counter: it reloads the next segment on each "
        "[pause], so pause cannot be removed on its own");
  }
}

}  // namespace isomt
