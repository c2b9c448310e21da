#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "isomt/alignment.h"
#include "isomt/bins.h"
#include "isomt/bpe.h"
#include "isomt/errors.h"
#include "isomt/experiment.h"
#include "isomt/synthetic.h"
#include "isomt/vocab.h"
#include "json.hpp"

namespace isomt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kStatsFile = "stats.json";
constexpr const char* kConfigFile = "config.txt";

std::string Join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// Refuses to replace existing outputs unless forced.
void ClaimOutputs(const std::vector<std::string>& paths, bool force, const std::string& command) {
  if (force) return;
  for (const auto& p : paths) {
    if (fs::exists(p)) {
      throw ConfigError(p + " already exists; rerun " + command + " with --force to overwrite");
    }
  }
}

void RequireArtifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw ConfigError("missing " + path + "; run `isomt " + producer + "` first");
  }
}

std::vector<std::string> Counters(const ExperimentConfig& config) {
  if (config.Get("counters") == "none") return {};
  auto counters = config.GetList("counters");
  ValidateCounterSet(counters);
  static const std::vector<std::string> order{kTotalFactor, kPauseFactor, kSegmentFactor};
  std::vector<std::string> sorted;
  for (const auto& name : order)
    if (std::find(counters.begin(), counters.end(), name) != counters.end()) sorted.push_back(name);
  return sorted;
}

FrameClock Clock(const ExperimentConfig& config) { return FrameClock{config.GetDouble("frame_ms")}; }

bool Interleaved(const ExperimentConfig& config) {
  const std::string& f = config.Get("format");
  if (f == "interleaved") return true;
  if (f == "factored") return false;
  throw ConfigError("format must be factored or interleaved, got '" + f + "'");
}

SyntheticConfig SyntheticFrom(const ExperimentConfig& c) {
  SyntheticConfig s;
  s.num_sentences = static_cast<int>(c.GetInt("num_sentences") + c.GetInt("valid_sentences") +
                                     c.GetInt("test_sentences"));
  s.distinct_sources = static_cast<int>(c.GetInt("distinct_sources"));
  s.source_vocab = static_cast<int>(c.GetInt("source_vocab"));
  s.phoneme_inventory = static_cast<int>(c.GetInt("phoneme_inventory"));
  s.min_words = static_cast<int>(c.GetInt("min_words"));
  s.max_words = static_cast<int>(c.GetInt("max_words"));
  s.min_phones_per_word = static_cast<int>(c.GetInt("min_phones_per_word"));
  s.max_phones_per_word = static_cast<int>(c.GetInt("max_phones_per_word"));
  s.pause_probability = c.GetDouble("pause_probability");
  s.min_base_frames = static_cast<int>(c.GetInt("min_base_frames"));
  s.max_base_frames = static_cast<int>(c.GetInt("max_base_frames"));
  s.phone_jitter_frames = static_cast<int>(c.GetInt("phone_jitter_frames"));
  s.max_final_lengthening = static_cast<int>(c.GetInt("max_final_lengthening"));
  return s;
}

std::vector<int> Jitter(const std::vector<int>& segments, double margin, Rng rng) {
  if (margin <= 0.0) return segments;
  std::vector<int> out;
  for (int d : segments) {
    const double scale = 1.0 - margin + 2.0 * margin * rng.Uniform();
    out.push_back(std::max(1, static_cast<int>(std::lround(d * scale))));
  }
  return out;
}

json StatsJson(const CorpusStats& s) {
  return json{{"mean_phone_frames", s.mean_phone_frames}, {"max_duration", s.max_duration},
              {"max_total", s.max_total},                 {"max_segment", s.max_segment},
              {"max_pauses", s.max_pauses},               {"source_vocab", s.source_vocab},
              {"target_vocab", s.target_vocab},           {"interleaved_vocab", s.interleaved_vocab},
              {"split_sizes", s.split_sizes}};
}

CorpusStats LoadStats(const std::string& prepared_dir) {
  const std::string path = Join(prepared_dir, kStatsFile);
  RequireArtifact(path, "prepare");
  std::ifstream in(path);
  const json j = json::parse(in);
  CorpusStats s;
  s.mean_phone_frames = j.at("mean_phone_frames");
  s.max_duration = j.at("max_duration");
  s.max_total = j.at("max_total");
  s.max_segment = j.at("max_segment");
  s.max_pauses = j.at("max_pauses");
  s.source_vocab = j.at("source_vocab");
  s.target_vocab = j.at("target_vocab");
  s.interleaved_vocab = j.at("interleaved_vocab");
  s.split_sizes = j.at("split_sizes").get<std::map<std::string, int>>();
  return s;
}

std::string ResolveSplit(const ExperimentConfig& config, const CorpusStats& stats) {
  std::string split = config.Get("split");
  if (split == "auto") {
    if (stats.split_sizes.contains("test") && stats.split_sizes.at("test") > 0) return "test";
    if (stats.split_sizes.contains("valid") && stats.split_sizes.at("valid") > 0) return "valid";
    return "train";
  }
  if (split != "train" && split != "valid" && split != "test") {
    throw ConfigError("split must be train, valid, test or auto, got '" + split + "'");
  }
  if (!stats.split_sizes.contains(split) || stats.split_sizes.at(split) == 0) {
    throw ConfigError("split '" + split + "' is empty in the prepared corpus");
  }
  return split;
}

// Teacher-forcing view of a prepared record for the configured format.
FactoredExample TrainingStreams(const PreparedRecord& r, bool interleaved) {
  if (!interleaved) return r.streams;
  FactoredExample ex;
  ex.source_ids = r.source;
  ex.main.push_back(kNullId);
  ex.main.insert(ex.main.end(), r.interleaved.begin(), r.interleaved.end());
  ex.dur.assign(ex.main.size(), 0);
  ex.total = ex.pause = ex.segment = ex.dur;
  return ex;
}

std::vector<TrainingPair> TrainingPairs(const std::vector<PreparedRecord>& records,
                                        const ModelConfig& model_config, bool interleaved) {
  std::vector<TrainingPair> pairs;
  for (const PreparedRecord& r : records) {
    FactoredExample ex = TrainingStreams(r, interleaved);
    ex.source_ids = r.source;
    pairs.push_back(MakeTrainingPair(ex, model_config));
  }
  return pairs;
}

// Repairs an interleaved token stream into rows: stray durations are dropped
// and a phone without a duration gets 0.
std::vector<TargetRow> RepairInterleaved(const std::vector<std::string>& tokens, bool* well_formed) {
  *well_formed = ValidateInterleaved(tokens).valid;
  if (*well_formed) return ParseInterleaved(tokens);
  std::vector<TargetRow> rows;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (IsDurationToken(t)) continue;
    int duration = 0;
    if (t != kEowToken && t != kPauseToken && i + 1 < tokens.size() && IsDurationToken(tokens[i + 1])) {
      duration = std::stoi(tokens[i + 1]);
    }
    rows.push_back({t, duration});
  }
  return rows;
}

Lexicon* LoadLexicon(const std::string& prepared_dir, Lexicon& storage) {
  const std::string path = Join(prepared_dir, "lexicon.txt");
  if (!fs::exists(path)) return nullptr;
  storage = Lexicon::Load(path);
  return &storage;
}

}  // namespace

std::string ExperimentPaths::Prepared() const { return Join(root, "prepared"); }
std::string ExperimentPaths::Model() const { return Join(root, "model"); }
std::string ExperimentPaths::Translations() const { return Join(root, "translations"); }
std::string ExperimentPaths::Evaluation() const { return Join(root, "evaluation"); }
std::string ExperimentPaths::Ablation() const { return Join(root, "ablation"); }

CorpusStats Prepare(const ExperimentConfig& config, const std::string& dir, bool force,
                    const Logger& log) {
  const ExperimentPaths paths{dir};
  const std::string out = paths.Prepared();
  ClaimOutputs({Join(out, "train.jsonl"), Join(out, kStatsFile)}, force, "prepare");
  fs::create_directories(out);
  const FrameClock clock = Clock(config);
  const Rng root(static_cast<std::uint64_t>(config.GetInt("seed")));
  const auto n_train = static_cast<std::size_t>(config.GetInt("num_sentences"));
  const auto n_valid = static_cast<std::size_t>(config.GetInt("valid_sentences"));
  const auto n_test = static_cast<std::size_t>(config.GetInt("test_sentences"));
  if (n_train == 0) throw ConfigError("num_sentences must be positive");
  Counters(config);

  std::vector<AlignedUtterance> raw;
  Lexicon lexicon;
  bool have_lexicon = false;
  if (config.Get("corpus") == "synthetic") {
    SyntheticCorpus corpus = GenerateSyntheticCorpus(SyntheticFrom(config), clock, root.Split("corpus"));
    raw = std::move(corpus.utterances);
    lexicon = std::move(corpus.lexicon);
    have_lexicon = true;
  } else if (config.Get("corpus") == "alignment") {
    const std::string& file = config.Get("alignment_file");
    if (file.empty()) throw ConfigError("corpus = alignment needs alignment_file");
    raw = IngestAlignmentFile(file, clock);
    if (raw.size() < n_train + n_valid + n_test) {
      throw ConfigError(file + " holds " + std::to_string(raw.size()) + " utterances, fewer than the " +
                        std::to_string(n_train + n_valid + n_test) + " requested");
    }
    raw.resize(n_train + n_valid + n_test);
    if (!config.Get("lexicon_file").empty()) {
      lexicon = Lexicon::Load(config.Get("lexicon_file"));
      have_lexicon = true;
    }
  } else {
    throw ConfigError("corpus must be synthetic or alignment, got '" + config.Get("corpus") + "'");
  }
  {
    std::ofstream a(Join(out, "alignments.txt"), std::ios::binary);
    WriteAlignment(a, raw, clock);
  }
  if (have_lexicon) lexicon.Save(Join(out, "lexicon.txt"));

  const double threshold = config.GetDouble("pause_threshold");
  const double sigma = config.GetDouble("noise_sigma");
  const double jitter = config.GetDouble("constraint_jitter");
  const bool tags = config.GetBool("source_tags");
  struct Item {
    AlignedUtterance u;
    SegmentSpec clean;
    SegmentSpec conditioning;
    std::vector<int> constraints;
    std::vector<std::string> subwords;
    std::string split;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Item it;
    try {
      it.u = MarkPauses(raw[i], threshold, clock);
      it.clean = ComputeSegments(it.u);
    } catch (const Error& e) {
      throw ValidationError("utterance " + std::to_string(i) + ": " + e.what());
    }
    it.split = i < n_train ? "train" : i < n_train + n_valid ? "valid" : "test";
    it.conditioning = it.clean;
    if (it.split == "train") {
      Rng noise = root.Split("noise").Split(static_cast<std::uint64_t>(i));
      it.conditioning = AddNoise(it.clean, sigma, clock, noise);
    }
    it.constraints = Jitter(it.clean.segment_durations, jitter,
                            root.Split("constraints").Split(static_cast<std::uint64_t>(i)));
    items.push_back(std::move(it));
  }

  std::vector<std::string> train_text;
  for (const Item& it : items)
    if (it.split == "train") train_text.push_back(it.u.source_text);
  const BpeModel bpe = BpeModel::Learn(train_text, static_cast<int>(config.GetInt("bpe_merges")));
  bpe.Save(Join(out, "bpe.txt"));

  BinBoundaries bins;
  const int n_bins = static_cast<int>(config.GetInt("bins"));
  if (tags) {
    std::vector<double> durations;
    for (const Item& it : items)
      if (it.split == "train")
        for (int d : it.conditioning.segment_durations) durations.push_back(d);
    bins = LearnBins(durations, n_bins);
    bins.Save(Join(out, "bins.txt"));
  }

  Vocabulary source_vocab(tags ? bins.num_bins() : 0);
  Vocabulary target_vocab;
  Vocabulary interleaved_vocab;
  CorpusStats stats;
  long phone_frames = 0, phones = 0;
  int max_any_duration = 0;
  for (Item& it : items) {
    it.subwords = bpe.Apply(it.u.source_text);
    for (const auto& s : it.subwords) source_vocab.Add(s);
    for (const TargetRow& row : TargetRows(it.u)) {
      target_vocab.Add(row.token);
      interleaved_vocab.Add(row.token);
      max_any_duration = std::max(max_any_duration, row.duration);
      if (it.split == "train" && row.token != kEowToken && row.token != kPauseToken) {
        phone_frames += row.duration;
        ++phones;
        stats.max_duration = std::max(stats.max_duration, row.duration);
      }
    }
    if (it.split == "train") {
      for (const SegmentSpec* s : {&it.clean, &it.conditioning}) {
        stats.max_total = std::max(stats.max_total, s->TotalFrames());
        for (int d : s->segment_durations) stats.max_segment = std::max(stats.max_segment, d);
      }
      stats.max_pauses = std::max(stats.max_pauses, static_cast<int>(it.clean.pause_positions.size()));
    }
  }
  for (int d = 0; d <= max_any_duration; ++d) interleaved_vocab.Add(std::to_string(d));
  stats.mean_phone_frames = phones > 0 ? static_cast<double>(phone_frames) / phones : 1.0;

  std::map<std::string, std::vector<PreparedRecord>> splits{{"train", {}}, {"valid", {}}, {"test", {}}};
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& it = items[i];
    PreparedRecord r;
    r.id = static_cast<int>(i);
    r.source_text = it.u.source_text;
    r.subwords = it.subwords;
    // Held-out tags describe the durations the decoder is asked to meet.
    SegmentSpec tagged = it.conditioning;
    if (it.split != "train") tagged.segment_durations = it.constraints;
    r.source = FormatSource(it.subwords, tags ? SegmentBins(tagged, bins) : std::vector<int>{}, source_vocab);
    r.rows = TargetRows(it.u);
    r.streams = BuildFactoredExample(r.rows, it.conditioning, target_vocab);
    r.streams.source_ids = r.source;
    r.segments = it.conditioning.segment_durations;
    r.reference_segments = it.clean.segment_durations;
    r.constraint_segments = it.constraints;
    if (have_lexicon) {
      std::vector<std::string> tokens;
      for (const auto& row : r.rows) tokens.push_back(row.token);
      r.words = PhonesToWords(tokens, lexicon);
    }
    r.interleaved = BuildInterleavedExample(r.rows, r.source, interleaved_vocab).target_ids;
    splits[it.split].push_back(std::move(r));
  }
  for (const auto& [name, records] : splits) {
    WritePrepared(Join(out, name + ".jsonl"), name, records);
    stats.split_sizes[name] = static_cast<int>(records.size());
  }
  source_vocab.Save(Join(out, "source_vocab.txt"));
  target_vocab.Save(Join(out, "target_vocab.txt"));
  interleaved_vocab.Save(Join(out, "interleaved_vocab.txt"));
  stats.source_vocab = source_vocab.size();
  stats.target_vocab = target_vocab.size();
  stats.interleaved_vocab = interleaved_vocab.size();
  WriteText(Join(out, kStatsFile), StatsJson(stats).dump(1) + "\n");
  WriteText(Join(out, kConfigFile), config.Serialize());
  if (log) {
    log("prepared " + std::to_string(stats.split_sizes["train"]) + " train / " +
        std::to_string(stats.split_sizes["valid"]) + " valid / " +
        std::to_string(stats.split_sizes["test"]) + " test sentences in " + out);
  }
  return stats;
}

ModelConfig BuildModelConfig(const ExperimentConfig& c, const CorpusStats& stats) {
  ModelConfig m;
  m.encoder_layers = static_cast<int>(c.GetInt("encoder_layers"));
  m.decoder_layers = static_cast<int>(c.GetInt("decoder_layers"));
  m.model_dim = static_cast<int>(c.GetInt("model_dim"));
  m.heads = static_cast<int>(c.GetInt("heads"));
  m.ffn_dim = static_cast<int>(c.GetInt("ffn_dim"));
  m.dropout = c.GetDouble("dropout");
  m.label_smoothing = c.GetDouble("label_smoothing");
  m.source_vocab = stats.source_vocab;
  m.main_embedding_dim = static_cast<int>(c.GetInt("main_embedding_dim"));
  m.max_positions = static_cast<int>(c.GetInt("max_positions"));
  if (Interleaved(c)) {
    m.main_vocab = stats.interleaved_vocab;
    m.Validate();
    return m;
  }
  m.main_vocab = stats.target_vocab;
  FactorSpec dur;
  dur.name = kDurFactor;
  dur.vocab_size = stats.max_duration + 1;
  dur.embedding_dim = static_cast<int>(c.GetInt("dur_embedding_dim"));
  dur.loss_weight = c.GetDouble("dur_loss_weight");
  dur.feedback = Feedback::kModelPrediction;
  m.factors.push_back(dur);
  const Feedback feedback = ParseFeedback(c.Get("feedback"));
  const bool heads = c.GetBool("counter_heads");
  const EmbeddingKind kind = ParseEmbeddingKind(c.Get("counter_embedding"));
  for (const std::string& name : Counters(c)) {
    FactorSpec f;
    f.name = name;
    f.vocab_size = 1 + (name == kTotalFactor   ? stats.max_total
                        : name == kPauseFactor ? stats.max_pauses
                                               : stats.max_segment);
    f.embedding_dim = static_cast<int>(c.GetInt(name + "_embedding_dim"));
    f.loss_weight = c.GetDouble("counter_loss_weight");
    f.predicted = heads;
    f.feedback = heads ? feedback : Feedback::kExternallyComputed;
    f.embedding_kind = kind;
    m.factors.push_back(f);
  }
  m.Validate();
  return m;
}

DecodeOptions BuildDecodeOptions(const ExperimentConfig& c, const CorpusStats& stats) {
  DecodeOptions o;
  o.beam = static_cast<int>(c.GetInt("beam"));
  o.mask_structure = c.GetBool("mask_structure");
  o.max_length_factor = c.GetDouble("max_length_factor");
  o.mean_phone_frames = stats.mean_phone_frames;
  o.length_alpha = c.GetDouble("length_alpha");
  o.feedback = ParseFeedback(c.Get("feedback"));
  return o;
}

std::vector<TranslationRecord> TranslateRecords(const Model& model, const ExperimentConfig& config,
                                                const std::string& prepared_dir,
                                                const std::vector<PreparedRecord>& records) {
  const CorpusStats stats = LoadStats(prepared_dir);
  const bool interleaved = Interleaved(config);
  const bool tags = config.GetBool("source_tags");
  const Vocabulary source_vocab = Vocabulary::Load(Join(prepared_dir, "source_vocab.txt"));
  const Vocabulary target_vocab = Vocabulary::Load(
      Join(prepared_dir, interleaved ? "interleaved_vocab.txt" : "target_vocab.txt"));
  BinBoundaries bins;
  if (tags) bins = BinBoundaries::Load(Join(prepared_dir, "bins.txt"));
  const DecodeOptions options = BuildDecodeOptions(config, stats);
  std::vector<TranslationRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PreparedRecord& r = records[i];
    SegmentSpec wanted;
    wanted.segment_durations = r.constraint_segments;
    const std::vector<int> source =
        FormatSource(r.subwords, tags ? SegmentBins(wanted, bins) : std::vector<int>{}, source_vocab);
    const Hypothesis h = options.beam > 1 ? BeamDecode(model, source, r.constraint_segments, options)
                                          : GreedyDecode(model, source, r.constraint_segments, options);
    TranslationRecord t;
    t.index = static_cast<int>(i);
    t.source_text = r.source_text;
    t.constraint_segments = r.constraint_segments;
    t.finished = h.finished;
    t.log_prob = h.log_prob;
    if (interleaved) {
      std::vector<std::string> tokens;
      for (int id : h.tokens) tokens.push_back(target_vocab.Token(id));
      t.rows = RepairInterleaved(tokens, &t.well_formed);
      t.interleaved = JoinTokens(tokens);
      std::vector<int> segments{0};
      for (const auto& row : t.rows) {
        if (row.token == kPauseToken) segments.push_back(0);
        else segments.back() += row.duration;
      }
      t.segments = segments;
    } else {
      for (std::size_t k = 0; k < h.tokens.size(); ++k)
        t.rows.push_back({target_vocab.Token(h.tokens[k]), h.durations[k]});
      t.interleaved = JoinTokens(RenderInterleaved(t.rows));
      t.segments = h.SegmentDurations();
      t.counters = h.trace;
    }
    t.pauses = static_cast<int>(t.segments.size()) - 1;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

std::string SplitFile(const ExperimentPaths& paths, const std::string& split) {
  return Join(paths.Prepared(), split + ".jsonl");
}

}  // namespace

TrainResult TrainExperiment(const ExperimentConfig& config, const std::string& dir, bool force,
                            const Logger& log) {
  const ExperimentPaths paths{dir};
  const CorpusStats stats = LoadStats(paths.Prepared());
  ClaimOutputs({Join(paths.Model(), "best.ckpt"), Join(paths.Model(), "train_log.jsonl")}, force, "train");
  fs::create_directories(paths.Model());
  const bool interleaved = Interleaved(config);
  const ModelConfig model_config = BuildModelConfig(config, stats);
  const auto train_records = ReadPrepared(SplitFile(paths, "train"));
  const auto pairs = TrainingPairs(train_records, model_config, interleaved);
  const bool has_valid = stats.split_sizes.contains("valid") && stats.split_sizes.at("valid") > 0;
  const auto valid_records = has_valid ? ReadPrepared(SplitFile(paths, "valid")) : train_records;
  const auto valid_pairs = has_valid ? TrainingPairs(valid_records, model_config, interleaved) : pairs;

  TrainOptions options;
  options.epochs = static_cast<int>(config.GetInt("epochs"));
  options.batch_tokens = static_cast<int>(config.GetInt("batch_tokens"));
  options.learning_rate = config.GetDouble("learning_rate");
  options.warmup_steps = static_cast<int>(config.GetInt("warmup_steps"));
  options.clip_norm = config.GetDouble("clip_norm");
  options.seed = static_cast<std::uint64_t>(config.GetInt("seed"));
  options.validate_every = static_cast<int>(config.GetInt("validate_every"));
  options.stop_loss = config.GetDouble("stop_loss");
  options.checkpoint_dir = paths.Model();

  Lexicon lexicon_storage;
  const Lexicon* lexicon = LoadLexicon(paths.Prepared(), lexicon_storage);
  const std::string metric = config.Get("validation_metric");
  Validator validator;
  if (metric == "loss") {
    validator = [&](const Model& m) { return -MeanLoss(m, valid_pairs); };
  } else if (metric == "exact_match" || metric == "bleu" || metric == "overlap") {
    validator = [&, metric](const Model& m) {
      const EvalReport r =
          Evaluate(TranslateRecords(m, config, paths.Prepared(), valid_records), valid_records, lexicon);
      return metric == "exact_match" ? r.exact_match : metric == "bleu" ? r.bleu : r.speech_overlap;
    };
  } else {
    throw ConfigError("validation_metric must be loss, exact_match, bleu or overlap");
  }

  Model model(model_config, Rng(options.seed).Split("init").NextU64());
  const TrainResult result = Train(model, pairs, options, validator, log);
  model.Save(Join(paths.Model(), "best.ckpt"));
  std::ostringstream curve;
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
    curve << json{{"epoch", e + 1}, {"loss", result.loss_curve[e]}}.dump() << '\n';
  }
  for (const ValidationPoint& v : result.validation) {
    curve << json{{"epoch", v.epoch}, {"validation", v.score}, {"metric", metric}}.dump() << '\n';
  }
  curve << json{{"best_epoch", result.best_epoch}, {"best_score", result.best_score},
                {"updates", result.updates}}.dump()
        << '\n';
  WriteText(Join(paths.Model(), "train_log.jsonl"), curve.str());
  WriteText(Join(paths.Model(), kConfigFile), config.Serialize());
  return result;
}

std::vector<TranslationRecord> TranslateExperiment(const ExperimentConfig& config,
                                                   const std::string& dir, const std::string& name,
                                                   bool force, const Logger& log) {
  const ExperimentPaths paths{dir};
  const CorpusStats stats = LoadStats(paths.Prepared());
  const std::string ckpt = Join(paths.Model(), "best.ckpt");
  RequireArtifact(ckpt, "train");
  const std::string out_jsonl = Join(paths.Translations(), name + ".jsonl");
  ClaimOutputs({out_jsonl}, force, "translate");
  fs::create_directories(paths.Translations());
  const std::string split = ResolveSplit(config, stats);
  const Model model = Model::Load(ckpt);
  const auto records = ReadPrepared(SplitFile(paths, split));
  const auto translations = TranslateRecords(model, config, paths.Prepared(), records);
  WriteTranslations(out_jsonl, translations);
  std::ostringstream text;
  for (const auto& t : translations) text << t.interleaved << '\n';
  WriteText(Join(paths.Translations(), name + ".txt"), text.str());
  WriteText(Join(paths.Translations(), name + ".config.txt"), config.Serialize());
  if (log) log("translated " + std::to_string(translations.size()) + " " + split + " sentences to " + out_jsonl);
  return translations;
}

EvalReport EvaluateExperiment(const ExperimentConfig& config, const std::string& dir,
                              const std::string& name, bool force) {
  const ExperimentPaths paths{dir};
  const CorpusStats stats = LoadStats(paths.Prepared());
  const std::string translations = Join(paths.Translations(), name + ".jsonl");
  RequireArtifact(translations, "translate");
  const std::string out = Join(paths.Evaluation(), name + ".jsonl");
  ClaimOutputs({out}, force, "evaluate");
  fs::create_directories(paths.Evaluation());
  Lexicon lexicon_storage;
  const Lexicon* lexicon = LoadLexicon(paths.Prepared(), lexicon_storage);
  EvalReport report =
      EvaluateRun(translations, SplitFile(paths, ResolveSplit(config, stats)), lexicon);
  report.name = name;
  WriteText(out, report.ToJson() + "\n");
  WriteText(Join(paths.Evaluation(), name + ".txt"), FormatReportTable({report}));
  WriteText(Join(paths.Evaluation(), name + ".config.txt"), config.Serialize());
  return report;
}

}  // namespace isomt
