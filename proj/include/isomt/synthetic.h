#pragma once

#include <map>
#include <string>
#include <vector>

#include "isomt/alignment.h"
#include "isomt/rng.h"

namespace isomt {

// Pronunciation table for the target language: word -> phones, invertible.
class Lexicon {
 public:
  void Add(const std::string& word, const std::vector<std::string>& phones);
  // Word for a phone sequence, or "<unk>".
  std::string WordFor(const std::vector<std::string>& phones) const;
  const std::vector<std::string>& PhonesFor(const std::string& word) const;
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

  // word <TAB> space-separated phones, one entry per line.
  void Save(const std::string& path) const;
  static Lexicon Load(const std::string& path);

 private:
  std::map<std::string, std::vector<std::string>> entries_;
  std::map<std::string, std::string> by_phones_;
};

// Splits rows (phones, <eow>, [pause]) into target words using the lexicon;
// pauses are dropped.
std::vector<std::string> PhonesToWords(const std::vector<std::string>& tokens,
                                       const Lexicon& lexicon);

struct SyntheticConfig {
  int num_sentences = 50;
  // Distinct source sentences; the rest re-time earlier ones. 0 means every
  // sentence is drawn fresh.
  int distinct_sources = 0;
  int source_vocab = 12;
  int phoneme_inventory = 14;
  int min_phones_per_word = 1;
  int max_phones_per_word = 3;
  int min_words = 2;
  int max_words = 5;
  double pause_probability = 0.3;
  int min_base_frames = 3;
  int max_base_frames = 9;
  int phone_jitter_frames = 0;
  int max_final_lengthening = 20;
  double min_pause_seconds = 0.35;
  double max_pause_seconds = 0.8;
  double short_silence_probability = 0.1;
  double max_short_silence_seconds = 0.2;
  double edge_silence_probability = 0.2;
};

struct SyntheticCorpus {
  std::vector<AlignedUtterance> utterances;
  // Source word -> target word.
  std::map<std::string, std::string> translation;
  Lexicon lexicon;
};

// Deterministic given rng. Source words map one-to-one onto target words, a
// source "," marks each pause, phones have fixed base durations plus jitter,
// and the last phone of every segment is lengthened by a random amount, so
// exact timing is only recoverable from the segment durations.
SyntheticCorpus GenerateSyntheticCorpus(const SyntheticConfig& config, const FrameClock& clock,
                                        Rng rng);

}  // namespace isomt
