#pragma once

#include <string>
#include <vector>

#include "isomt/counters.h"
#include "isomt/examples.h"

namespace isomt {

// One prepared sentence. Ids index the vocabularies written by prepare.
struct PreparedRecord {
  int id = 0;
  std::string source_text;
  std::vector<std::string> subwords;
  // Training source: subwords, then <||> and bin tags of `segments` when tags are on.
  std::vector<int> source;
  std::vector<TargetRow> rows;
  FactoredExample streams;
  // Conditioning durations used for training (noised when sigma > 0).
  std::vector<int> segments;
  // Clean segment durations of the reference.
  std::vector<int> reference_segments;
  // Desired durations handed to the decoder at evaluation time.
  std::vector<int> constraint_segments;
  std::vector<std::string> words;
  std::vector<int> interleaved;
  bool operator==(const PreparedRecord&) const = default;
};

struct TranslationRecord {
  int index = 0;
  std::string source_text;
  std::vector<int> constraint_segments;
  std::vector<TargetRow> rows;
  std::vector<int> segments;
  int pauses = 0;
  bool finished = true;
  // False when an interleaved output had to be repaired before parsing.
  bool well_formed = true;
  double log_prob = 0.0;
  std::vector<CounterState> counters;
  std::string interleaved;
  bool operator==(const TranslationRecord&) const = default;
};

// Line-delimited JSON behind a {"format": ..., "version": 1} header line.
// Readers throw ParseError whose line() is the 1-based line of the bad record.
void WritePrepared(const std::string& path, const std::string& split,
                   const std::vector<PreparedRecord>& records);
std::vector<PreparedRecord> ReadPrepared(const std::string& path);
void WriteTranslations(const std::string& path, const std::vector<TranslationRecord>& records);
std::vector<TranslationRecord> ReadTranslations(const std::string& path);

std::string JoinTokens(const std::vector<std::string>& tokens);

}  // namespace isomt
