#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isomt/metrics.h"
#include "isomt/records.h"
#include "isomt/synthetic.h"

namespace isomt {

struct SentenceDiagnostics {
  int index = 0;
  bool exact_match = false;
  int reference_pauses = 0;
  int hypothesis_pauses = 0;
  double overlap = 0.0;
  std::size_t unpaired_segments = 0;
  bool finished = true;
  bool well_formed = true;
  bool operator==(const SentenceDiagnostics&) const = default;
};

struct EvalReport {
  std::string name;
  double bleu = 0.0;
  double speech_overlap = 0.0;
  double speech_overlap_clamped = 0.0;
  double speech_overlap_per_sentence = 0.0;
  int wrong_pause_count = 0;
  // Percentage of sentences whose phone/<eow>/[pause] sequence equals the reference.
  double exact_match = 0.0;
  int sentences = 0;
  std::size_t paired_segments = 0;
  std::size_t unpaired_segments = 0;
  int unfinished = 0;
  std::vector<SentenceDiagnostics> diagnostics;

  std::string ToJson() const;
  static EvalReport FromJson(const std::string& line);
  bool operator==(const EvalReport&) const = default;
};

// Words of a phone row sequence: looked up in the lexicon when given, else
// each word's phones joined with '_'.
std::vector<std::string> RowsToWords(const std::vector<TargetRow>& rows, const Lexicon* lexicon);

// Pairs translations with references by position. Overlap is measured against
// each reference's constraint segments, pauses against its reference rows and
// BLEU on words. Throws ValidationError when the counts disagree.
EvalReport Evaluate(const std::vector<TranslationRecord>& translations,
                    const std::vector<PreparedRecord>& references, const Lexicon* lexicon);
EvalReport EvaluateRun(const std::string& translations_path, const std::string& references_path,
                       const Lexicon* lexicon);

// Treats each reference as its own translation.
std::vector<TranslationRecord> ReferencesAsTranslations(const std::vector<PreparedRecord>& refs);

// Aligned plain-text table: name, BLEU, overlap, clamped overlap, W.P., exact match.
std::string FormatReportTable(const std::vector<EvalReport>& rows);

}  // namespace isomt
