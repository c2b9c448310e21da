#include "isomt/report.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "isomt/errors.h"
#include "isomt/vocab.h"
#include "json.hpp"

namespace isomt {

using nlohmann::json;

std::vector<std::string> RowsToWords(const std::vector<TargetRow>& rows, const Lexicon* lexicon) {
  std::vector<std::string> tokens;
  for (const TargetRow& r : rows) tokens.push_back(r.token);
  if (lexicon != nullptr) return PhonesToWords(tokens, *lexicon);
  std::vector<std::string> words;
  std::string current;
  for (const auto& t : tokens) {
    if (t == kPauseToken) continue;
    if (t == kEowToken) {
      words.push_back(current);
      current.clear();
      continue;
    }
    if (!current.empty()) current += '_';
    current += t;
  }
  if (!current.empty()) words.push_back(current);
  return words;
}

EvalReport Evaluate(const std::vector<TranslationRecord>& translations,
                    const std::vector<PreparedRecord>& references, const Lexicon* lexicon) {
  if (translations.size() != references.size()) {
    throw ValidationError("evaluate: " + std::to_string(translations.size()) +
                          " translations for " + std::to_string(references.size()) + " references");
  }
  if (translations.empty()) throw ValidationError("evaluate: empty corpus");
  EvalReport report;
  report.sentences = static_cast<int>(translations.size());
  std::vector<std::vector<int>> ref_segments, hyp_segments;
  std::vector<int> ref_pauses, hyp_pauses;
  std::vector<std::string> hyp_text, ref_text;
  int exact = 0;
  for (std::size_t i = 0; i < translations.size(); ++i) {
    const TranslationRecord& t = translations[i];
    const PreparedRecord& r = references[i];
    SentenceDiagnostics d;
    d.index = static_cast<int>(i);
    d.finished = t.finished;
    d.well_formed = t.well_formed;
    std::vector<std::string> hyp_tokens, ref_tokens;
    for (const auto& row : t.rows) hyp_tokens.push_back(row.token);
    for (const auto& row : r.rows) ref_tokens.push_back(row.token);
    d.exact_match = hyp_tokens == ref_tokens;
    exact += d.exact_match;
    d.reference_pauses = static_cast<int>(std::count(ref_tokens.begin(), ref_tokens.end(), kPauseToken));
    d.hypothesis_pauses = static_cast<int>(std::count(hyp_tokens.begin(), hyp_tokens.end(), kPauseToken));
    const auto single = SpeechOverlap({r.constraint_segments}, {t.segments});
    d.overlap = single.overlap;
    d.unpaired_segments = single.unpaired;
    report.unfinished += !t.finished;
    report.diagnostics.push_back(d);
    ref_segments.push_back(r.constraint_segments);
    hyp_segments.push_back(t.segments);
    ref_pauses.push_back(d.reference_pauses);
    hyp_pauses.push_back(d.hypothesis_pauses);
    hyp_text.push_back(JoinTokens(RowsToWords(t.rows, lexicon)));
    ref_text.push_back(JoinTokens(r.words.empty() ? RowsToWords(r.rows, lexicon) : r.words));
  }
  const OverlapResult overlap = SpeechOverlap(ref_segments, hyp_segments);
  report.speech_overlap = overlap.overlap;
  report.speech_overlap_clamped = overlap.clamped;
  report.speech_overlap_per_sentence = overlap.per_sentence;
  report.paired_segments = overlap.paired;
  report.unpaired_segments = overlap.unpaired;
  report.wrong_pause_count = WrongPauseCount(ref_pauses, hyp_pauses);
  report.bleu = CorpusBleu(hyp_text, ref_text);
  report.exact_match = 100.0 * exact / static_cast<double>(translations.size());
  return report;
}

EvalReport EvaluateRun(const std::string& translations_path, const std::string& references_path,
                       const Lexicon* lexicon) {
  return Evaluate(ReadTranslations(translations_path), ReadPrepared(references_path), lexicon);
}

std::vector<TranslationRecord> ReferencesAsTranslations(const std::vector<PreparedRecord>& refs) {
  std::vector<TranslationRecord> out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    TranslationRecord t;
    t.index = static_cast<int>(i);
    t.source_text = refs[i].source_text;
    t.constraint_segments = refs[i].constraint_segments;
    t.rows = refs[i].rows;
    t.segments = refs[i].reference_segments;
    t.pauses = static_cast<int>(refs[i].reference_segments.size()) - 1;
    std::vector<std::string> tokens;
    for (const auto& r : RenderInterleaved(t.rows)) tokens.push_back(r);
    t.interleaved = JoinTokens(tokens);
    out.push_back(std::move(t));
  }
  return out;
}

std::string EvalReport::ToJson() const {
  json diag = json::array();
  for (const SentenceDiagnostics& d : diagnostics) {
    diag.push_back({{"index", d.index},
                    {"exact_match", d.exact_match},
                    {"reference_pauses", d.reference_pauses},
                    {"hypothesis_pauses", d.hypothesis_pauses},
                    {"overlap", d.overlap},
                    {"unpaired_segments", d.unpaired_segments},
                    {"finished", d.finished},
                    {"well_formed", d.well_formed}});
  }
  return json{{"name", name},
              {"bleu", bleu},
              {"speech_overlap", speech_overlap},
              {"speech_overlap_clamped", speech_overlap_clamped},
              {"speech_overlap_per_sentence", speech_overlap_per_sentence},
              {"wrong_pause_count", wrong_pause_count},
              {"exact_match", exact_match},
              {"sentences", sentences},
              {"paired_segments", paired_segments},
              {"unpaired_segments", unpaired_segments},
              {"unfinished", unfinished},
              {"diagnostics", diag}}
      .dump();
}

EvalReport EvalReport::FromJson(const std::string& line) {
  try {
    const json j = json::parse(line);
    EvalReport r;
    r.name = j.at("name");
    r.bleu = j.at("bleu");
    r.speech_overlap = j.at("speech_overlap");
    r.speech_overlap_clamped = j.at("speech_overlap_clamped");
    r.speech_overlap_per_sentence = j.at("speech_overlap_per_sentence");
    r.wrong_pause_count = j.at("wrong_pause_count");
    r.exact_match = j.at("exact_match");
    r.sentences = j.at("sentences");
    r.paired_segments = j.at("paired_segments");
    r.unpaired_segments = j.at("unpaired_segments");
    r.unfinished = j.at("unfinished");
    for (const json& d : j.at("diagnostics")) {
      SentenceDiagnostics s;
      s.index = d.at("index");
      s.exact_match = d.at("exact_match");
      s.reference_pauses = d.at("reference_pauses");
      s.hypothesis_pauses = d.at("hypothesis_pauses");
      s.overlap = d.at("overlap");
      s.unpaired_segments = d.at("unpaired_segments");
      s.finished = d.at("finished");
      s.well_formed = d.at("well_formed");
      r.diagnostics.push_back(s);
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report record: ") + e.what(), 1);
  }
}

std::string FormatReportTable(const std::vector<EvalReport>& rows) {
  std::size_t name_width = 13;
  for (const EvalReport& r : rows) name_width = std::max(name_width, r.name.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %7s  %8s  %16s  %5s  %7s\n", static_cast<int>(name_width),
                "configuration", "BLEU", "Overlap", "Overlap(clamped)", "W.P.", "Exact%");
  out << buf << std::string(name_width + 56, '-') << '\n';
  for (const EvalReport& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %7.2f  %8.4f  %16.4f  %5d  %7.1f\n",
                  static_cast<int>(name_width), r.name.c_str(), r.bleu, r.speech_overlap,
                  r.speech_overlap_clamped, r.wrong_pause_count, r.exact_match);
    out << buf;
  }
  return out.str();
}

}  // namespace isomt
