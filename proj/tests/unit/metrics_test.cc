#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "isomt/alignment.h"
#include "isomt/errors.h"
#include "isomt/metrics.h"
#include "isomt/records.h"
#include "isomt/report.h"
#include "isomt/rng.h"
#include "isomt/synthetic.h"
#include "json.hpp"
#include "support/bleu_oracle.h"

namespace isomt {
namespace {

using testing::OracleBleu;

std::string RandomSentence(Rng& rng, int min_len, int max_len) {
  static const char* kWords[] = {"the", "a", "cat", "Dog", "sat", "on", "mat", "red", "big", "ran"};
  const long n = rng.UniformInt(min_len, max_len);
  std::string s;
  for (long i = 0; i < n; ++i) s += std::string(i ? " " : "") + kWords[rng.UniformInt(0, 9)];
  return s;
}

TEST_CASE("BLEU of an identical corpus is 100") {
  Rng rng(2);
  std::vector<std::string> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(RandomSentence(rng, 4, 12));
  CHECK(CorpusBleu(corpus, corpus) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("repeated hypothesis words are clipped by the reference") {
  const BleuStats s = SentenceBleuStats("the the the the", "the cat sat down");
  CHECK(s.correct[0] == 1);
  CHECK(s.total[0] == 4);
  CHECK(s.correct[1] == 0);
  CHECK(s.total[3] == 1);
}

TEST_CASE("BLEU is case-insensitive and splits on whitespace only") {
  CHECK(SentenceBleuStats("The CAT, sat", "the cat, SAT").correct[2] == 1);
  CHECK(SentenceBleuStats("cat,", "cat").correct[0] == 0);
}

TEST_CASE("BLEU matches the frozen reference implementation") {
  std::ifstream in(std::string(ISOMT_TEST_DATA_DIR) + "/bleu_vectors.json");
  REQUIRE(in);
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc.at("signature").get<std::string>().find("case:lc|eff:no|tok:none|smooth:exp") !=
        std::string::npos);
  for (const auto& c : doc.at("cases")) {
    const auto hyps = c.at("hypotheses").get<std::vector<std::string>>();
    const auto refs = c.at("references").get<std::vector<std::string>>();
    INFO(hyps.front());
    CHECK(std::abs(CorpusBleu(hyps, refs) - c.at("bleu").get<double>()) <= 0.1);
  }
}

TEST_CASE("BLEU matches an independent formula on random corpora") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const long n = rng.UniformInt(1, 30);
    std::vector<std::string> hyps, refs;
    for (long i = 0; i < n; ++i) {
      hyps.push_back(RandomSentence(rng, 0, 10));
      refs.push_back(RandomSentence(rng, 1, 10));
    }
    INFO("trial " << trial);
    CHECK(std::abs(CorpusBleu(hyps, refs) - OracleBleu(hyps, refs)) <= 1e-6);
  }
}

TEST_CASE("BLEU rejects empty and mismatched corpora") {
  CHECK_THROWS_AS(CorpusBleu({}, {}), ValidationError);
  CHECK_THROWS_AS(CorpusBleu({"a"}, {"a", "b"}), ValidationError);
}

TEST_CASE("speech overlap reference values") {
  CHECK(SpeechOverlap({{100}}, {{100}}).overlap == 1.0);
  CHECK(SpeechOverlap({{100}}, {{80}}).overlap == doctest::Approx(0.8));
  CHECK(SpeechOverlap({{100}}, {{120}}).overlap == doctest::Approx(0.8));
  // Overruns beyond twice the reference go negative and are kept.
  const auto r = SpeechOverlap({{100}}, {{250}});
  CHECK(r.overlap == doctest::Approx(-0.5));
  CHECK(r.clamped == 0.0);
}

TEST_CASE("speech overlap is a global mean over paired segments") {
  const auto r = SpeechOverlap({{100, 50}, {10}}, {{100, 25}, {5, 7}});
  CHECK(r.paired == 3);
  CHECK(r.unpaired == 1);
  CHECK(r.overlap == doctest::Approx((1.0 + 0.5 + 0.5) / 3.0));
  CHECK(r.per_sentence == doctest::Approx((0.75 + 0.5) / 2.0));
}

TEST_CASE("speech overlap is scale invariant and at most one") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<int>> ref, hyp, ref3, hyp3;
    for (int s = 0; s < 5; ++s) {
      ref.emplace_back();
      hyp.emplace_back();
      for (long k = rng.UniformInt(1, 3); k > 0; --k) {
        ref.back().push_back(static_cast<int>(rng.UniformInt(1, 200)));
        hyp.back().push_back(static_cast<int>(rng.UniformInt(0, 300)));
      }
      ref3.emplace_back();
      hyp3.emplace_back();
      for (int v : ref.back()) ref3.back().push_back(3 * v);
      for (int v : hyp.back()) hyp3.back().push_back(3 * v);
    }
    const auto a = SpeechOverlap(ref, hyp);
    CHECK(a.overlap <= 1.0);
    CHECK(a.clamped >= 0.0);
    CHECK(a.clamped >= a.overlap);
    CHECK(SpeechOverlap(ref3, hyp3).overlap == doctest::Approx(a.overlap));
  }
}

TEST_CASE("speech overlap input errors") {
  CHECK_THROWS_AS(SpeechOverlap({{0}}, {{1}}), ValidationError);
  CHECK_THROWS_AS(SpeechOverlap({{10}}, {{-1}}), ValidationError);
  CHECK_THROWS_AS(SpeechOverlap({{10}}, {{1}, {2}}), ValidationError);
}

TEST_CASE("wrong pause count compares sentence by sentence") {
  CHECK(WrongPauseCount({1, 0, 2}, {1, 1, 2}) == 1);
  CHECK(WrongPauseCount({1, 0, 2}, {1, 0, 2}) == 0);
}

TEST_CASE("corpus metrics ignore sentence order") {
  Rng rng(9);
  std::vector<std::string> hyps, refs;
  std::vector<std::vector<int>> rseg, hseg;
  for (int i = 0; i < 12; ++i) {
    hyps.push_back(RandomSentence(rng, 2, 9));
    refs.push_back(RandomSentence(rng, 2, 9));
    rseg.push_back({static_cast<int>(rng.UniformInt(10, 90))});
    hseg.push_back({static_cast<int>(rng.UniformInt(10, 90))});
  }
  const double bleu = CorpusBleu(hyps, refs);
  const double overlap = SpeechOverlap(rseg, hseg).overlap;
  std::vector<std::size_t> order(hyps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = (i * 5 + 3) % order.size();
  std::vector<std::string> ph, pr;
  std::vector<std::vector<int>> prs, phs;
  for (std::size_t i : order) {
    ph.push_back(hyps[i]);
    pr.push_back(refs[i]);
    prs.push_back(rseg[i]);
    phs.push_back(hseg[i]);
  }
  CHECK(CorpusBleu(ph, pr) == doctest::Approx(bleu).epsilon(1e-12));
  CHECK(SpeechOverlap(prs, phs).overlap == doctest::Approx(overlap).epsilon(1e-12));
}

std::vector<PreparedRecord> SyntheticReferences(SyntheticCorpus* corpus) {
  SyntheticConfig cfg;
  cfg.num_sentences = 15;
  cfg.pause_probability = 0.4;
  cfg.min_words = 4;
  const FrameClock clock;
  *corpus = GenerateSyntheticCorpus(cfg, clock, Rng(12));
  std::vector<PreparedRecord> refs;
  for (const auto& raw : corpus->utterances) {
    const auto u = MarkPauses(raw, 0.3, clock);
    PreparedRecord r;
    r.id = static_cast<int>(refs.size());
    r.source_text = u.source_text;
    r.rows = TargetRows(u);
    r.segments = ComputeSegments(u).segment_durations;
    r.reference_segments = r.segments;
    r.constraint_segments = r.segments;
    refs.push_back(std::move(r));
  }
  return refs;
}

TEST_CASE("references evaluated against themselves are perfect") {
  SyntheticCorpus corpus;
  const auto refs = SyntheticReferences(&corpus);
  const EvalReport r = Evaluate(ReferencesAsTranslations(refs), refs, &corpus.lexicon);
  CHECK(r.bleu == doctest::Approx(100.0));
  CHECK(r.speech_overlap == 1.0);
  CHECK(r.wrong_pause_count == 0);
  CHECK(r.exact_match == 100.0);
  CHECK(r.sentences == 15);
  CHECK(r.unpaired_segments == 0);
}

TEST_CASE("a dropped pause shows up in every diagnostic") {
  SyntheticCorpus corpus;
  const auto refs = SyntheticReferences(&corpus);
  auto hyps = ReferencesAsTranslations(refs);
  auto it = std::find_if(hyps.begin(), hyps.end(), [](const TranslationRecord& t) { return t.pauses > 0; });
  REQUIRE(it != hyps.end());
  it->rows.erase(std::find_if(it->rows.begin(), it->rows.end(),
                              [](const TargetRow& row) { return row.token == kPauseToken; }));
  const auto merged = it->segments[0] + it->segments[1];
  it->segments.erase(it->segments.begin());
  it->segments[0] = merged;
  --it->pauses;
  const EvalReport r = Evaluate(hyps, refs, &corpus.lexicon);
  CHECK(r.wrong_pause_count == 1);
  CHECK(r.exact_match == doctest::Approx(100.0 * 14 / 15));
  CHECK(r.unpaired_segments == 1);
  CHECK(r.speech_overlap < 1.0);
  const auto& d = r.diagnostics[static_cast<std::size_t>(it - hyps.begin())];
  CHECK_FALSE(d.exact_match);
  CHECK(d.hypothesis_pauses == d.reference_pauses - 1);
}

TEST_CASE("evaluation report JSON round trip") {
  SyntheticCorpus corpus;
  const auto refs = SyntheticReferences(&corpus);
  EvalReport r = Evaluate(ReferencesAsTranslations(refs), refs, &corpus.lexicon);
  r.name = "self";
  CHECK(EvalReport::FromJson(r.ToJson()) == r);
  const std::string table = FormatReportTable({r});
  CHECK(table.find("self") != std::string::npos);
  CHECK(table.find("100.00") != std::string::npos);
}

TEST_CASE("rows without a lexicon become underscore-joined words") {
  const std::vector<TargetRow> rows{{"K", 3}, {"AE1", 4}, {"<eow>", 0}, {"[pause]", 0}, {"T", 2}, {"<eow>", 0}};
  CHECK(RowsToWords(rows, nullptr) == std::vector<std::string>{"K_AE1", "T"});
}

}  // namespace
}  // namespace isomt
