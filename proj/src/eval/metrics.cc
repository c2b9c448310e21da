#include "isomt/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "isomt/errors.h"

namespace isomt {

OverlapResult SpeechOverlap(const std::vector<std::vector<int>>& reference,
                            const std::vector<std::vector<int>>& hypothesis) {
  if (reference.size() != hypothesis.size()) {
    throw ValidationError("overlap: " + std::to_string(reference.size()) + " reference and " +
                          std::to_string(hypothesis.size()) + " hypothesis sentences");
  }
  OverlapResult r;
  double sum = 0.0, clamped = 0.0, sentence_sum = 0.0;
  std::size_t sentences = 0;
  for (std::size_t s = 0; s < reference.size(); ++s) {
    const auto& ref = reference[s];
    const auto& hyp = hypothesis[s];
    for (int d : ref)
      if (d <= 0) throw ValidationError("overlap: reference duration " + std::to_string(d) +
                                        " in sentence " + std::to_string(s));
    for (int d : hyp)
      if (d < 0) throw ValidationError("overlap: negative hypothesis duration in sentence " +
                                       std::to_string(s));
    const std::size_t n = std::min(ref.size(), hyp.size());
    r.unpaired += std::max(ref.size(), hyp.size()) - n;
    double local = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double term = 1.0 - std::abs(ref[i] - hyp[i]) / static_cast<double>(ref[i]);
      sum += term;
      clamped += std::clamp(term, 0.0, 1.0);
      local += term;
    }
    r.paired += n;
    if (n > 0) {
      sentence_sum += local / static_cast<double>(n);
      ++sentences;
    }
  }
  if (r.paired == 0) throw ValidationError("overlap: no pairable segments");
  r.overlap = sum / static_cast<double>(r.paired);
  r.clamped = clamped / static_cast<double>(r.paired);
  r.per_sentence = sentence_sum / static_cast<double>(sentences);
  return r;
}

int WrongPauseCount(const std::vector<int>& reference, const std::vector<int>& hypothesis) {
  if (reference.size() != hypothesis.size()) {
    throw ValidationError("wrong-pause count: " + std::to_string(reference.size()) +
                          " reference and " + std::to_string(hypothesis.size()) +
                          " hypothesis sentences");
  }
  int wrong = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) wrong += reference[i] != hypothesis[i];
  return wrong;
}

namespace {

std::vector<std::string> LowerTokens(const std::string& line) {
  std::string lower(line);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::istringstream in(lower);
  std::vector<std::string> tokens;
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

std::map<std::vector<std::string>, long> NGrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, long> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

}  // namespace

BleuStats SentenceBleuStats(const std::string& hypothesis, const std::string& reference) {
  const auto hyp = LowerTokens(hypothesis);
  const auto ref = LowerTokens(reference);
  BleuStats s;
  s.hyp_len = static_cast<long>(hyp.size());
  s.ref_len = static_cast<long>(ref.size());
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto h = NGrams(hyp, n);
    const auto r = NGrams(ref, n);
    for (const auto& [gram, count] : h) {
      s.total[n - 1] += count;
      auto it = r.find(gram);
      if (it != r.end()) s.correct[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

double BleuFromStats(const BleuStats& stats) {
  if (stats.total[0] == 0) return 0.0;
  // No matching n-gram of any order scores 0 before smoothing applies.
  if (std::all_of(stats.correct.begin(), stats.correct.end(), [](long c) { return c == 0; })) return 0.0;
  double log_sum = 0.0;
  double smooth = 1.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (stats.total[n] == 0) return 0.0;
    double p;
    if (stats.correct[n] == 0) {
      smooth *= 2.0;
      p = 100.0 / (smooth * static_cast<double>(stats.total[n]));
    } else {
      p = 100.0 * static_cast<double>(stats.correct[n]) / static_cast<double>(stats.total[n]);
    }
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (stats.hyp_len < stats.ref_len) {
    bp = stats.hyp_len > 0 ? std::exp(1.0 - static_cast<double>(stats.ref_len) /
                                                static_cast<double>(stats.hyp_len))
                           : 0.0;
  }
  return bp * std::exp(log_sum / 4.0);
}

double CorpusBleu(const std::vector<std::string>& hypotheses,
                  const std::vector<std::string>& references) {
  if (hypotheses.empty()) throw ValidationError("BLEU: empty corpus");
  if (hypotheses.size() != references.size()) {
    throw ValidationError("BLEU: " + std::to_string(hypotheses.size()) + " hypotheses for " +
                          std::to_string(references.size()) + " references");
  }
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const BleuStats s = SentenceBleuStats(hypotheses[i], references[i]);
    for (std::size_t n = 0; n < 4; ++n) {
      total.correct[n] += s.correct[n];
      total.total[n] += s.total[n];
    }
    total.hyp_len += s.hyp_len;
    total.ref_len += s.ref_len;
  }
  return BleuFromStats(total);
}

}  // namespace isomt
