#include "isomt/bpe.h"

#include <fstream>
#include <limits>
#include <sstream>

#include "isomt/errors.h"

namespace isomt {

std::vector<std::string> Utf8Chars(const std::string& word) {
  std::vector<std::string> chars;
  for (std::size_t i = 0; i < word.size();) {
    const auto c = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    chars.push_back(word.substr(i, len));
    i += len;
  }
  return chars;
}

namespace {

std::vector<std::string> SplitWords(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<std::string> InitialSymbols(const std::string& word) {
  auto symbols = Utf8Chars(word);
  if (!symbols.empty()) symbols.back() += kBpeEndOfWord;
  return symbols;
}

void MergeInPlace(std::vector<std::string>& symbols, const BpeModel::Pair& pair) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      out.push_back(symbols[i] + symbols[i + 1]);
      ++i;
    } else {
      out.push_back(symbols[i]);
    }
  }
  symbols = std::move(out);
}

}  // namespace

BpeModel BpeModel::Learn(const std::vector<std::string>& corpus, int merges) {
  if (merges < 0) throw ConfigError("merge count must be non-negative");
  std::map<std::string, long> word_counts;
  for (const auto& line : corpus)
    for (const auto& w : SplitWords(line)) ++word_counts[w];
  std::vector<std::pair<std::vector<std::string>, long>> vocab;
  for (const auto& [w, n] : word_counts) vocab.emplace_back(InitialSymbols(w), n);

  BpeModel model;
  for (int m = 0; m < merges; ++m) {
    std::map<Pair, long> pair_counts;
    for (const auto& [symbols, n] : vocab)
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        pair_counts[{symbols[i], symbols[i + 1]}] += n;
    if (pair_counts.empty()) break;
    const Pair* best = nullptr;
    long best_count = 0;
    for (const auto& [pair, n] : pair_counts) {
      if (n > best_count) {
        best = &pair;
        best_count = n;
      }
    }
    const Pair chosen = *best;
    model.ranks_.emplace(chosen, static_cast<int>(model.merges_.size()));
    model.merges_.push_back(chosen);
    for (auto& [symbols, n] : vocab) MergeInPlace(symbols, chosen);
  }
  return model;
}

std::vector<std::string> BpeModel::ApplyWord(const std::string& word) const {
  auto symbols = InitialSymbols(word);
  while (symbols.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find({symbols[i], symbols[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
      }
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    MergeInPlace(symbols, merges_[best_rank]);
  }
  const std::string eow = kBpeEndOfWord;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size()) {
      symbols[i] += "@@";
    } else {
      symbols[i].resize(symbols[i].size() - eow.size());
    }
  }
  return symbols;
}

std::vector<std::string> BpeModel::Apply(const std::string& text) const {
  std::vector<std::string> out;
  for (const auto& w : SplitWords(text)) {
    auto pieces = ApplyWord(w);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::string JoinSubwords(const std::vector<std::string>& subwords) {
  std::string text;
  for (const auto& s : subwords) {
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "@@") == 0) {
      text += s.substr(0, s.size() - 2);
    } else {
      text += s;
      text += ' ';
    }
  }
  if (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

void BpeModel::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write BPE model " + path);
  for (const auto& [a, b] : merges_) out << a << ' ' << b << '\n';
}

BpeModel BpeModel::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open BPE model " + path);
  BpeModel model;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw ParseError("expected one merge pair in " + path, line_no);
    }
    model.ranks_.emplace(Pair{a, b}, static_cast<int>(model.merges_.size()));
    model.merges_.emplace_back(a, b);
  }
  return model;
}

}  // namespace isomt
