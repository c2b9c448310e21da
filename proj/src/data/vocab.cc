#include "isomt/vocab.h"

#include <fstream>

#include "isomt/errors.h"

namespace isomt {

std::string BinToken(int bin) { return "<bin" + std::to_string(bin) + ">"; }

Vocabulary::Vocabulary(int num_bins) : num_bins_(num_bins) {
  if (num_bins < 0) throw ConfigError("negative bin count");
  for (std::string_view t :
       {kNullToken, kEosToken, kEowToken, kPauseToken, kSeparatorToken}) {
    Add(t);
  }
  for (int b = 0; b < num_bins; ++b) Add(BinToken(b));
}

int Vocabulary::Add(std::string_view token) {
  std::string key(token);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const int id = size();
  tokens_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) throw VocabularyError("unknown token '" + std::string(token) + "'");
  return it->second;
}

std::optional<int> Vocabulary::Find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::Token(int id) const {
  if (id < 0 || id >= size()) {
    throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(size()));
  }
  return tokens_[id];
}

int Vocabulary::BinId(int bin) const {
  if (bin < 0 || bin >= num_bins_) {
    throw VocabularyError("bin " + std::to_string(bin) + " outside [0, " +
                          std::to_string(num_bins_) + ")");
  }
  return kFirstBinId + bin;
}

void Vocabulary::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary " + path);
  out << "#isomt-vocab 1 bins=" << num_bins_ << '\n';
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#isomt-vocab 1 bins=", 0) != 0) {
    throw ParseError("missing vocabulary header in " + path, 1);
  }
  Vocabulary vocab(std::stoi(line.substr(line.find('=') + 1)));
  long line_no = 1;
  int expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (expected < vocab.num_reserved()) {
      if (line != vocab.Token(expected)) {
        throw ParseError("reserved token mismatch in " + path, line_no);
      }
    } else if (vocab.Add(line) != expected) {
      throw ParseError("duplicate token '" + line + "' in " + path, line_no);
    }
    ++expected;
  }
  return vocab;
}

}  // namespace isomt
