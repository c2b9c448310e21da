#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace isomt {

// Byte-pair encoding over whitespace-separated words. Non-final subwords carry
// an "@@" suffix, so joining the output with spaces and deleting "@@ "
// restores the input.
class BpeModel {
 public:
  using Pair = std::pair<std::string, std::string>;

  // Greedy most-frequent-pair merges with an end-of-word marker on the last
  // symbol of each word. Count ties break towards the lexicographically
  // smallest pair.
  static BpeModel Learn(const std::vector<std::string>& corpus, int merges);

  std::vector<std::string> Apply(const std::string& text) const;
  std::vector<std::string> ApplyWord(const std::string& word) const;

  const std::vector<Pair>& merges() const { return merges_; }

  // One merge per line, "left right", in learned order.
  void Save(const std::string& path) const;
  static BpeModel Load(const std::string& path);

 private:
  std::vector<Pair> merges_;
  std::map<Pair, int> ranks_;
};

inline constexpr const char* kBpeEndOfWord = "</w>";

std::string JoinSubwords(const std::vector<std::string>& subwords);

// Splits a UTF-8 string into code points.
std::vector<std::string> Utf8Chars(const std::string& word);

}  // namespace isomt
