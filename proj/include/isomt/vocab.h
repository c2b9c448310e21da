#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace isomt {

inline constexpr std::string_view kNullToken = "NULL";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kEowToken = "<eow>";
inline constexpr std::string_view kPauseToken = "[pause]";
inline constexpr std::string_view kSeparatorToken = "<||>";

inline constexpr int kNullId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kEowId = 2;
inline constexpr int kPauseId = 3;
inline constexpr int kSeparatorId = 4;
inline constexpr int kFirstBinId = 5;

std::string BinToken(int bin);

// Dense token <-> id map. Ids 0..4 are the reserved NULL, </s>, <eow>,
// [pause] and <||> tokens, followed by one <binK> tag per duration bin.
class Vocabulary {
 public:
  explicit Vocabulary(int num_bins = 0);

  int Add(std::string_view token);
  int Id(std::string_view token) const;
  std::optional<int> Find(std::string_view token) const;
  const std::string& Token(int id) const;
  int BinId(int bin) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  int num_bins() const { return num_bins_; }
  int num_reserved() const { return kFirstBinId + num_bins_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One token per line after a "#isomt-vocab 1 bins=N" header.
  void Save(const std::string& path) const;
  static Vocabulary Load(const std::string& path);

 private:
  int num_bins_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace isomt
