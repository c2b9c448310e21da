#include "isomt/synthetic.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "isomt/errors.h"
#include "isomt/vocab.h"

namespace isomt {

namespace {

std::string JoinPhones(const std::vector<std::string>& phones) {
  std::string key;
  for (const auto& p : phones) {
    if (!key.empty()) key += ' ';
    key += p;
  }
  return key;
}

const std::vector<std::string>& PhoneInventory() {
  static const std::vector<std::string> inventory{
      "D",   "OW1", "N",  "T",   "Y",  "UW1", "IH0", "K",   "AE1", "S",  "M",   "AH0",
      "L",   "IY1", "R",  "EH1", "P",  "AA1", "B",   "ER0", "F",   "AY1", "G",   "EY1",
      "V",   "AO1", "HH", "UH1", "W",  "AW1", "Z",  "OY1", "SH",  "TH", "JH",  "CH"};
  return inventory;
}

std::string PseudoWord(Rng& rng) {
  static const std::string consonants = "bdfgklmnprstvwz";
  static const std::string vowels = "aeiou";
  const long syllables = rng.UniformInt(1, 3);
  std::string w;
  for (long s = 0; s < syllables; ++s) {
    w += consonants[rng.UniformInt(0, static_cast<long>(consonants.size()) - 1)];
    w += vowels[rng.UniformInt(0, static_cast<long>(vowels.size()) - 1)];
  }
  if (rng.Bernoulli(0.3)) w += consonants[rng.UniformInt(0, static_cast<long>(consonants.size()) - 1)];
  return w;
}

std::string SpellPhones(const std::vector<std::string>& phones) {
  std::string w;
  for (const auto& p : phones)
    for (char c : p)
      if (c < '0' || c > '9') w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

}  // namespace

void Lexicon::Add(const std::string& word, const std::vector<std::string>& phones) {
  const std::string key = JoinPhones(phones);
  if (by_phones_.contains(key) || entries_.contains(word)) {
    throw ValidationError("lexicon entry '" + word + "' is not unique");
  }
  entries_.emplace(word, phones);
  by_phones_.emplace(key, word);
}

std::string Lexicon::WordFor(const std::vector<std::string>& phones) const {
  auto it = by_phones_.find(JoinPhones(phones));
  return it == by_phones_.end() ? "<unk>" : it->second;
}

const std::vector<std::string>& Lexicon::PhonesFor(const std::string& word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) throw VocabularyError("word '" + word + "' not in lexicon");
  return it->second;
}

void Lexicon::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lexicon " + path);
  for (const auto& [word, phones] : entries_) out << word << '\t' << JoinPhones(phones) << '\n';
}

Lexicon Lexicon::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path);
  Lexicon lex;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("lexicon entry without TAB in " + path, line_no);
    std::istringstream ps(line.substr(tab + 1));
    std::vector<std::string> phones;
    std::string p;
    while (ps >> p) phones.push_back(p);
    lex.Add(line.substr(0, tab), phones);
  }
  return lex;
}

std::vector<std::string> PhonesToWords(const std::vector<std::string>& tokens,
                                       const Lexicon& lexicon) {
  std::vector<std::string> words;
  std::vector<std::string> current;
  for (const auto& t : tokens) {
    if (t == kEowToken) {
      words.push_back(lexicon.WordFor(current));
      current.clear();
    } else if (t == kPauseToken) {
      continue;
    } else {
      current.push_back(t);
    }
  }
  if (!current.empty()) words.push_back(lexicon.WordFor(current));
  return words;
}

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticConfig& config, const FrameClock& clock,
                                        Rng rng) {
  const auto& inventory = PhoneInventory();
  if (config.phoneme_inventory < 2 ||
      config.phoneme_inventory > static_cast<int>(inventory.size())) {
    throw ConfigError("phoneme_inventory must be in [2, " + std::to_string(inventory.size()) + "]");
  }
  if (config.min_words < 1 || config.max_words < config.min_words ||
      config.min_phones_per_word < 1 || config.max_phones_per_word < config.min_phones_per_word ||
      config.min_base_frames < 1 || config.max_base_frames < config.min_base_frames ||
      config.source_vocab < 1 || config.num_sentences < 0) {
    throw ConfigError("inconsistent synthetic corpus ranges");
  }

  SyntheticCorpus corpus;
  Rng lang = rng.Split("language");
  std::vector<int> base_frames(config.phoneme_inventory);
  for (int& b : base_frames) b = static_cast<int>(lang.UniformInt(config.min_base_frames, config.max_base_frames));

  // Source words and their target pronunciations, both unique.
  std::vector<std::string> source_words;
  std::vector<std::vector<int>> pronunciations;
  std::set<std::string> used_words;
  std::set<std::vector<int>> used_prons;
  int attempts = 0;
  while (static_cast<int>(source_words.size()) < config.source_vocab) {
    if (++attempts > 100000) throw ConfigError("cannot draw enough distinct synthetic words");
    std::string w = PseudoWord(lang);
    const long n = lang.UniformInt(config.min_phones_per_word, config.max_phones_per_word);
    std::vector<int> pron(static_cast<std::size_t>(n));
    for (int& p : pron) p = static_cast<int>(lang.UniformInt(0, config.phoneme_inventory - 1));
    if (used_words.contains(w) || used_prons.contains(pron)) continue;
    used_words.insert(w);
    used_prons.insert(pron);
    source_words.push_back(w);
    pronunciations.push_back(pron);
  }
  std::set<std::string> target_names;
  std::vector<std::string> target_words;
  for (std::size_t k = 0; k < source_words.size(); ++k) {
    std::vector<std::string> phones;
    for (int p : pronunciations[k]) phones.push_back(inventory[p]);
    std::string name = SpellPhones(phones);
    while (target_names.contains(name)) name += "x";
    target_names.insert(name);
    target_words.push_back(name);
    corpus.lexicon.Add(name, phones);
    corpus.translation.emplace(source_words[k], name);
  }

  struct Skeleton {
    std::vector<int> words;
    std::vector<bool> pause_after;
  };
  std::vector<Skeleton> skeletons;
  Rng sentences = rng.Split("sentences");
  Rng timing = rng.Split("timing");
  const int distinct = config.distinct_sources > 0 ? config.distinct_sources : config.num_sentences;
  for (int s = 0; s < config.num_sentences; ++s) {
    if (s < distinct) {
      Skeleton sk;
      const long n = sentences.UniformInt(config.min_words, config.max_words);
      for (long i = 0; i < n; ++i) {
        sk.words.push_back(static_cast<int>(sentences.UniformInt(0, config.source_vocab - 1)));
        sk.pause_after.push_back(i + 1 < n && sentences.Bernoulli(config.pause_probability));
      }
      skeletons.push_back(std::move(sk));
    }
    const Skeleton& sk = skeletons[static_cast<std::size_t>(s % distinct)];

    AlignedUtterance u;
    auto silence = [&](double lo, double hi) {
      const double seconds = lo + (hi - lo) * timing.Uniform();
      u.units.push_back({"sil", std::max(1, clock.ToFrames(seconds)), UnitKind::kSilence});
    };
    if (timing.Bernoulli(config.edge_silence_probability)) silence(0.05, 0.5);
    std::string source;
    std::size_t last_phone_of_segment = 0;
    auto lengthen = [&] {
      u.units[last_phone_of_segment].frames +=
          static_cast<int>(timing.UniformInt(0, config.max_final_lengthening));
    };
    for (std::size_t i = 0; i < sk.words.size(); ++i) {
      const int w = sk.words[i];
      if (!source.empty()) source += ' ';
      source += source_words[w];
      for (int p : pronunciations[w]) {
        const long jitter = config.phone_jitter_frames > 0
                                ? timing.UniformInt(-config.phone_jitter_frames, config.phone_jitter_frames)
                                : 0;
        const int frames = std::max(1, base_frames[p] + static_cast<int>(jitter));
        u.units.push_back({inventory[p], frames, UnitKind::kPhone});
      }
      u.word_boundaries.push_back(u.units.size() - 1);
      last_phone_of_segment = u.units.size() - 1;
      if (sk.pause_after[i]) {
        lengthen();
        source += " ,";
        silence(config.min_pause_seconds, config.max_pause_seconds);
      } else if (i + 1 < sk.words.size() && timing.Bernoulli(config.short_silence_probability)) {
        silence(0.01, config.max_short_silence_seconds);
      }
    }
    lengthen();
    if (timing.Bernoulli(config.edge_silence_probability)) silence(0.05, 0.5);
    u.source_text = std::move(source);
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

}  // namespace isomt
