#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace finevq::model {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;

// Lowercased words; , ? . ; : become separate tokens.
std::vector<std::string> SplitWords(std::string_view text);

// Word-level vocabulary. Ids 0..3 are <pad> <bos> <eos> <unk>.
class Vocab {
 public:
  Vocab();
  explicit Vocab(const std::vector<std::string>& words);

  // Every word that the QA templates and answers can produce.
  static Vocab FromTemplates();

  int Id(std::string_view word) const;  // kUnk when absent
  const std::string& Word(int id) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::vector<int> Encode(std::string_view text) const;
  // <bos> followed by the question words.
  std::vector<int> EncodePrompt(std::string_view question) const;
  // Answer words followed by <eos>.
  std::vector<int> EncodeAnswer(std::string_view answer) const;
  // Joins words, attaching punctuation to the previous word; stops at <eos>
  // and skips other specials.
  std::string Decode(const std::vector<int>& ids) const;

  bool operator==(const Vocab& o) const { return words_ == o.words_; }

 private:
  void Insert(const std::string& w);
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace finevq::model
