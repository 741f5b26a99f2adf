#include "finevq/model/tokenizer.hpp"

#include <cctype>

#include "finevq/dimension.hpp"
#include "finevq/error.hpp"
#include "finevq/subjective/qa.hpp"

namespace finevq::model {

namespace {
bool IsPunct(char c) { return c == ',' || c == '?' || c == '.' || c == ';' || c == ':'; }
}  // namespace

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (IsPunct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush();
  return out;
}

Vocab::Vocab() {
  for (const char* s : {"<pad>", "<bos>", "<eos>", "<unk>"}) Insert(s);
}

Vocab::Vocab(const std::vector<std::string>& words) : Vocab() {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i < 4) {
      if (words[i] != words_[i]) throw ValidationError("vocabulary must start with the specials");
      continue;
    }
    if (ids_.count(words[i])) throw ValidationError("duplicate vocabulary word '" + words[i] + "'");
    Insert(words[i]);
  }
}

void Vocab::Insert(const std::string& w) {
  if (ids_.count(w)) return;
  ids_[w] = static_cast<int>(words_.size());
  words_.push_back(w);
}

Vocab Vocab::FromTemplates() {
  using namespace subjective;
  Vocab v;
  auto add = [&v](std::string_view text) {
    for (const auto& w : SplitWords(text)) v.Insert(w);
  };
  add(WhichExistQuestion());
  add(WhichMostQuestion());
  for (Dimension d : kAllDimensions) {
    add(YesNoQuestion(d));
    add(ScoreQuestion(d));
    add(ToString(d));
    for (auto w : LevelWords(d)) add(w);
  }
  add("yes no none ,");
  return v;
}

int Vocab::Id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::Word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw ValidationError("token id " + std::to_string(id) + " out of range");
  }
  return words_[id];
}

std::vector<int> Vocab::Encode(std::string_view text) const {
  std::vector<int> out;
  for (const auto& w : SplitWords(text)) out.push_back(Id(w));
  return out;
}

std::vector<int> Vocab::EncodePrompt(std::string_view question) const {
  std::vector<int> out{kBos};
  for (int id : Encode(question)) out.push_back(id);
  return out;
}

std::vector<int> Vocab::EncodeAnswer(std::string_view answer) const {
  std::vector<int> out = Encode(answer);
  out.push_back(kEos);
  return out;
}

std::string Vocab::Decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    const std::string& w = Word(id);
    const bool punct = w.size() == 1 && IsPunct(w[0]);
    if (!out.empty() && !punct) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace finevq::model
