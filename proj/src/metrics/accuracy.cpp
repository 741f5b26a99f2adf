#include "finevq/metrics/accuracy.hpp"

#include <cctype>

#include "finevq/error.hpp"
#include "finevq/subjective/attributes.hpp"
#include "finevq/tsv.hpp"

namespace finevq::metrics {

std::string LeadingYesNo(std::string_view text) {
  std::string word;
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
    ++i;
  }
  return (word == "yes" || word == "no") ? word : std::string();
}

std::set<std::string> ParseAnswerSet(std::string_view text) {
  std::string s = ToLower(text);
  // Treat " and " and trailing punctuation as separators.
  for (std::size_t pos; (pos = s.find(" and ")) != std::string::npos;) {
    s.replace(pos, 5, ",");
  }
  for (char& c : s) {
    if (c == '.' || c == ';' || c == '|') c = ',';
  }
  std::set<std::string> out;
  for (const auto& part : SplitString(s, ',')) {
    std::string item = subjective::NormalizeLabel(part);
    if (!item.empty()) out.insert(item);
  }
  return out;
}

bool AnswerCorrect(std::string_view predicted, std::string_view gold,
                   QuestionType type) {
  if (type == QuestionType::kYesNo) {
    const std::string p = LeadingYesNo(predicted);
    return !p.empty() && p == LeadingYesNo(gold);
  }
  const auto p = ParseAnswerSet(predicted);
  return !p.empty() && p == ParseAnswerSet(gold);
}

double AttributeAccuracy(std::span<const std::pair<std::string, std::string>> answers,
                         QuestionType type) {
  if (answers.empty()) throw ValidationError("no answers to score");
  std::size_t correct = 0;
  for (const auto& [pred, gold] : answers) correct += AnswerCorrect(pred, gold, type);
  return static_cast<double>(correct) / static_cast<double>(answers.size());
}

}  // namespace finevq::metrics
