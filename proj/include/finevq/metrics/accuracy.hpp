#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace finevq::metrics {

enum class QuestionType { kYesNo, kWhich };

// Leading yes/no token, lowercase; empty if the text starts with neither.
std::string LeadingYesNo(std::string_view text);

// Comma / "and" separated items, normalized. "none" parses to {"none"}.
std::set<std::string> ParseAnswerSet(std::string_view text);

bool AnswerCorrect(std::string_view predicted, std::string_view gold,
                   QuestionType type);

// Fraction of (predicted, gold) pairs judged correct. Unparseable predictions
// count as wrong. Throws on empty input.
double AttributeAccuracy(std::span<const std::pair<std::string, std::string>> answers,
                         QuestionType type);

}  // namespace finevq::metrics
