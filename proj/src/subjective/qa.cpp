#include "finevq/subjective/qa.hpp"

#include <fstream>

#include "finevq/error.hpp"
#include "json.hpp"

namespace finevq::subjective {

namespace {
constexpr std::array<std::string_view, 5> kTaskNames = {
    "yesno", "which_exist", "which_most", "overall_quality", "score"};
}

std::string_view ToString(QaTask t) { return kTaskNames[static_cast<int>(t)]; }

QaTask QaTaskFromString(std::string_view s) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == s) return static_cast<QaTask>(i);
  }
  throw ValidationError("unknown QA task '" + std::string(s) + "'");
}

std::string_view LevelFromMos(double mos, Dimension d, const LevelThresholds& th) {
  if (!(mos >= 0.0 && mos <= 100.0)) {
    throw ValidationError("MOS " + std::to_string(mos) + " outside [0, 100]");
  }
  std::size_t bin = 0;
  while (bin < th.size() && mos >= th[bin]) ++bin;
  return LevelWords(d)[bin];
}

std::string YesNoQuestion(Dimension d) {
  return "Is there any " + std::string(ToString(d)) + " distortion in this video?";
}
std::string WhichExistQuestion() { return "Which distortion exists in this video?"; }
std::string WhichMostQuestion() {
  return "Which distortion has the most impact on the quality of this video?";
}
std::string ScoreQuestion(Dimension d) {
  return "How would you rate the " + std::string(ToString(d)) +
         " quality of this video?";
}

std::vector<QaPair> GenerateQa(const MosTable& mos, const AttributeLabelSet& labels,
                               const LevelThresholds& th) {
  std::vector<QaPair> out;
  const auto videos = mos.videos();
  out.reserve(videos.size() * 8);
  for (const auto& v : videos) {
    std::string exist;
    for (Dimension d : kDistortionDimensions) {
      const bool yes = labels.Get(v, d).HasDistortion();
      out.push_back({v, QaTask::kYesNo, d, YesNoQuestion(d), yes ? "yes" : "no",
                     std::nullopt});
      if (yes) {
        if (!exist.empty()) exist += ", ";
        exist += ToString(d);
      }
    }
    out.push_back({v, QaTask::kWhichExist, Dimension::kOverall,
                   WhichExistQuestion(), exist.empty() ? "none" : exist,
                   std::nullopt});

    Dimension worst = kDistortionDimensions[0];
    double worst_mos = mos.Get(v, worst).mos;
    for (Dimension d : kDistortionDimensions) {
      const double m = mos.Get(v, d).mos;
      if (m < worst_mos) {
        worst = d;
        worst_mos = m;
      }
    }
    out.push_back({v, QaTask::kWhichMost, Dimension::kOverall, WhichMostQuestion(),
                   std::string(ToString(worst)), std::nullopt});

    const double overall = mos.Get(v, Dimension::kOverall).mos;
    out.push_back({v, QaTask::kOverallQuality, Dimension::kOverall,
                   ScoreQuestion(Dimension::kOverall),
                   std::string(LevelFromMos(overall, Dimension::kOverall, th)),
                   overall});
  }
  return out;
}

std::vector<QaPair> DimensionScorePairs(const std::string& video_id,
                                        const MosTable& mos,
                                        const LevelThresholds& th) {
  std::vector<QaPair> out;
  for (Dimension d : kAllDimensions) {
    const double m = mos.Get(video_id, d).mos;
    out.push_back({video_id, QaTask::kScore, d, ScoreQuestion(d),
                   std::string(LevelFromMos(m, d, th)), m});
  }
  return out;
}

std::string SerializeQa(const QaPair& qa) {
  nlohmann::ordered_json j;
  j["video_id"] = qa.video_id;
  j["task"] = ToString(qa.task);
  j["dimension"] = ToString(qa.dimension);
  j["question"] = qa.question;
  j["answer"] = qa.answer;
  if (qa.numeric_target) j["numeric_target"] = *qa.numeric_target;
  return j.dump();
}

QaPair ParseQa(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    QaPair qa;
    qa.video_id = j.at("video_id").get<std::string>();
    qa.task = QaTaskFromString(j.at("task").get<std::string>());
    qa.dimension = DimensionFromString(j.value("dimension", std::string("overall")));
    qa.question = j.at("question").get<std::string>();
    qa.answer = j.at("answer").get<std::string>();
    if (j.contains("numeric_target")) qa.numeric_target = j["numeric_target"].get<double>();
    return qa;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed QA record: ") + e.what());
  }
}

void WriteQa(std::span<const QaPair> pairs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  for (const auto& p : pairs) out << SerializeQa(p) << '\n';
}

std::vector<QaPair> ReadQa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open QA file '" + path.string() + "'");
  std::vector<QaPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(ParseQa(line));
  }
  return out;
}

}  // namespace finevq::subjective
