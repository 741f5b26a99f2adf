#include "finevq/metrics/report.hpp"

#include <fstream>

#include "finevq/error.hpp"

namespace finevq::metrics {

nlohmann::ordered_json ReportToJson(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["split"] = r.split_id;
  j["seed"] = r.seed;
  j["model"] = r.model_id;
  nlohmann::ordered_json dims = nlohmann::ordered_json::object();
  for (Dimension d : kAllDimensions) {
    const auto& s = r.dimensions[Index(d)];
    if (!s) continue;
    nlohmann::ordered_json b;
    b["srcc"] = s->srcc;
    b["krcc"] = s->krcc;
    b["plcc"] = s->plcc;
    b["plcc_fallback"] = s->plcc_fallback;
    b["n"] = s->n;
    dims[std::string(ToString(d))] = b;
  }
  j["dimensions"] = dims;
  nlohmann::ordered_json acc = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.accuracy) acc[k] = v;
  j["accuracy"] = acc;
  if (!r.notes.empty()) {
    nlohmann::ordered_json notes = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.notes) notes[k] = v;
    j["notes"] = notes;
  }
  return j;
}

EvalReport ReportFromJson(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.split_id = j.value("split", std::string());
    r.seed = j.value("seed", std::uint64_t{0});
    r.model_id = j.value("model", std::string());
    for (const auto& [name, b] : j.at("dimensions").items()) {
      DimensionScores s;
      s.srcc = b.at("srcc").get<double>();
      s.krcc = b.at("krcc").get<double>();
      s.plcc = b.at("plcc").get<double>();
      s.plcc_fallback = b.value("plcc_fallback", false);
      s.n = b.value("n", std::size_t{0});
      r.dimensions[Index(DimensionFromString(name))] = s;
    }
    if (j.contains("accuracy")) {
      for (const auto& [k, v] : j["accuracy"].items()) r.accuracy[k] = v.get<double>();
    }
    if (j.contains("notes")) {
      for (const auto& [k, v] : j["notes"].items()) r.notes[k] = v.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

void WriteReport(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << ReportToJson(r).dump(2) << '\n';
}

}  // namespace finevq::metrics
