#include "finevq/service/study.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "finevq/corpus/manifest.hpp"

namespace finevq::service {

namespace {

using nlohmann::json;

std::string JoinFields(const std::vector<std::string>& fields) {
  std::string s;
  for (const auto& f : fields) {
    if (!s.empty()) s += "; ";
    s += f;
  }
  return s;
}

std::uint64_t Fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t SplitMix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::filesystem::path Resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

InvalidSubmission::InvalidSubmission(std::vector<std::string> fields)
    : Error(ErrorKind::kValidation, "invalid rating: " + JoinFields(fields)),
      fields_(std::move(fields)) {}

StudyConfig LoadStudyConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open study config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("study config '" + path.string() + "': " + e.what());
  }
  const auto base = path.parent_path();
  StudyConfig cfg;
  try {
    cfg.study_id = j.value("study_id", std::string("study"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.subjects = j.at("subjects").get<std::vector<std::string>>();
    if (j.contains("media_root")) {
      cfg.media_root = Resolve(base, j.at("media_root").get<std::string>());
    }
    if (j.contains("manifest")) {
      for (const auto& e :
           corpus::LoadManifest(Resolve(base, j.at("manifest").get<std::string>()))) {
        cfg.videos.push_back(e.video_id);
        auto rel = e.frames_path;
        if (!cfg.media_root.empty()) {
          rel = std::filesystem::proximate(e.frames_path, cfg.media_root);
        }
        cfg.media[e.video_id] = rel.generic_string();
      }
    } else {
      cfg.videos = j.at("videos").get<std::vector<std::string>>();
    }
    cfg.store = Resolve(base, j.value("store", cfg.study_id + "_ratings.jsonl"));
  } catch (const json::exception& e) {
    throw ValidationError("study config '" + path.string() + "': " + e.what());
  }
  if (cfg.subjects.empty()) throw ValidationError("study config lists no subjects");
  if (cfg.videos.empty()) throw ValidationError("study config lists no videos");
  std::set<std::string> seen;
  for (const auto& v : cfg.videos) {
    if (!seen.insert(v).second) throw ValidationError("duplicate video '" + v + "'");
  }
  seen.clear();
  for (const auto& s : cfg.subjects) {
    if (!seen.insert(s).second) throw ValidationError("duplicate subject '" + s + "'");
  }
  return cfg;
}

SubmittedRating ParseSubmission(const json& body) {
  std::vector<std::string> errors;
  SubmittedRating r;
  if (!body.is_object()) throw InvalidSubmission({"body: expected an object"});

  auto text_field = [&](const char* key, std::string& out) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
      errors.push_back(std::string(key) + ": required non-empty string");
    } else {
      out = it->get<std::string>();
    }
  };
  text_field("subject_id", r.subject_id);
  text_field("video_id", r.video_id);

  auto scores = body.find("scores");
  if (scores == body.end() || !scores->is_object()) {
    errors.push_back("scores: required object with all six dimensions");
  } else {
    for (const auto& [key, _] : scores->items()) {
      if (!ParseDimension(key)) errors.push_back("scores." + key + ": unknown dimension");
    }
    for (Dimension d : kAllDimensions) {
      const std::string name(ToString(d));
      auto it = scores->find(name);
      if (it == scores->end()) {
        errors.push_back("scores." + name + ": missing");
      } else if (!it->is_number_integer()) {
        errors.push_back("scores." + name + ": must be an integer in 1..5");
      } else {
        const auto v = it->get<std::int64_t>();
        if (v < 1 || v > 5) {
          errors.push_back("scores." + name + ": " + std::to_string(v) +
                           " outside 1..5");
        } else {
          r.scores[Index(d)] = static_cast<int>(v);
        }
      }
    }
  }

  auto attrs = body.find("attributes");
  if (attrs != body.end() && !attrs->is_null()) {
    if (!attrs->is_object()) {
      errors.push_back("attributes: expected an object keyed by dimension");
    } else {
      for (const auto& [key, value] : attrs->items()) {
        auto d = ParseDimension(key);
        const std::string field = "attributes." + key;
        if (!d) {
          errors.push_back(field + ": unknown dimension");
          continue;
        }
        DimensionAttributes a;
        bool ok = value.is_object();
        if (ok && value.contains("options")) {
          ok = value["options"].is_array();
          if (ok) {
            for (const auto& o : value["options"]) {
              if (!o.is_string()) {
                ok = false;
                break;
              }
              a.options.push_back(o.get<std::string>());
            }
          }
        }
        if (ok && value.contains("other_text")) {
          ok = value["other_text"].is_string();
          if (ok) a.other_text = value["other_text"].get<std::string>();
        }
        if (!ok) {
          errors.push_back(field +
                           ": expected {\"options\": [strings], \"other_text\": string}");
          continue;
        }
        if (*d == Dimension::kOverall) {
          if (!a.options.empty() || !a.other_text.empty()) {
            errors.push_back(field + ": overall carries no attribute options");
          }
          continue;
        }
        auto problems = subjective::ValidateSelection(*d, a.options, a.other_text);
        for (auto& p : problems) errors.push_back("attributes." + p);
        if (problems.empty() && !a.options.empty()) r.attributes[*d] = std::move(a);
      }
    }
  }

  auto ts = body.find("client_ts");
  if (ts != body.end() && !ts->is_null()) {
    if (!ts->is_number_integer()) {
      errors.push_back("client_ts: must be an integer");
    } else {
      r.client_ts = ts->get<std::int64_t>();
    }
  }
  if (!errors.empty()) throw InvalidSubmission(std::move(errors));
  return r;
}

json SubmissionToJson(const SubmittedRating& r) {
  json scores = json::object();
  for (Dimension d : kAllDimensions) scores[std::string(ToString(d))] = r.scores[Index(d)];
  json attrs = json::object();
  for (const auto& [d, a] : r.attributes) {
    attrs[std::string(ToString(d))] = {{"options", a.options}, {"other_text", a.other_text}};
  }
  return {{"subject_id", r.subject_id},
          {"video_id", r.video_id},
          {"scores", scores},
          {"attributes", attrs},
          {"client_ts", r.client_ts}};
}

std::vector<std::string> AssignmentOrder(std::span<const std::string> videos,
                                         std::uint64_t seed,
                                         const std::string& subject_id) {
  std::vector<std::string> order(videos.begin(), videos.end());
  std::sort(order.begin(), order.end());
  std::uint64_t state = seed ^ Fnv1a(subject_id);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = SplitMix(state) % i;
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::map<std::pair<std::string, std::string>, SubmittedRating> LatestRatings(
    std::span<const corpus::Record> records, std::vector<std::string>* skipped) {
  std::map<std::pair<std::string, std::string>, SubmittedRating> latest;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.type != "rating") continue;
    SubmittedRating r;
    try {
      r = ParseSubmission(rec.payload);
    } catch (const InvalidSubmission& e) {
      if (skipped) skipped->push_back("record " + std::to_string(i) + ": " + e.what());
      continue;
    }
    auto key = std::make_pair(r.subject_id, r.video_id);
    latest.insert_or_assign(std::move(key), std::move(r));
  }
  return latest;
}

std::vector<subjective::RatingRecord> ExportRatings(
    std::span<const corpus::Record> records) {
  std::vector<subjective::RatingRecord> rows;
  for (const auto& [key, r] : LatestRatings(records)) {
    for (Dimension d : kAllDimensions) {
      rows.push_back({r.subject_id, r.video_id, d, r.scores[Index(d)], false});
    }
  }
  return rows;
}

void WriteExportedRatings(std::span<const corpus::Record> records, std::ostream& out) {
  const auto rows = ExportRatings(records);
  subjective::WriteRatings(rows, out, false);
}

std::vector<subjective::AttributeSelection> ExportSelections(
    std::span<const corpus::Record> records) {
  std::vector<subjective::AttributeSelection> out;
  for (const auto& [key, r] : LatestRatings(records)) {
    for (Dimension d : kDistortionDimensions) {
      auto it = r.attributes.find(d);
      if (it == r.attributes.end()) continue;
      out.push_back({r.subject_id, r.video_id, d, it->second.options,
                     it->second.other_text});
    }
  }
  return out;
}

json DimensionSchema(Dimension d) {
  json levels = json::array();
  for (auto w : LevelWords(d)) levels.push_back(std::string(w));
  json options = json::array();
  const auto named = AttributeOptions(d);
  for (auto o : named) options.push_back(std::string(o));
  if (!named.empty()) {
    options.push_back(std::string(kOptionOther));
    options.push_back(std::string(kOptionNone));
  }
  return {{"dimension", std::string(ToString(d))},
          {"levels", levels},
          {"attribute_options", options}};
}

StudyService::StudyService(StudyConfig cfg, corpus::RecordStore store)
    : cfg_(std::move(cfg)), store_(std::move(store)) {
  for (const auto& s : cfg_.subjects) {
    assignments_[s] = AssignmentOrder(cfg_.videos, cfg_.seed, s);
  }
}

const std::vector<std::string>& StudyService::Assignment(
    const std::string& subject_id) const {
  auto it = assignments_.find(subject_id);
  if (it == assignments_.end()) throw NotFound("unknown subject '" + subject_id + "'");
  return it->second;
}

std::vector<std::string> StudyService::CompletedBy(
    const std::string& subject_id, std::span<const corpus::Record> records) const {
  std::set<std::string> done;
  for (const auto& [key, r] : LatestRatings(records)) {
    if (key.first == subject_id) done.insert(key.second);
  }
  std::vector<std::string> ordered;
  for (const auto& v : Assignment(subject_id)) {
    if (done.count(v)) ordered.push_back(v);
  }
  return ordered;
}

json StudyService::Session(const std::string& subject_id) const {
  const auto& order = Assignment(subject_id);
  const auto records = store_.Snapshot();
  const auto done = CompletedBy(subject_id, records);
  return {{"study_id", cfg_.study_id},
          {"subject_id", subject_id},
          {"assignment", order},
          {"cursor", done.size()},
          {"total", order.size()},
          {"completed", done}};
}

json StudyService::NextTask(const std::string& subject_id) const {
  const auto& order = Assignment(subject_id);
  const auto records = store_.Snapshot();
  const auto done_list = CompletedBy(subject_id, records);
  const std::set<std::string> done(done_list.begin(), done_list.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& v = order[i];
    if (done.count(v)) continue;
    json dims = json::array();
    for (Dimension d : kAllDimensions) dims.push_back(DimensionSchema(d));
    auto media = cfg_.media.find(v);
    std::string url = "/media/" + (media != cfg_.media.end() ? media->second : v);
    return {{"done", false},
            {"subject_id", subject_id},
            {"video_id", v},
            {"position", i},
            {"media_url", url},
            {"dimensions", dims}};
  }
  return {{"done", true}, {"subject_id", subject_id}};
}

json StudyService::Submit(const json& body) {
  SubmittedRating r = ParseSubmission(body);
  const auto& order = Assignment(r.subject_id);
  if (std::find(order.begin(), order.end(), r.video_id) == order.end()) {
    throw InvalidSubmission({"video_id: '" + r.video_id +
                             "' is not assigned to subject '" + r.subject_id + "'"});
  }
  const auto receipt = store_.Append("rating", SubmissionToJson(r));
  return {{"index", receipt.index}, {"ts", receipt.ts}};
}

json StudyService::Progress() const {
  const auto records = store_.Snapshot();
  std::map<std::string, std::size_t> per_subject, per_video;
  for (const auto& s : cfg_.subjects) per_subject[s] = 0;
  for (const auto& v : cfg_.videos) per_video[v] = 0;
  std::size_t total = 0;
  for (const auto& [key, r] : LatestRatings(records)) {
    ++per_subject[key.first];
    ++per_video[key.second];
    ++total;
  }
  return {{"subjects", per_subject}, {"videos", per_video}, {"ratings", total}};
}

}  // namespace finevq::service
