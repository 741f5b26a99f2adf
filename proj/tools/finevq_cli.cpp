// finevq: one subcommand per pipeline stage.
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "finevq/corpus/manifest.hpp"
#include "finevq/error.hpp"
#include "finevq/features/features.hpp"
#include "finevq/harness/protocol.hpp"
#include "finevq/model/checkpoint.hpp"
#include "finevq/service/server.hpp"
#include "finevq/subjective/attributes.hpp"
#include "finevq/subjective/qa.hpp"
#include "finevq/subjective/screening.hpp"

namespace fs = std::filesystem;
using namespace finevq;

namespace {

// Relative paths are taken under FINEVQ_DATA_ROOT when it is set.
fs::path DataPath(const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  const char* root = std::getenv("FINEVQ_DATA_ROOT");
  if (path.is_absolute() || root == nullptr || *root == '\0') return path;
  return fs::path(root) / path;
}

fs::path RequireFile(const std::string& p, const std::string& what) {
  fs::path path = DataPath(p);
  if (!fs::exists(path)) throw MissingInput(what + " '" + path.string() + "' not found");
  return path;
}

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  return out;
}

void WriteText(const fs::path& path, const std::string& text) {
  auto out = OpenOut(path);
  out << text;
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

std::map<std::string, subjective::SubjectRejection> RejectionsFromFlags(
    const std::string& flags) {
  if (flags.empty()) return {};
  return subjective::RejectSubjects(
      subjective::ReadRatings(RequireFile(flags, "flagged ratings")));
}

subjective::AttributeLabelSet MaybeLabels(const std::string& path) {
  if (path.empty()) return {};
  return subjective::ReadLabels(RequireFile(path, "labels"));
}

model::ModelConfig LoadConfig(const std::string& path) {
  if (path.empty()) return model::ModelConfig{};
  auto cfg = model::ReadConfigFile(RequireFile(path, "model config"));
  cfg.Validate();
  return cfg;
}

std::vector<std::string> ReadIds(const std::string& split, const std::string& part) {
  const auto t = TsvTable::Read(RequireFile(split, "split"));
  const auto vc = t.Column("video_id"), pc = t.Column("part");
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.row(i)[pc] == part) ids.push_back(t.row(i)[vc]);
  }
  if (ids.empty()) throw ValidationError("split has no '" + part + "' rows");
  return ids;
}

void AddTrainFlags(CLI::App* cmd, harness::TrainOptions& opt) {
  cmd->add_option("--steps", opt.steps, "Optimizer steps")->capture_default_str();
  cmd->add_option("--lr", opt.lr, "Initial learning rate (cosine decay)")
      ->capture_default_str();
  cmd->add_option("--train-seed", opt.seed, "Seed for batch sampling")
      ->capture_default_str();
  cmd->add_option("--clips-per-step", opt.clips_per_step, "Clips per optimizer step")
      ->capture_default_str();
  cmd->add_option("--items-per-clip", opt.items_per_clip, "Prompt items per clip")
      ->capture_default_str();
}

void LogProgress(harness::TrainOptions& opt, bool quiet) {
  if (quiet) return;
  opt.log_every = std::max(1, opt.steps / 10);
  opt.on_log = [](int step, const model::LossReport& r) {
    std::cerr << "step " << step << " language " << r.l_language << " l1 " << r.l1 << "\n";
  };
}

std::string ReportText(const metrics::EvalReport& r) {
  return metrics::ReportToJson(r).dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FineVQ toolkit: subjective study processing and a desk-scale quality model"};
  app.require_subcommand(1);
  app.allow_extras(false);

  // ingest
  std::string manifest, out;
  auto* ingest = app.add_subcommand(
      "ingest", "Validate a manifest, open every clip, write the normalized manifest");
  ingest->add_option("--manifest", manifest, "Video manifest (JSON lines)")->required();
  ingest->add_option("--out", out, "Normalized manifest output")->required();

  // screen
  std::string ratings;
  auto* screen = app.add_subcommand(
      "screen", "Flag outlier ratings and report rejected subjects");
  screen->add_option("--ratings", ratings, "Raw ratings TSV")->required();
  auto* screen_out =
      screen->add_option("--out", out, "Flagged ratings TSV (adds an outlier column)");
  screen_out->required();
  std::string subjects_out;
  screen->add_option("--subjects", subjects_out, "Optional per-subject rejection TSV");

  // mos
  std::string flags;
  auto* mos = app.add_subcommand("mos", "Compute MOS from flagged ratings");
  mos->add_option("--flags", flags, "Flagged ratings TSV written by screen")->required();
  mos->add_option("--out", out, "MOS table TSV")->required();

  // attributes
  std::string selections;
  auto* attrs = app.add_subcommand("attributes", "Aggregate attribute selections");
  attrs->add_option("--selections", selections, "Attribute selections TSV")->required();
  attrs->add_option("--flags", flags, "Flagged ratings; rejected subjects are excluded");
  attrs->add_option("--out", out, "Aggregated labels TSV")->required();

  // qa-gen
  std::string mos_path, labels_path;
  auto* qa = app.add_subcommand("qa-gen", "Synthesize eight QA pairs per video");
  qa->add_option("--mos", mos_path, "MOS table TSV")->required();
  qa->add_option("--labels", labels_path, "Aggregated labels TSV (absent: no distortion)");
  qa->add_option("--out", out, "QA pairs (JSON lines)")->required();

  // features
  std::size_t resize = 0;
  std::string normalized_out;
  auto* feats = app.add_subcommand("features", "Colourfulness, luma, SI and TI per video");
  feats->add_option("--manifest", manifest, "Video manifest")->required();
  feats->add_option("--out", out, "Raw feature TSV")->required();
  feats->add_option("--normalized", normalized_out, "Min-max normalized feature TSV");
  feats->add_option("--resize", resize, "Resize frames to N x N first (0 keeps size)");

  // train-toy
  std::string config_path, checkpoint, report_path;
  std::uint64_t corpus_seed = 1;
  bool quiet = false;
  harness::TrainOptions train_opt;
  auto* train = app.add_subcommand(
      "train-toy", "Train on the procedural toy corpus and report train/held-out scores");
  train->add_option("--config", config_path, "Model config (key=value)");
  train->add_option("--corpus-seed", corpus_seed, "Toy corpus seed")->capture_default_str();
  train->add_option("--checkpoint", checkpoint, "Checkpoint output")->required();
  train->add_option("--report", report_path, "Held-out report (JSON)");
  train->add_flag("--quiet", quiet, "No progress lines");
  AddTrainFlags(train, train_opt);

  // eval
  std::string predictions, split, part = "test", qa_path, pred_out;
  auto* eval = app.add_subcommand(
      "eval", "Score predictions (or a checkpoint on a manifest) against MOS");
  eval->add_option("--predictions", predictions, "Predictions TSV: video_id, dimension, score");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint to run instead of --predictions");
  eval->add_option("--manifest", manifest, "Manifest for --checkpoint");
  eval->add_option("--mos", mos_path, "MOS table TSV")->required();
  eval->add_option("--labels", labels_path, "Labels TSV (gold QA for --checkpoint)");
  eval->add_option("--qa", qa_path, "Gold QA (JSON lines) for answer accuracy");
  eval->add_option("--split", split, "Split TSV (video_id, part); default: all MOS videos");
  eval->add_option("--part", part, "Split part to score")->capture_default_str();
  eval->add_option("--predictions-out", pred_out, "Write model predictions here");
  eval->add_option("--out", out, "Report (JSON)")->required();

  // cross-eval
  std::string a_manifest, a_mos, a_labels, b_manifest, b_mos, b_labels;
  std::uint64_t split_seed = 0;
  harness::TrainOptions cross_opt;
  auto* cross = app.add_subcommand(
      "cross-eval", "Train on corpus A's train split, evaluate zero-shot on all of B");
  cross->add_option("--train-manifest", a_manifest, "Corpus A manifest")->required();
  cross->add_option("--train-mos", a_mos, "Corpus A MOS")->required();
  cross->add_option("--train-labels", a_labels, "Corpus A labels");
  cross->add_option("--test-manifest", b_manifest, "Corpus B manifest")->required();
  cross->add_option("--test-mos", b_mos, "Corpus B MOS")->required();
  cross->add_option("--test-labels", b_labels, "Corpus B labels");
  cross->add_option("--config", config_path, "Model config (key=value)");
  cross->add_option("--split-seed", split_seed, "Seed for A's split")->capture_default_str();
  cross->add_option("--out", out, "Report (JSON)")->required();
  cross->add_flag("--quiet", quiet, "No progress lines");
  AddTrainFlags(cross, cross_opt);

  // ablate
  harness::TrainOptions ablate_opt;
  bool parallel = false;
  std::vector<std::string> axes_sel;
  auto* ablate = app.add_subcommand(
      "ablate", "One-factor ablation rows on the toy corpus (held-out scores)");
  ablate->add_option("--config", config_path, "Base model config (key=value)");
  ablate->add_option("--corpus-seed", corpus_seed, "Toy corpus seed")->capture_default_str();
  ablate->add_option("--axes", axes_sel,
                     "Axes to vary: motion lora-vision lora-llm rank frames coverage")
      ->check(CLI::IsMember({"motion", "lora-vision", "lora-llm", "rank", "frames",
                             "coverage"}));
  ablate->add_flag("--parallel", parallel, "Train rows on parallel threads");
  ablate->add_option("--out", out, "Ablation table TSV")->required();
  AddTrainFlags(ablate, ablate_opt);

  // bench
  std::size_t bench_videos = 10, bench_frames = 240, bench_size = 64;
  auto* bench = app.add_subcommand(
      "bench", "Time end-to-end scoring; FPS = total frames / seconds");
  bench->add_option("--checkpoint", checkpoint, "Checkpoint (default: untrained model)");
  bench->add_option("--config", config_path, "Model config when no checkpoint is given");
  bench->add_option("--manifest", manifest, "Videos to time (default: synthetic clips)");
  bench->add_option("--videos", bench_videos, "Synthetic clip count")->capture_default_str();
  bench->add_option("--frames", bench_frames, "Frames per synthetic clip")
      ->capture_default_str();
  bench->add_option("--size", bench_size, "Synthetic frame size")->capture_default_str();
  bench->add_option("--out", out, "Result (JSON); stdout when absent");

  // serve
  int port = 8080;
  std::string study_config, media_root, host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  serve->add_option("--port", port, "Listen port")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--study-config", study_config, "Study config (JSON)")->required();
  serve->add_option("--media-root", media_root, "Directory served under /media");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ExitCode(ErrorKind::kValidation);
  }

  try {
    if (*ingest) {
      const auto path = RequireFile(manifest, "manifest");
      const auto entries = corpus::LoadManifest(path);
      std::string text;
      const auto out_path = DataPath(out);
      for (const auto& e : entries) {
        corpus::FrameReader reader(e.frames_path);
        if (reader.frame_count() == 0) {
          throw ValidationError("video '" + e.video_id + "' has no frames");
        }
        corpus::ValidateClip(corpus::SampleFrames(e, 1));
        text += corpus::SerializeManifestEntry(e, out_path.parent_path()) + "\n";
      }
      WriteText(out_path, text);
      std::cout << "ingested " << entries.size() << " videos\n";
    } else if (*screen) {
      auto table = subjective::ReadRatings(RequireFile(ratings, "ratings"));
      subjective::FlagOutliers(table);
      subjective::WriteRatings(table, DataPath(out), true);
      const auto rej = subjective::RejectSubjects(table);
      std::size_t flagged = 0, rejected = 0;
      for (const auto& r : table) flagged += r.outlier;
      TsvTable t({"subject_id", "total", "flagged", "outlier_fraction", "rejected"});
      for (const auto& [s, r] : rej) {
        rejected += r.rejected;
        t.AddRow({s, std::to_string(r.total), std::to_string(r.flagged),
                  FormatDouble(r.outlier_fraction), r.rejected ? "1" : "0"});
      }
      if (!subjects_out.empty()) t.Write(DataPath(subjects_out));
      std::cout << "flagged " << flagged << " of " << table.size() << " ratings; rejected "
                << rejected << " of " << rej.size() << " subjects\n";
    } else if (*mos) {
      auto table = subjective::ReadRatings(RequireFile(flags, "flagged ratings"));
      const auto r = subjective::RunMosFromFlags(std::move(table));
      subjective::WriteMos(r.mos, DataPath(out));
      std::cout << "wrote " << r.mos.cell_count() << " MOS cells for " << r.mos.videos().size()
                << " videos; removed " << r.removed_ratings << " ratings\n";
    } else if (*attrs) {
      const auto sel = subjective::ReadSelections(RequireFile(selections, "selections"));
      const auto labels = subjective::AggregateAttributes(sel, RejectionsFromFlags(flags));
      auto o = OpenOut(DataPath(out));
      subjective::WriteLabels(labels, o);
      std::cout << "aggregated labels for " << labels.videos().size() << " videos\n";
    } else if (*qa) {
      const auto table = subjective::ReadMos(RequireFile(mos_path, "MOS table"));
      const auto pairs = subjective::GenerateQa(table, MaybeLabels(labels_path));
      subjective::WriteQa(pairs, DataPath(out));
      std::cout << "wrote " << pairs.size() << " QA pairs\n";
    } else if (*feats) {
      const auto entries = corpus::LoadManifest(RequireFile(manifest, "manifest"));
      std::optional<std::size_t> rs;
      if (resize > 0) rs = resize;
      const auto table = features::BuildFeatureTable(entries, rs);
      features::FeaturesToTsv(table.raw).Write(DataPath(out));
      if (!normalized_out.empty()) {
        features::FeaturesToTsv(table.normalized).Write(DataPath(normalized_out));
      }
      for (const auto& f : table.failures) {
        std::cerr << "feature extraction failed for " << f.video_id << ": " << f.message
                  << "\n";
      }
      std::cout << "features for " << table.raw.size() << " videos, " << table.failures.size()
                << " failures\n";
      if (!table.failures.empty() && table.raw.empty()) {
        throw RuntimeError("no video could be processed");
      }
    } else if (*train) {
      const auto cfg = LoadConfig(config_path);
      const auto toy = harness::FromToy(
          harness::MakeToyCorpus(harness::AcceptanceTrainSpec(corpus_seed)));
      const auto held = harness::FromToy(
          harness::MakeToyCorpus(harness::AcceptanceHeldOutSpec(corpus_seed)));
      LogProgress(train_opt, quiet);
      const auto ids = toy.ids();
      auto trained = harness::TrainOn(cfg, toy, ids, train_opt);
      model::SaveCheckpoint(*trained.model, DataPath(checkpoint));
      harness::EvalOptions eo;
      eo.seed = corpus_seed;
      eo.model_id = "finevq-toy";
      eo.split_id = "train";
      const auto rt = harness::EvaluateOn(*trained.model, toy, ids, eo);
      eo.split_id = "held-out";
      const auto rh = harness::EvaluateOn(*trained.model, held, held.ids(), eo);
      if (!report_path.empty()) WriteText(DataPath(report_path), ReportText(rh));
      const auto& ov = Index(Dimension::kOverall);
      std::cout << "trained " << train_opt.steps << " steps in " << trained.log.seconds
                << " s; overall SRCC train " << rt.dimensions[ov]->srcc << " held-out "
                << rh.dimensions[ov]->srcc << "; train yes/no accuracy "
                << rt.accuracy.at("yesno") << "\n";
    } else if (*eval) {
      const auto table = subjective::ReadMos(RequireFile(mos_path, "MOS table"));
      std::vector<std::string> ids =
          split.empty() ? table.videos() : ReadIds(split, part);
      harness::EvalOptions eo;
      eo.split_id = split.empty() ? "all" : part;
      metrics::EvalReport report;
      if (!checkpoint.empty()) {
        if (manifest.empty()) throw ValidationError("--checkpoint needs --manifest");
        const auto m = model::LoadCheckpoint(RequireFile(checkpoint, "checkpoint"));
        const auto entries = corpus::LoadManifest(RequireFile(manifest, "manifest"));
        const auto corpus = harness::LoadLabelledCorpus(
            entries, table, MaybeLabels(labels_path), m.config().frame_size);
        eo.model_id = checkpoint;
        const auto clips = harness::PrepareClips(m, corpus, ids);
        const auto gold = subjective::GenerateQa(harness::RestrictMos(table, ids),
                                                 harness::RestrictLabels(corpus.labels, ids));
        const auto pred = harness::Predict(m, clips, ids, gold);
        if (!pred_out.empty()) {
          auto o = OpenOut(DataPath(pred_out));
          harness::WritePredictions(pred, o);
        }
        report = harness::RunEval(pred, ids, table, gold, eo);
      } else {
        if (predictions.empty()) throw ValidationError("give --predictions or --checkpoint");
        const auto pred = harness::ReadPredictions(RequireFile(predictions, "predictions"));
        std::vector<subjective::QaPair> gold;
        if (!qa_path.empty()) gold = subjective::ReadQa(RequireFile(qa_path, "QA file"));
        eo.model_id = predictions;
        report = harness::RunEval(pred, ids, table, gold, eo);
      }
      WriteText(DataPath(out), ReportText(report));
      std::cout << "evaluated " << ids.size() << " videos\n";
    } else if (*cross) {
      const auto cfg = LoadConfig(config_path);
      auto load = [&](const std::string& man, const std::string& m, const std::string& l) {
        const auto entries = corpus::LoadManifest(RequireFile(man, "manifest"));
        return harness::LoadLabelledCorpus(entries,
                                           subjective::ReadMos(RequireFile(m, "MOS table")),
                                           MaybeLabels(l), cfg.frame_size);
      };
      const auto a = load(a_manifest, a_mos, a_labels);
      const auto b = load(b_manifest, b_mos, b_labels);
      LogProgress(cross_opt, quiet);
      const auto r = harness::CrossDataset(cfg, a, b, cross_opt, split_seed);
      WriteText(DataPath(out), ReportText(r.report));
      std::cout << "cross-dataset over " << r.shared.size() << " shared dimensions\n";
    } else if (*ablate) {
      const auto cfg = LoadConfig(config_path);
      const auto toy = harness::FromToy(
          harness::MakeToyCorpus(harness::AcceptanceTrainSpec(corpus_seed)));
      const auto held = harness::FromToy(
          harness::MakeToyCorpus(harness::AcceptanceHeldOutSpec(corpus_seed)));
      harness::AblationAxes axes;
      if (!axes_sel.empty()) {
        const std::set<std::string> on(axes_sel.begin(), axes_sel.end());
        if (!on.count("motion")) axes.motion.clear();
        if (!on.count("lora-vision")) axes.lora_vision.clear();
        if (!on.count("lora-llm")) axes.lora_llm.clear();
        if (!on.count("rank")) axes.rank.clear();
        if (!on.count("frames")) axes.frames.clear();
        if (!on.count("coverage")) axes.coverage.clear();
      }
      const auto rows = harness::AblationSweep(cfg, axes, toy, toy.ids(), held, held.ids(),
                                               ablate_opt, parallel);
      const auto table = harness::AblationTable(rows);
      WriteText(DataPath(out), table);
      std::cout << table;
    } else if (*bench) {
      std::unique_ptr<model::FineVqModel> m;
      if (!checkpoint.empty()) {
        m = std::make_unique<model::FineVqModel>(
            model::LoadCheckpoint(RequireFile(checkpoint, "checkpoint")));
      } else {
        m = std::make_unique<model::FineVqModel>(LoadConfig(config_path));
      }
      std::vector<std::vector<corpus::Frame>> videos;
      if (!manifest.empty()) {
        for (const auto& e : corpus::LoadManifest(RequireFile(manifest, "manifest"))) {
          videos.push_back(corpus::LoadAllFrames(e).frames);
        }
      } else {
        for (std::size_t v = 0; v < bench_videos; ++v) {
          videos.push_back(harness::MakeToyClip("bench" + std::to_string(v),
                                                harness::ToyFamily::kNoise, 2.0, bench_frames,
                                                bench_size, 100 + v)
                               .frames);
        }
      }
      const auto r = harness::BenchRuntime(*m, videos);
      nlohmann::ordered_json j;
      j["videos"] = videos.size();
      j["frames"] = r.frames;
      j["seconds"] = r.seconds;
      j["fps"] = r.fps;
      j["environment"] = r.note;
      if (out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        WriteText(DataPath(out), j.dump(2) + "\n");
      }
    } else if (*serve) {
      auto cfg = service::LoadStudyConfig(RequireFile(study_config, "study config"));
      if (!media_root.empty()) cfg.media_root = DataPath(media_root);
      auto store = corpus::RecordStore::Open(cfg.store);
      for (const auto& c : store.corrupt()) {
        std::cerr << "skipped corrupt record at line " << c.line << " (byte " << c.offset
                  << "): " << c.message << "\n";
      }
      service::StudyService svc(cfg, std::move(store));
      service::StudyServer server(svc);
      std::cout << "serving study '" << cfg.study_id << "' on " << host << ":" << port
                << std::endl;
      if (!server.Listen(host, port)) throw RuntimeError("cannot listen on port " +
                                                         std::to_string(port));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode(ErrorKind::kRuntime);
  }
  return 0;
}
