#include "finevq/model/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "finevq/error.hpp"
#include "finevq/tsv.hpp"

namespace finevq::model {

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("model config: " + what);
}

struct Field {
  std::function<void(ModelConfig&, const std::string&)> set;
  std::function<std::string(const ModelConfig&)> get;
};

template <typename T>
Field IntField(T ModelConfig::*m) {
  return {[m](ModelConfig& c, const std::string& v) { c.*m = static_cast<T>(ParseInt(v, "model config")); },
          [m](const ModelConfig& c) { return std::to_string(c.*m); }};
}

Field BoolField(bool ModelConfig::*m) {
  return {[m](ModelConfig& c, const std::string& v) {
            const std::string s = ToLower(Trim(v));
            if (s == "1" || s == "true" || s == "on") {
              c.*m = true;
            } else if (s == "0" || s == "false" || s == "off") {
              c.*m = false;
            } else {
              throw ValidationError("model config: bad boolean '" + v + "'");
            }
          },
          [m](const ModelConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field RealField(double ModelConfig::*m) {
  return {[m](ModelConfig& c, const std::string& v) { c.*m = ParseDouble(v, "model config"); },
          [m](const ModelConfig& c) { return FormatDouble(c.*m); }};
}

const std::map<std::string, Field>& Fields() {
  static const std::map<std::string, Field> f = {
      {"d_model", IntField(&ModelConfig::d_model)},
      {"d_img", IntField(&ModelConfig::d_img)},
      {"d_mot", IntField(&ModelConfig::d_mot)},
      {"frame_size", IntField(&ModelConfig::frame_size)},
      {"patch", IntField(&ModelConfig::patch)},
      {"n_frames", IntField(&ModelConfig::n_frames)},
      {"tokens_per_frame", IntField(&ModelConfig::tokens_per_frame)},
      {"enc_heads", IntField(&ModelConfig::enc_heads)},
      {"dec_heads", IntField(&ModelConfig::dec_heads)},
      {"dec_layers", IntField(&ModelConfig::dec_layers)},
      {"ffn_mult", IntField(&ModelConfig::ffn_mult)},
      {"rank", IntField(&ModelConfig::rank)},
      {"s_slow", IntField(&ModelConfig::s_slow)},
      {"s_fast", IntField(&ModelConfig::s_fast)},
      {"motion_grid", IntField(&ModelConfig::motion_grid)},
      {"motion_coverage", IntField(&ModelConfig::motion_coverage)},
      {"max_context", IntField(&ModelConfig::max_context)},
      {"use_motion", BoolField(&ModelConfig::use_motion)},
      {"lora_vision", BoolField(&ModelConfig::lora_vision)},
      {"lora_llm", BoolField(&ModelConfig::lora_llm)},
      {"lm_head_std", RealField(&ModelConfig::lm_head_std)},
      {"score_offset", RealField(&ModelConfig::score_offset)},
      {"score_scale", RealField(&ModelConfig::score_scale)},
      {"score_unit", RealField(&ModelConfig::score_unit)},
      {"seed", IntField(&ModelConfig::seed)},
  };
  return f;
}

}  // namespace

void ModelConfig::Validate() const {
  Require(d_model > 0 && d_img > 0 && d_mot > 0, "dimensions must be positive");
  Require(patch > 0 && frame_size % patch == 0, "frame_size must be a multiple of patch");
  Require(d_img > 3 && d_img <= 3 + patch * patch - 1,
          "d_img must lie in [4, patch^2 + 2] (colour means plus DCT magnitudes)");
  Require(n_frames > 0, "n_frames must be positive");
  Require(tokens_per_frame > 0 && patches_per_frame() % tokens_per_frame == 0,
          "tokens_per_frame must divide the patch count");
  Require(enc_heads > 0 && d_img % enc_heads == 0, "enc_heads must divide d_img");
  Require(dec_heads > 0 && d_model % dec_heads == 0, "dec_heads must divide d_model");
  Require(dec_layers > 0 && ffn_mult > 0, "dec_layers and ffn_mult must be positive");
  Require(rank > 0, "rank must be positive");
  Require(rank <= d_model && rank <= d_img, "rank must not exceed the adapted layer sizes");
  Require(s_fast > 0 && s_fast < s_slow, "need 0 < s_fast < s_slow");
  Require(motion_grid > 0 && frame_size % motion_grid == 0,
          "motion_grid must divide frame_size");
  Require(d_mot == 3 * motion_grid * motion_grid, "d_mot must equal 3 * motion_grid^2");
  Require(motion_coverage > 0, "motion_coverage must be positive");
  Require(max_context > visual_tokens(), "max_context must exceed the visual prefix");
  Require(score_scale > 0, "score_scale must be positive");
  Require(score_unit > 0, "score_unit must be positive");
}

ModelConfig GradCheckConfig() {
  ModelConfig c;
  c.d_model = 8;
  c.d_img = 8;
  c.d_mot = 12;
  c.motion_grid = 2;
  c.frame_size = 16;
  c.patch = 8;
  c.n_frames = 2;
  c.tokens_per_frame = 2;
  c.enc_heads = 2;
  c.dec_heads = 2;
  c.dec_layers = 2;
  c.rank = 4;
  c.max_context = 48;
  return c;
}

ModelConfig ParseConfigText(const std::string& text) {
  ModelConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("model config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = Trim(t.substr(0, eq));
    const auto it = Fields().find(key);
    if (it == Fields().end()) {
      throw ValidationError("model config line " + std::to_string(lineno) +
                            ": unknown key '" + key + "'");
    }
    it->second.set(cfg, Trim(t.substr(eq + 1)));
  }
  cfg.Validate();
  return cfg;
}

ModelConfig ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open model config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str());
}

std::string ConfigToText(const ModelConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : Fields()) out += k + "=" + f.get(cfg) + "\n";
  return out;
}

}  // namespace finevq::model
