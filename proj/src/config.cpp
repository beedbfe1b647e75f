#include "causalign/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "causalign/error.hpp"

namespace causalign {

namespace {

using nlohmann::json;

class Reader {
 public:
  std::vector<std::string> errors;

  // Reports keys of `obj` not listed in `allowed`; returns false if obj is not an object.
  bool object(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      errors.push_back(path + ": expected an object");
      return false;
    }
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
      if (!names.count(key)) errors.push_back(path + "." + key + ": unknown key");
    return true;
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      errors.push_back(path + "." + key + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  void integer(const json& obj, const std::string& path, const char* key, int& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(path + "." + key + ": expected an integer");
      return;
    }
    out = v.get<int>();
  }

  void seed(const json& obj, const std::string& path, const char* key, std::uint64_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      errors.push_back(path + "." + key + ": expected a non-negative integer");
      return;
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) {
      errors.push_back(path + "." + key + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      errors.push_back(path + "." + key + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  template <typename T>
  void list(const json& obj, const std::string& path, const char* key, std::vector<T>& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_array()) {
      errors.push_back(path + "." + key + ": expected an array");
      return;
    }
    out.clear();
    for (const auto& item : v) {
      if constexpr (std::is_same_v<T, double>) {
        if (!item.is_number()) {
          errors.push_back(path + "." + key + ": expected numbers");
          return;
        }
      } else {
        if (!item.is_number_unsigned() && !(item.is_number_integer() && item.get<long long>() >= 0)) {
          errors.push_back(path + "." + key + ": expected non-negative integers");
          return;
        }
      }
      out.push_back(item.get<T>());
    }
  }

  void style(const json& obj, const std::string& path, StyleParams& s) {
    if (!object(obj, path, {"brightness_bias", "haze", "noise", "tint_strength", "texture_amplitude", "palette_shift"}))
      return;
    number(obj, path, "brightness_bias", s.brightness_bias);
    number(obj, path, "haze", s.haze);
    number(obj, path, "noise", s.noise);
    number(obj, path, "tint_strength", s.tint_strength);
    number(obj, path, "texture_amplitude", s.texture_amplitude);
    integer(obj, path, "palette_shift", s.palette_shift);
  }
};

json style_json(const StyleParams& s) {
  return {{"brightness_bias", s.brightness_bias}, {"haze", s.haze},
          {"noise", s.noise},                     {"tint_strength", s.tint_strength},
          {"texture_amplitude", s.texture_amplitude}, {"palette_shift", s.palette_shift}};
}

void check_style(std::vector<std::string>& errors, const StyleParams& s, const std::string& path) {
  try {
    s.validate(path);
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }
}

}  // namespace

std::filesystem::path PathsConfig::manifest_path() const {
  return manifest.empty() ? std::filesystem::path(data_dir) / "manifest.tsv" : std::filesystem::path(manifest);
}

EncoderArch arch_for(const RunConfig& config) {
  EncoderArch arch = config.model;
  arch.height = config.data.image_size;
  arch.width = config.data.image_size;
  arch.channels = 3;
  return arch;
}

void apply_run_seed(RunConfig& config, std::uint64_t seed) {
  config.data.seed = derive_seed(seed, 1);
  config.train.seed = derive_seed(seed, 2);
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  check(data.num_classes >= 1, "data.num_classes must be positive");
  check(data.clips_per_class >= 1, "data.clips_per_class must be positive");
  check(data.frames_per_clip >= 1, "data.frames_per_clip must be positive");
  check(data.image_size >= 4, "data.image_size must be at least 4");
  check_style(errors, data.source_style, "data.source_style");
  check_style(errors, data.target_style, "data.target_style");

  check(model.patch >= 1, "model.patch must be positive");
  check(model.patch < 1 || data.image_size % model.patch == 0, "model.patch must divide data.image_size");
  check(model.hidden >= 1, "model.hidden must be positive");
  check(model.embed_dim >= 1, "model.embed_dim must be positive");
  check(model.activation == "tanh", "model.activation must be \"tanh\"");

  check(std::isfinite(train.alpha) && train.alpha >= 0.0 && train.alpha <= 1.0, "train.alpha must lie in [0, 1]");
  check(std::isfinite(train.lambda_aug) && train.lambda_aug >= 0.0, "train.lambda_aug must be non-negative");
  check(std::isfinite(train.lambda_sup) && train.lambda_sup >= 0.0, "train.lambda_sup must be non-negative");
  check(std::isfinite(train.learning_rate) && train.learning_rate > 0.0, "train.learning_rate must be positive");
  check(std::isfinite(train.weight_decay) && train.weight_decay >= 0.0, "train.weight_decay must be non-negative");
  check(train.batch_size >= 1, "train.batch_size must be positive");
  check(train.epochs >= 0, "train.epochs must be non-negative");
  check(train.frames_per_clip >= 1, "train.frames_per_clip must be positive");
  check(std::isfinite(train.brightness_jitter) && train.brightness_jitter >= 0.0 && train.brightness_jitter <= 1.0,
        "train.brightness_jitter must lie in [0, 1]");

  check(!paths.data_dir.empty() || !paths.manifest.empty(), "paths.data_dir or paths.manifest must be set");
  check(!paths.out_dir.empty(), "paths.out_dir must be set");

  check(!ablate.seeds.empty(), "ablate.seeds must list at least one seed");
  check(ablate.lambda_aug_grid.empty() == ablate.lambda_sup_grid.empty(),
        "ablate.lambda_aug_grid and ablate.lambda_sup_grid must be given together");
  for (double v : ablate.lambda_aug_grid) check(std::isfinite(v) && v >= 0.0, "ablate.lambda_aug_grid values must be non-negative");
  for (double v : ablate.lambda_sup_grid) check(std::isfinite(v) && v >= 0.0, "ablate.lambda_sup_grid values must be non-negative");

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Reader r;
  if (r.object(doc, "config", {"seed", "data", "model", "train", "paths", "ablate"})) {
    if (doc.contains("data")) {
      const auto& d = doc["data"];
      if (r.object(d, "data", {"num_classes", "clips_per_class", "frames_per_clip", "image_size", "seed", "source_style",
                                "target_style"})) {
        r.integer(d, "data", "num_classes", cfg.data.num_classes);
        r.integer(d, "data", "clips_per_class", cfg.data.clips_per_class);
        r.integer(d, "data", "frames_per_clip", cfg.data.frames_per_clip);
        r.integer(d, "data", "image_size", cfg.data.image_size);
        r.seed(d, "data", "seed", cfg.data.seed);
        if (d.contains("source_style")) r.style(d["source_style"], "data.source_style", cfg.data.source_style);
        if (d.contains("target_style")) r.style(d["target_style"], "data.target_style", cfg.data.target_style);
      }
    }
    if (doc.contains("model")) {
      const auto& m = doc["model"];
      if (r.object(m, "model", {"patch", "hidden", "embed_dim", "activation"})) {
        r.integer(m, "model", "patch", cfg.model.patch);
        r.integer(m, "model", "hidden", cfg.model.hidden);
        r.integer(m, "model", "embed_dim", cfg.model.embed_dim);
        r.string(m, "model", "activation", cfg.model.activation);
      }
    }
    if (doc.contains("train")) {
      const auto& t = doc["train"];
      if (r.object(t, "train", {"alpha", "lambda_aug", "lambda_sup", "learning_rate", "weight_decay", "batch_size", "epochs",
                                 "seed", "frames_per_clip", "standard_augment", "brightness_jitter"})) {
        r.number(t, "train", "alpha", cfg.train.alpha);
        r.number(t, "train", "lambda_aug", cfg.train.lambda_aug);
        r.number(t, "train", "lambda_sup", cfg.train.lambda_sup);
        r.number(t, "train", "learning_rate", cfg.train.learning_rate);
        r.number(t, "train", "weight_decay", cfg.train.weight_decay);
        r.integer(t, "train", "batch_size", cfg.train.batch_size);
        r.integer(t, "train", "epochs", cfg.train.epochs);
        r.seed(t, "train", "seed", cfg.train.seed);
        r.integer(t, "train", "frames_per_clip", cfg.train.frames_per_clip);
        r.boolean(t, "train", "standard_augment", cfg.train.standard_augment);
        r.number(t, "train", "brightness_jitter", cfg.train.brightness_jitter);
      }
    }
    if (doc.contains("paths")) {
      const auto& p = doc["paths"];
      if (r.object(p, "paths", {"data_dir", "manifest", "generate_if_missing", "out_dir"})) {
        r.string(p, "paths", "data_dir", cfg.paths.data_dir);
        r.string(p, "paths", "manifest", cfg.paths.manifest);
        r.boolean(p, "paths", "generate_if_missing", cfg.paths.generate_if_missing);
        r.string(p, "paths", "out_dir", cfg.paths.out_dir);
      }
    }
    if (doc.contains("ablate")) {
      const auto& a = doc["ablate"];
      if (r.object(a, "ablate", {"seeds", "lambda_aug_grid", "lambda_sup_grid"})) {
        r.list(a, "ablate", "seeds", cfg.ablate.seeds);
        r.list(a, "ablate", "lambda_aug_grid", cfg.ablate.lambda_aug_grid);
        r.list(a, "ablate", "lambda_sup_grid", cfg.ablate.lambda_sup_grid);
      }
    }
    if (doc.contains("seed")) {
      std::uint64_t seed = 0;
      const std::size_t before = r.errors.size();
      r.seed(doc, "config", "seed", seed);
      if (r.errors.size() == before) apply_run_seed(cfg, seed);
    }
  }
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    const auto nl = msg.find('\n');
    if (nl != std::string::npos) {
      std::istringstream lines(msg.substr(nl + 1));
      for (std::string line; std::getline(lines, line);) r.errors.push_back(line.substr(line.find_first_not_of(' ')));
    }
  }
  if (!r.errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& c) {
  json doc;
  doc["data"] = {{"num_classes", c.data.num_classes},
                 {"clips_per_class", c.data.clips_per_class},
                 {"frames_per_clip", c.data.frames_per_clip},
                 {"image_size", c.data.image_size},
                 {"seed", c.data.seed},
                 {"source_style", style_json(c.data.source_style)},
                 {"target_style", style_json(c.data.target_style)}};
  doc["model"] = {{"patch", c.model.patch}, {"hidden", c.model.hidden}, {"embed_dim", c.model.embed_dim},
                  {"activation", c.model.activation}};
  doc["train"] = {{"alpha", c.train.alpha},
                  {"lambda_aug", c.train.lambda_aug},
                  {"lambda_sup", c.train.lambda_sup},
                  {"learning_rate", c.train.learning_rate},
                  {"weight_decay", c.train.weight_decay},
                  {"batch_size", c.train.batch_size},
                  {"epochs", c.train.epochs},
                  {"seed", c.train.seed},
                  {"frames_per_clip", c.train.frames_per_clip},
                  {"standard_augment", c.train.standard_augment},
                  {"brightness_jitter", c.train.brightness_jitter}};
  doc["paths"] = {{"data_dir", c.paths.data_dir},
                  {"manifest", c.paths.manifest},
                  {"generate_if_missing", c.paths.generate_if_missing},
                  {"out_dir", c.paths.out_dir}};
  doc["ablate"] = {{"seeds", c.ablate.seeds},
                   {"lambda_aug_grid", c.ablate.lambda_aug_grid},
                   {"lambda_sup_grid", c.ablate.lambda_sup_grid}};
  return doc.dump(2) + "\n";
}

}  // namespace causalign
