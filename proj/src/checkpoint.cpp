#include "causalign/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "causalign/error.hpp"

namespace causalign {

namespace {

constexpr char kMagic[] = "CCLK1";
constexpr std::size_t kMagicSize = 5;
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("checkpoint metadata '" + key + "' is not a number: " + text);
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("checkpoint metadata '" + key + "' is not an integer: " + text);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("checkpoint metadata '" + key + "' is not an unsigned integer: " + text);
  return v;
}

struct NamedArray {
  std::string name;
  std::vector<double>* values;
};

std::vector<NamedArray> arrays_of(Checkpoint& ck) {
  std::vector<NamedArray> out;
  for (std::size_t g = 0; g < Parameters::kGroupCount; ++g)
    out.push_back({std::string("params.") + Parameters::group_name(g), &ck.params.group(g)});
  for (std::size_t g = 0; g < Parameters::kGroupCount; ++g)
    out.push_back({std::string("adam_m.") + Parameters::group_name(g), &ck.optimizer.first_moment.group(g)});
  for (std::size_t g = 0; g < Parameters::kGroupCount; ++g)
    out.push_back({std::string("adam_v.") + Parameters::group_name(g), &ck.optimizer.second_moment.group(g)});
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ClipModel Checkpoint::model() const {
  require(!class_names.empty(), "checkpoint has an empty class table");
  return ClipModel(arch, static_cast<int>(class_names.size()), params);
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  Checkpoint ck = checkpoint;  // arrays_of needs mutable access
  std::ostringstream meta;
  meta << "version=" << kVersion << '\n';
  meta << "arch.height=" << ck.arch.height << '\n';
  meta << "arch.width=" << ck.arch.width << '\n';
  meta << "arch.channels=" << ck.arch.channels << '\n';
  meta << "arch.patch=" << ck.arch.patch << '\n';
  meta << "arch.hidden=" << ck.arch.hidden << '\n';
  meta << "arch.embed_dim=" << ck.arch.embed_dim << '\n';
  meta << "arch.activation=" << ck.arch.activation << '\n';
  meta << "classes=";
  for (std::size_t i = 0; i < ck.class_names.size(); ++i) {
    require(ck.class_names[i].find_first_of(",\n=") == std::string::npos, "class names may not contain ',', '=' or newlines");
    meta << (i ? "," : "") << ck.class_names[i];
  }
  meta << '\n';
  meta << "epoch=" << ck.epoch << '\n';
  meta << "optimizer.step=" << ck.optimizer.step << '\n';
  const TrainConfig& c = ck.config;
  meta << "config.alpha=" << format_double(c.alpha) << '\n';
  meta << "config.lambda_aug=" << format_double(c.lambda_aug) << '\n';
  meta << "config.lambda_sup=" << format_double(c.lambda_sup) << '\n';
  meta << "config.learning_rate=" << format_double(c.learning_rate) << '\n';
  meta << "config.weight_decay=" << format_double(c.weight_decay) << '\n';
  meta << "config.batch_size=" << c.batch_size << '\n';
  meta << "config.epochs=" << c.epochs << '\n';
  meta << "config.seed=" << c.seed << '\n';
  meta << "config.frames_per_clip=" << c.frames_per_clip << '\n';
  meta << "config.standard_augment=" << (c.standard_augment ? 1 : 0) << '\n';
  meta << "config.brightness_jitter=" << format_double(c.brightness_jitter) << '\n';
  const auto arrays = arrays_of(ck);
  meta << "arrays=";
  for (std::size_t i = 0; i < arrays.size(); ++i) meta << (i ? "," : "") << arrays[i].name << ':' << arrays[i].values->size();
  meta << '\n';

  const std::string text = meta.str();
  std::string out(kMagic, kMagicSize);
  const std::uint64_t len = text.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out += text;
  for (const auto& a : arrays) out.append(reinterpret_cast<const char*>(a.values->data()), a.values->size() * sizeof(double));
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  require(bytes.size() >= kMagicSize + 8 && bytes.compare(0, kMagicSize, kMagic) == 0,
          "not a checkpoint file (bad magic)");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + kMagicSize, sizeof(len));
  const std::size_t meta_begin = kMagicSize + 8;
  require(len <= bytes.size() - meta_begin, "truncated checkpoint metadata");
  const std::string text = bytes.substr(meta_begin, len);

  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "malformed checkpoint metadata line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("checkpoint metadata is missing '" + key + "'");
    return it->second;
  };
  auto get_int = [&](const std::string& key) { return static_cast<int>(parse_int(key, get(key))); };
  auto get_double = [&](const std::string& key) { return parse_double(key, get(key)); };

  require(get_int("version") == kVersion, "unsupported checkpoint version " + get("version"));
  Checkpoint ck;
  ck.arch.height = get_int("arch.height");
  ck.arch.width = get_int("arch.width");
  ck.arch.channels = get_int("arch.channels");
  ck.arch.patch = get_int("arch.patch");
  ck.arch.hidden = get_int("arch.hidden");
  ck.arch.embed_dim = get_int("arch.embed_dim");
  ck.arch.activation = get("arch.activation");
  ck.arch.validate();
  if (!get("classes").empty()) ck.class_names = split(get("classes"), ',');
  ck.epoch = get_int("epoch");
  ck.optimizer.step = parse_int("optimizer.step", get("optimizer.step"));
  TrainConfig& c = ck.config;
  c.alpha = get_double("config.alpha");
  c.lambda_aug = get_double("config.lambda_aug");
  c.lambda_sup = get_double("config.lambda_sup");
  c.learning_rate = get_double("config.learning_rate");
  c.weight_decay = get_double("config.weight_decay");
  c.batch_size = get_int("config.batch_size");
  c.epochs = get_int("config.epochs");
  c.seed = parse_u64("config.seed", get("config.seed"));
  c.frames_per_clip = get_int("config.frames_per_clip");
  c.standard_augment = get_int("config.standard_augment") != 0;
  c.brightness_jitter = get_double("config.brightness_jitter");

  auto arrays = arrays_of(ck);
  const auto listed = split(get("arrays"), ',');
  require(listed.size() == arrays.size(), "checkpoint lists " + std::to_string(listed.size()) + " arrays, expected " +
                                              std::to_string(arrays.size()));
  std::size_t offset = meta_begin + len;
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const auto colon = listed[i].rfind(':');
    require(colon != std::string::npos && listed[i].substr(0, colon) == arrays[i].name,
            "unexpected checkpoint array '" + listed[i] + "', expected " + arrays[i].name);
    const auto count = static_cast<std::size_t>(parse_u64("arrays", listed[i].substr(colon + 1)));
    require(count <= (bytes.size() - offset) / sizeof(double), "truncated checkpoint array " + arrays[i].name);
    arrays[i].values->resize(count);
    std::memcpy(arrays[i].values->data(), bytes.data() + offset, count * sizeof(double));
    offset += count * sizeof(double);
  }
  require(offset == bytes.size(), "trailing bytes after checkpoint arrays");
  ck.model();  // validates parameter shapes against the architecture
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace causalign
