#include "causalign/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "causalign/error.hpp"
#include "causalign/png_io.hpp"

namespace causalign {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

ValidationError line_error(std::size_t line, const std::string& what) {
  return ValidationError("manifest line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string_view domain_name(Domain domain) { return domain == Domain::kSource ? "source" : "target"; }

Domain parse_domain(std::string_view text) {
  if (text == "source") return Domain::kSource;
  if (text == "target") return Domain::kTarget;
  throw ValidationError("unknown domain '" + std::string(text) + "' (expected source or target)");
}

DomainFilter parse_domain_filter(std::string_view text) {
  if (text == "source") return DomainFilter::kSource;
  if (text == "target") return DomainFilter::kTarget;
  if (text == "all") return DomainFilter::kAll;
  throw ValidationError("unknown domain filter '" + std::string(text) + "' (expected source, target or all)");
}

bool matches(DomainFilter filter, Domain domain) {
  switch (filter) {
    case DomainFilter::kSource: return domain == Domain::kSource;
    case DomainFilter::kTarget: return domain == Domain::kTarget;
    case DomainFilter::kAll: return true;
  }
  return false;
}

std::filesystem::path Manifest::resolve(const std::string& frame) const {
  const std::filesystem::path p(frame);
  return p.is_absolute() ? p : base_dir / p;
}

void Manifest::validate() const {
  require(!class_names.empty(), "manifest declares no classes");
  std::set<std::string> names;
  for (const auto& name : class_names) {
    require(!name.empty(), "empty class name");
    require(name.find_first_of("\t,\n\r=") == std::string::npos, "class name '" + name + "' contains a reserved character");
    require(names.insert(name).second, "duplicate class name '" + name + "'");
  }
  require(!entries.empty(), "empty manifest");
  std::set<std::string> ids;
  for (const auto& e : entries) {
    require(!e.clip_id.empty() && e.clip_id.find_first_of("\t\n\r") == std::string::npos, "invalid clip id '" + e.clip_id + "'");
    require(ids.insert(e.clip_id).second, "duplicate clip id '" + e.clip_id + "'");
    require(e.label >= 0 && e.label < num_classes(),
            "clip " + e.clip_id + " has label " + std::to_string(e.label) + " outside [0, " + std::to_string(num_classes()) + ")");
    require(!e.frames.empty(), "clip " + e.clip_id + " lists no frames");
    for (const auto& f : e.frames)
      require(!f.empty() && f.find_first_of("\t,\n\r") == std::string::npos, "clip " + e.clip_id + " has an invalid frame path");
  }
}

std::vector<std::size_t> Manifest::select(DomainFilter filter) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (matches(filter, entries[i].domain)) out.push_back(i);
  return out;
}

std::string format_manifest(const Manifest& manifest) {
  manifest.validate();
  std::ostringstream out;
  out << "classes";
  for (const auto& name : manifest.class_names) out << '\t' << name;
  out << '\n';
  for (const auto& e : manifest.entries) {
    out << e.clip_id << '\t' << e.label << '\t' << domain_name(e.domain) << '\t';
    for (std::size_t i = 0; i < e.frames.size(); ++i) out << (i ? "," : "") << e.frames[i];
    out << '\n';
  }
  return out.str();
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  bool have_header = false;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (!have_header) {
      if (fields.front() != "classes" || fields.size() < 2)
        throw line_error(line_no, "expected header 'classes<TAB>name...'");
      m.class_names.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != 4) throw line_error(line_no, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    ManifestEntry e;
    e.clip_id = fields[0];
    if (e.clip_id.empty()) throw line_error(line_no, "empty clip id");
    if (!ids.insert(e.clip_id).second) throw line_error(line_no, "duplicate clip id '" + e.clip_id + "'");
    const auto& lab = fields[1];
    const auto res = std::from_chars(lab.data(), lab.data() + lab.size(), e.label);
    if (res.ec != std::errc() || res.ptr != lab.data() + lab.size()) throw line_error(line_no, "label '" + lab + "' is not an integer");
    if (e.label < 0 || e.label >= static_cast<int>(m.class_names.size()))
      throw line_error(line_no, "label " + lab + " outside [0, " + std::to_string(m.class_names.size()) + ")");
    try {
      e.domain = parse_domain(fields[2]);
    } catch (const ValidationError& err) {
      throw line_error(line_no, err.what());
    }
    e.frames = split(fields[3], ',');
    for (const auto& f : e.frames)
      if (f.empty()) throw line_error(line_no, "empty frame path");
    m.entries.push_back(std::move(e));
  }
  if (!have_header) throw ValidationError("empty manifest");
  m.validate();
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  const std::string text = format_manifest(manifest);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Manifest m = parse_manifest(buf.str(), path.parent_path());
  for (const auto& e : m.entries)
    for (const auto& f : e.frames) {
      const auto p = m.resolve(f);
      if (!std::filesystem::exists(p)) throw IoError("missing frame file " + p.string() + " (clip " + e.clip_id + ")");
    }
  return m;
}

ClipDataset load_clips(const Manifest& manifest, DomainFilter filter) {
  ClipDataset data;
  data.class_names = manifest.class_names;
  for (std::size_t i : manifest.select(filter)) {
    const auto& e = manifest.entries[i];
    Clip clip;
    for (const auto& f : e.frames) {
      clip.push_back(read_png(manifest.resolve(f)));
      require(clip.back().same_shape(clip.front()), "clip " + e.clip_id + " mixes frame sizes");
    }
    data.ids.push_back(e.clip_id);
    data.labels.push_back(e.label);
    data.clips.push_back(std::move(clip));
  }
  require(!data.clips.empty(), "domain filter matches no clips");
  return data;
}

}  // namespace causalign
