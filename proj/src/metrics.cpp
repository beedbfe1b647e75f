#include "causalign/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "causalign/error.hpp"

namespace causalign {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

bool parse_int(std::string_view s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void PredictionSet::validate() const {
  require(num_classes >= 1, "prediction set needs at least one class");
  require(!truth.empty(), "empty prediction set");
  require(truth.size() == predicted.size(), "true and predicted label counts differ");
  require(item_ids.empty() || item_ids.size() == truth.size(), "item id count does not match the prediction count");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < num_classes,
            "true label " + std::to_string(truth[i]) + " of item " + std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
    require(predicted[i] >= 0 && predicted[i] < num_classes,
            "predicted label " + std::to_string(predicted[i]) + " of item " + std::to_string(i) + " outside [0, " +
                std::to_string(num_classes) + ")");
  }
}

std::vector<std::vector<long>> confusion_matrix(const PredictionSet& preds) {
  preds.validate();
  std::vector<std::vector<long>> cm(preds.num_classes, std::vector<long>(preds.num_classes, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) ++cm[preds.truth[i]][preds.predicted[i]];
  return cm;
}

MetricsReport compute_metrics(const PredictionSet& preds) {
  const auto cm = confusion_matrix(preds);
  const int classes = preds.num_classes;
  const long total = static_cast<long>(preds.size());

  MetricsReport r;
  r.samples = preds.size();
  r.per_class.resize(classes);
  long correct = 0;
  for (int c = 0; c < classes; ++c) {
    auto& s = r.per_class[c];
    const long tp = cm[c][c];
    for (int k = 0; k < classes; ++k) {
      s.support += cm[c][k];
      s.predicted += cm[k][c];
    }
    s.precision = ratio(tp, s.predicted);
    s.recall = ratio(tp, s.support);
    s.f1 = ratio(2 * tp, s.support + s.predicted);
    correct += tp;
  }

  double macro = 0.0, weighted = 0.0, recall_sum = 0.0;
  int active = 0, supported = 0;
  for (const auto& s : r.per_class) {
    if (s.support == 0 && s.predicted == 0) continue;
    macro += s.f1;
    ++active;
    if (s.support > 0) {
      weighted += static_cast<double>(s.support) * s.f1;
      recall_sum += s.recall;
      ++supported;
    }
  }
  r.unweighted_f1 = macro / active;
  r.weighted_f1 = weighted / static_cast<double>(total);
  r.global_f1 = ratio(correct, total);
  r.balanced_accuracy = recall_sum / supported;
  return r;
}

std::string format_metrics_text(const MetricsReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << std::left << std::setw(20) << "samples" << report.samples << '\n';
  out << std::setw(20) << "weighted_f1" << report.weighted_f1 << '\n';
  out << std::setw(20) << "unweighted_f1" << report.unweighted_f1 << '\n';
  out << std::setw(20) << "global_f1" << report.global_f1 << '\n';
  out << std::setw(20) << "balanced_accuracy" << report.balanced_accuracy << '\n';
  out << '\n' << std::right << std::setw(6) << "class" << std::setw(12) << "precision" << std::setw(12) << "recall"
      << std::setw(12) << "f1" << std::setw(10) << "support" << '\n';
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    out << std::setw(6) << c << std::setw(12) << s.precision << std::setw(12) << s.recall << std::setw(12) << s.f1
        << std::setw(10) << s.support << '\n';
  }
  return out.str();
}

std::string format_metrics_kv(const MetricsReport& report) {
  std::ostringstream out;
  out << "samples=" << report.samples << '\n';
  out << "weighted_f1=" << shortest(report.weighted_f1) << '\n';
  out << "unweighted_f1=" << shortest(report.unweighted_f1) << '\n';
  out << "global_f1=" << shortest(report.global_f1) << '\n';
  out << "balanced_accuracy=" << shortest(report.balanced_accuracy) << '\n';
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    const std::string p = "class." + std::to_string(c) + ".";
    out << p << "precision=" << shortest(s.precision) << '\n';
    out << p << "recall=" << shortest(s.recall) << '\n';
    out << p << "f1=" << shortest(s.f1) << '\n';
    out << p << "support=" << s.support << '\n';
  }
  return out.str();
}

std::string format_predictions(const PredictionSet& preds) {
  preds.validate();
  std::ostringstream out;
  out << "# num_classes=" << preds.num_classes << '\n';
  out << "item_id,true_label,predicted_label\n";
  for (std::size_t i = 0; i < preds.size(); ++i)
    out << (preds.item_ids.empty() ? std::to_string(i) : preds.item_ids[i]) << ',' << preds.truth[i] << ','
        << preds.predicted[i] << '\n';
  return out.str();
}

PredictionSet parse_predictions(std::string_view text, int num_classes) {
  PredictionSet set;
  int declared = 0;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "num_classes=";
      const auto body = trim(line.substr(1));
      if (body.starts_with(key) && !parse_int(body.substr(key.size()), declared))
        throw ValidationError("predictions line " + std::to_string(line_no) + ": bad num_classes comment");
      continue;
    }
    if (line == "item_id,true_label,predicted_label") continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
      throw ValidationError("predictions line " + std::to_string(line_no) + ": expected item_id,true_label,predicted_label");
    int t = 0, p = 0;
    if (!parse_int(trim(line.substr(c1 + 1, c2 - c1 - 1)), t) || !parse_int(trim(line.substr(c2 + 1)), p))
      throw ValidationError("predictions line " + std::to_string(line_no) + ": labels must be integers");
    if (t < 0 || p < 0) throw ValidationError("predictions line " + std::to_string(line_no) + ": negative label");
    set.item_ids.emplace_back(trim(line.substr(0, c1)));
    set.truth.push_back(t);
    set.predicted.push_back(p);
    lines.push_back(line_no);
  }
  if (set.truth.empty()) throw ValidationError("predictions file has no entries");

  if (num_classes > 0)
    set.num_classes = num_classes;
  else if (declared > 0)
    set.num_classes = declared;
  else
    set.num_classes = 1 + std::max(*std::max_element(set.truth.begin(), set.truth.end()),
                                   *std::max_element(set.predicted.begin(), set.predicted.end()));
  for (std::size_t i = 0; i < set.truth.size(); ++i)
    if (set.truth[i] >= set.num_classes || set.predicted[i] >= set.num_classes)
      throw ValidationError("predictions line " + std::to_string(lines[i]) + ": label outside [0, " +
                            std::to_string(set.num_classes) + ")");
  return set;
}

PredictionSet load_predictions(const std::filesystem::path& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions(buf.str(), num_classes);
}

}  // namespace causalign
