#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace causalign {

struct PredictionSet {
  int num_classes = 0;
  std::vector<int> truth;
  std::vector<int> predicted;
  std::vector<std::string> item_ids;  // optional; empty or one per pair

  std::size_t size() const { return truth.size(); }
  void validate() const;
};

/// counts[t][p] = number of samples of true class t predicted as p.
std::vector<std::vector<long>> confusion_matrix(const PredictionSet& preds);

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
  long predicted = 0;
};

struct MetricsReport {
  double weighted_f1 = 0.0;
  double unweighted_f1 = 0.0;  // macro
  double global_f1 = 0.0;      // micro; equals accuracy for single-label data
  double balanced_accuracy = 0.0;
  std::vector<ClassScore> per_class;
  std::size_t samples = 0;
};

/// Classes with neither support nor predictions are left out of the macro
/// mean and balanced accuracy. A class that is predicted but never true scores
/// F1 = 0 in the macro mean. All 0/0 ratios are 0.
MetricsReport compute_metrics(const PredictionSet& preds);

/// Aligned-column text report.
std::string format_metrics_text(const MetricsReport& report);
/// key=value lines with round-trippable numbers.
std::string format_metrics_kv(const MetricsReport& report);

// Predictions file:
//   # num_classes=<C>          (optional)
//   item_id,true_label,predicted_label   (optional header)
//   <id>,<int>,<int>
std::string format_predictions(const PredictionSet& preds);
/// `num_classes` <= 0 defers to the file's comment, then to max label + 1.
PredictionSet parse_predictions(std::string_view text, int num_classes = 0);
PredictionSet load_predictions(const std::filesystem::path& path, int num_classes = 0);

}  // namespace causalign
