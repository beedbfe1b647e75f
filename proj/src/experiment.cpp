#include "causalign/experiment.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "causalign/error.hpp"
#include "causalign/synthetic.hpp"

namespace causalign {

PredictionSet evaluate_dataset(const Checkpoint& checkpoint, const ClipDataset& data) {
  data.validate();
  require(static_cast<std::size_t>(data.num_classes()) == checkpoint.class_names.size(),
          "checkpoint has " + std::to_string(checkpoint.class_names.size()) + " classes but the data has " +
              std::to_string(data.num_classes()));
  PredictionSet preds;
  preds.num_classes = data.num_classes();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto probs = predict(checkpoint, data.clips[i]);
    const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
    preds.item_ids.push_back(data.ids[i]);
    preds.truth.push_back(data.labels[i]);
    preds.predicted.push_back(static_cast<int>(best));
  }
  return preds;
}

std::vector<AblationVariant> ablation_variants(const TrainConfig& base) {
  return {
      {"L_orig", 0.0, 0.0},
      {"L_orig + L_sup", 0.0, base.lambda_sup},
      {"L_orig + L_aug", base.lambda_aug, 0.0},
      {"L_orig + L_sup + L_aug", base.lambda_aug, base.lambda_sup},
  };
}

MetricsReport AblationRow::mean_target() const {
  MetricsReport mean;
  for (const auto& c : cells) {
    mean.weighted_f1 += c.target.weighted_f1;
    mean.unweighted_f1 += c.target.unweighted_f1;
    mean.global_f1 += c.target.global_f1;
    mean.balanced_accuracy += c.target.balanced_accuracy;
    mean.samples += c.target.samples;
  }
  if (!cells.empty()) {
    const double n = static_cast<double>(cells.size());
    mean.weighted_f1 /= n;
    mean.unweighted_f1 /= n;
    mean.global_f1 /= n;
    mean.balanced_accuracy /= n;
  }
  return mean;
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const std::vector<AblationVariant>& variants) {
  config.validate();
  std::vector<AblationRow> rows;
  for (const auto& v : variants) rows.push_back({v, {}});
  const EncoderArch arch = arch_for(config);
  for (std::uint64_t seed : config.ablate.seeds) {
    SynthSpec spec = config.data;
    spec.seed = derive_seed(seed, 1);
    const SynthCorpus corpus = render_synthetic(spec);
    const ClipDataset source = corpus.dataset(DomainFilter::kSource);
    const ClipDataset target = corpus.dataset(DomainFilter::kTarget);
    for (auto& row : rows) {
      TrainConfig tc = config.train;
      tc.seed = derive_seed(seed, 2);
      tc.lambda_aug = row.variant.lambda_aug;
      tc.lambda_sup = row.variant.lambda_sup;
      const TrainResult trained = train(tc, arch, source);
      AblationCell cell;
      cell.seed = seed;
      cell.target = compute_metrics(evaluate_dataset(trained.checkpoint, target));
      cell.source = compute_metrics(evaluate_dataset(trained.checkpoint, source));
      row.cells.push_back(std::move(cell));
    }
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "Loss Function" << std::right << std::setw(13) << "Weighted F1" << std::setw(15)
      << "Unweighted F1" << std::setw(11) << "Global F1" << std::setw(19) << "Balanced Accuracy" << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto& row : rows) {
    const MetricsReport m = row.mean_target();
    out << std::left << std::setw(28) << row.variant.name << std::right << std::setw(13) << m.weighted_f1
        << std::setw(15) << m.unweighted_f1 << std::setw(11) << m.global_f1 << std::setw(19) << m.balanced_accuracy
        << '\n';
  }
  return out.str();
}

}  // namespace causalign
