#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalign/config.hpp"
#include "causalign/metrics.hpp"
#include "causalign/trainer.hpp"

namespace causalign {

/// Predicts every clip of `data` with `checkpoint` (argmax of predict()).
PredictionSet evaluate_dataset(const Checkpoint& checkpoint, const ClipDataset& data);

struct AblationVariant {
  std::string name;
  double lambda_aug = 0.0;
  double lambda_sup = 0.0;
};

/// The four loss configurations: L_orig, +L_sup, +L_aug, all three.
std::vector<AblationVariant> ablation_variants(const TrainConfig& base);

struct AblationCell {
  std::uint64_t seed = 0;
  MetricsReport target;
  MetricsReport source;
};

struct AblationRow {
  AblationVariant variant;
  std::vector<AblationCell> cells;  // one per seed
  MetricsReport mean_target() const;
};

/// Seed s renders its corpus with derive_seed(s, 1) and trains with
/// derive_seed(s, 2); every variant of a seed shares both.
std::vector<AblationRow> run_ablation(const RunConfig& config, const std::vector<AblationVariant>& variants);

/// Loss-component table over the four metrics (means over seeds, target domain).
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace causalign
