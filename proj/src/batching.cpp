#include "causalign/batching.hpp"

#include <numeric>
#include <utility>

#include "causalign/error.hpp"
#include "causalign/manifest.hpp"

namespace causalign {

void assign_partners(Batch& batch, Rng& rng) {
  const std::size_t n = batch.size();
  require(batch.labels.size() == n, "batch labels and items differ in length");
  batch.partner.assign(n, 0);
  batch.self_partnered = n == 1;
  if (n == 1) return;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (batch.labels[j] != batch.labels[i]) candidates.push_back(j);
    if (candidates.empty())
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) candidates.push_back(j);
    batch.partner[i] = candidates[rng.below(candidates.size())];
  }
}

std::vector<Batch> make_batches(std::span<const int> labels, int batch_size, Rng& rng) {
  require(batch_size >= 1, "batch size must be positive");
  require(!labels.empty(), "cannot batch an empty collection");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::vector<Batch> batches;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < order.size(); start += bs) {
    Batch b;
    for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k) {
      b.items.push_back(order[k]);
      b.labels.push_back(labels[order[k]]);
    }
    assign_partners(b, rng);
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<Batch> make_batches(const Manifest& manifest, int batch_size, Rng& rng, DomainFilter filter) {
  const auto selected = manifest.select(filter);
  require(!selected.empty(), "domain filter matches no manifest entries");
  std::vector<int> labels;
  for (std::size_t i : selected) labels.push_back(manifest.entries[i].label);
  auto batches = make_batches(labels, batch_size, rng);
  for (auto& b : batches)
    for (auto& item : b.items) item = selected[item];
  return batches;
}

}  // namespace causalign
