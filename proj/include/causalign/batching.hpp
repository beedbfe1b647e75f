#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "causalign/random.hpp"

namespace causalign {

struct Manifest;
enum class DomainFilter;

/// Items are indices into the collection the batch was drawn from.
struct Batch {
  std::vector<std::size_t> items;
  std::vector<int> labels;
  std::vector<std::size_t> partner;  // batch-local position of each item's style partner
  bool self_partnered = false;       // singleton batch; partner is the item itself

  std::size_t size() const { return items.size(); }
};

/// Shuffled partition of `labels.size()` items into batches of `batch_size`
/// (last one may be short). Partners have a different label whenever the
/// batch holds one, otherwise a uniformly random other item.
std::vector<Batch> make_batches(std::span<const int> labels, int batch_size, Rng& rng);

/// Batches over manifest entries passing `filter`; items index manifest entries.
std::vector<Batch> make_batches(const Manifest& manifest, int batch_size, Rng& rng, DomainFilter filter);

/// Picks partners for an already-formed batch.
void assign_partners(Batch& batch, Rng& rng);

}  // namespace causalign
