#include "causalign/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "causalign/error.hpp"
#include "causalign/spectral.hpp"

namespace causalign {

AdamWOptions TrainConfig::optimizer() const {
  AdamWOptions o;
  o.learning_rate = learning_rate;
  o.weight_decay = weight_decay;
  return o;
}

void TrainConfig::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "train.alpha must lie in [0, 1]");
  weights().validate();
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "train.learning_rate must be positive");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0, "train.weight_decay must be non-negative");
  require(batch_size >= 1, "train.batch_size must be positive");
  require(epochs >= 0, "train.epochs must be non-negative");
  require(frames_per_clip >= 1, "train.frames_per_clip must be positive");
  require(std::isfinite(brightness_jitter) && brightness_jitter >= 0.0 && brightness_jitter <= 1.0,
          "train.brightness_jitter must lie in [0, 1]");
}

void ClipDataset::validate() const {
  require(!clips.empty(), "empty dataset");
  require(!class_names.empty(), "dataset has no classes");
  require(labels.size() == clips.size() && ids.size() == clips.size(), "dataset columns differ in length");
  for (std::size_t i = 0; i < clips.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes(), "clip " + ids[i] + " has an out-of-range label");
    require(!clips[i].empty(), "clip " + ids[i] + " has no frames");
  }
}

std::vector<std::size_t> sample_frame_indices(std::size_t total, std::size_t count, std::size_t offset) {
  require(total >= 1 && count >= 1, "frame sampling needs a nonempty clip and a positive count");
  std::vector<std::size_t> out(count);
  for (std::size_t m = 0; m < count; ++m) {
    const std::size_t start = m * total / count;
    const std::size_t len = (m + 1) * total / count - start;
    out[m] = len == 0 ? std::min(start, total - 1) : start + offset % len;
  }
  return out;
}

Clip sample_frames(const Clip& clip, std::size_t count, std::size_t offset) {
  Clip out;
  out.reserve(count);
  for (std::size_t i : sample_frame_indices(clip.size(), count, offset)) out.push_back(clip[i]);
  return out;
}

namespace {

std::size_t segment_span(std::size_t total, std::size_t count) { return (total + count - 1) / count; }

void flip_and_jitter(Clip& clip, bool flip, double delta) {
  for (auto& frame : clip) {
    ImageTensor out(frame.height(), frame.width(), frame.channels());
    for (int y = 0; y < frame.height(); ++y)
      for (int x = 0; x < frame.width(); ++x)
        for (int c = 0; c < frame.channels(); ++c) {
          const int sx = flip ? frame.width() - 1 - x : x;
          out.at(y, x, c) = std::clamp(frame.at(y, sx, c) + delta, 0.0, 1.0);
        }
    frame = std::move(out);
  }
}

Matrix stack(const std::vector<std::vector<double>>& rows) { return Matrix::from_rows(rows); }

}  // namespace

BatchViews prepare_views(const ClipDataset& data, const Batch& batch, const ViewOptions& options, Rng& rng) {
  require(batch.size() >= 1, "empty batch");
  require(batch.partner.size() == batch.size(), "batch is missing style partners");
  const std::uint64_t base = rng.next_u64();
  const auto count = static_cast<std::size_t>(options.frames_per_clip);

  const std::size_t n = batch.size();
  for (std::size_t b = 0; b < n; ++b)
    require(batch.items[b] < data.size() && batch.items[batch.partner[b]] < data.size(),
            "batch item outside the dataset");

  BatchViews views;
  views.original.resize(n);
  views.augmented.resize(n);
  views.betas.resize(n);
  views.labels.resize(n);
  auto build = [&](std::size_t b) {
    Rng item_rng(derive_seed(base, b));
    const std::size_t item = batch.items[b];
    const Clip& clip = data.clips[item];
    const std::size_t offset =
        options.random_offsets ? item_rng.below(segment_span(clip.size(), count)) : 0;

    Clip original = sample_frames(clip, count, offset);
    const Clip style = sample_frames(data.clips[batch.items[batch.partner[b]]], count, offset);
    if (options.standard_augment) {
      const bool flip = item_rng.uniform() < 0.5;
      const double delta = item_rng.uniform(-options.brightness_jitter, options.brightness_jitter);
      flip_and_jitter(original, flip, delta);
    }
    auto augmented = augment_clip(original, style, options.alpha, item_rng);
    views.original[b] = std::move(original);
    views.augmented[b] = std::move(augmented.frames);
    views.betas[b] = augmented.beta;
    views.labels[b] = data.labels[item];
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n; ++b) build(b);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t b = w; b < n; b += workers) build(b);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return views;
}

StepResult evaluate_views(const ClipModel& model, const BatchViews& views, const LossWeights& weights,
                          const ComponentWeights& gradient_weights) {
  const std::size_t n = views.original.size();
  require(n >= 1 && views.augmented.size() == n && views.labels.size() == n, "inconsistent batch views");

  std::vector<ClipActivations> orig_acts, aug_acts;
  std::vector<std::vector<double>> orig_out, aug_out;
  for (std::size_t i = 0; i < n; ++i) {
    orig_acts.push_back(forward_clip(model, views.original[i]));
    aug_acts.push_back(forward_clip(model, views.augmented[i]));
    orig_out.push_back(orig_acts.back().output);
    aug_out.push_back(aug_acts.back().output);
  }
  const Matrix z_orig = stack(orig_out);
  const Matrix z_aug = stack(aug_out);
  const Matrix text = model.text_embeddings();
  const double tau = model.temperature();

  const AlignmentGrad orig = clip_loss_with_grad(z_orig, text, views.labels, tau);
  const AlignmentGrad aug = aug_alignment_loss_with_grad(z_aug, text, views.labels, tau);
  const SuppressionGrad sup = suppression_loss_with_grad(z_orig, z_aug);

  StepResult result;
  result.losses = total_loss(orig.value, aug.value, sup.value, weights);
  result.grads = model.params().zeros_like();

  const auto& gw = gradient_weights;
  const std::size_t d = z_orig.cols();
  std::vector<double> g(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) g[k] = gw.orig * orig.grad_visual(i, k) + gw.sup * sup.grad_original(i, k);
    backward_clip(model, orig_acts[i], g, result.grads);
    if (gw.aug == 0.0 && gw.sup == 0.0) continue;
    for (std::size_t k = 0; k < d; ++k) g[k] = gw.aug * aug.grad_visual(i, k) + gw.sup * sup.grad_augmented(i, k);
    backward_clip(model, aug_acts[i], g, result.grads);
  }
  auto& gt = result.grads.text_table;
  for (std::size_t c = 0; c < text.rows(); ++c)
    for (std::size_t k = 0; k < d; ++k) gt[c * d + k] = gw.orig * orig.grad_text(c, k) + gw.aug * aug.grad_text(c, k);
  result.grads.log_scale[0] =
      (gw.orig * orig.grad_scale + gw.aug * aug.grad_scale) * model.inverse_temperature_slope();
  return result;
}

StepResult forward_backward(const ClipModel& model, const ClipDataset& data, const Batch& batch,
                            const LossWeights& weights, const ViewOptions& options, Rng& rng) {
  weights.validate();
  const BatchViews views = prepare_views(data, batch, options, rng);
  return evaluate_views(model, views, weights, {1.0, weights.lambda_aug, weights.lambda_sup});
}

Checkpoint initial_checkpoint(const TrainConfig& config, const EncoderArch& arch, const ClipDataset& data) {
  config.validate();
  data.validate();
  Rng init_rng(derive_seed(config.seed, 0));
  Checkpoint ck;
  ck.arch = arch;
  ck.class_names = data.class_names;
  ck.params = ClipModel::initialize(arch, data.num_classes(), init_rng).params();
  ck.optimizer = AdamWState::zeros_like(ck.params);
  ck.epoch = 0;
  ck.config = config;
  return ck;
}

TrainResult train(const TrainConfig& config, const EncoderArch& arch, const ClipDataset& data,
                  const std::function<void(const EpochLog&)>& on_epoch, int threads) {
  TrainResult result;
  result.checkpoint = initial_checkpoint(config, arch, data);
  Checkpoint& ck = result.checkpoint;
  ClipModel model = ck.model();

  Rng shuffle_rng(derive_seed(config.seed, 1));
  Rng view_rng(derive_seed(config.seed, 2));
  ViewOptions options;
  options.alpha = config.alpha;
  options.frames_per_clip = config.frames_per_clip;
  options.standard_augment = config.standard_augment;
  options.brightness_jitter = config.brightness_jitter;
  options.random_offsets = true;
  options.threads = threads;
  const LossWeights weights = config.weights();
  const AdamWOptions adam = config.optimizer();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = make_batches(data.labels, config.batch_size, shuffle_rng);
    LossBundle sum;
    for (const auto& batch : batches) {
      const StepResult step = forward_backward(model, data, batch, weights, options, view_rng);
      adamw_step(model.params(), step.grads, ck.optimizer, adam);
      sum.l_orig += step.losses.l_orig;
      sum.l_aug += step.losses.l_aug;
      sum.l_sup += step.losses.l_sup;
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    result.log.push_back({epoch, total_loss(sum.l_orig * inv, sum.l_aug * inv, sum.l_sup * inv, weights)});
    if (on_epoch) on_epoch(result.log.back());
  }
  ck.params = model.params();
  ck.epoch = config.epochs;
  return result;
}

std::vector<double> class_logits(const ClipModel& model, const Clip& frames) {
  const auto z = encode_clip(model, frames);
  const Matrix text = normalize_rows(model.text_embeddings());
  const double scale = model.inverse_temperature();
  std::vector<double> logits(text.rows());
  for (std::size_t c = 0; c < text.rows(); ++c) logits[c] = scale * dot(z, text.row(c));
  return logits;
}

std::vector<double> predict_sequences(const ClipModel& model, const std::vector<Clip>& sequences) {
  require(!sequences.empty(), "nothing to predict");
  require(model.num_classes() >= 1, "model has an empty class table");
  std::vector<double> mean(model.num_classes(), 0.0);
  for (const auto& seq : sequences) {
    const auto logits = class_logits(model, seq);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += logits[c];
  }
  for (double& v : mean) v /= static_cast<double>(sequences.size());
  return similarity_softmax(mean, 1.0);
}

std::vector<double> predict(const Checkpoint& checkpoint, const Clip& frames) {
  require(!checkpoint.class_names.empty(), "checkpoint has an empty class table");
  require(!frames.empty(), "cannot predict an empty clip");
  const ClipModel model = checkpoint.model();
  const auto count = static_cast<std::size_t>(checkpoint.config.frames_per_clip);
  const std::size_t offsets = frames.size() > count ? segment_span(frames.size(), count) : 1;
  std::vector<Clip> sequences;
  for (std::size_t o = 0; o < offsets; ++o) sequences.push_back(sample_frames(frames, count, o));
  return predict_sequences(model, sequences);
}

}  // namespace causalign
