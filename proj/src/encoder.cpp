#include "causalign/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "causalign/error.hpp"

namespace causalign {

void EncoderArch::validate() const {
  require(height >= 1 && width >= 1 && channels >= 1, "encoder input shape must be positive");
  require(patch >= 1, "encoder patch size must be positive");
  require(height % patch == 0 && width % patch == 0,
          "encoder patch size " + std::to_string(patch) + " must divide the frame size " + std::to_string(height) +
              "x" + std::to_string(width));
  require(hidden >= 1 && embed_dim >= 1, "encoder layer sizes must be positive");
  require(activation == "tanh", "unsupported activation '" + activation + "' (only tanh)");
}

const char* Parameters::group_name(std::size_t group) {
  static constexpr const char* kNames[kGroupCount] = {"proj_weight", "proj_bias", "head_weight",
                                                      "head_bias",   "text_table", "log_scale"};
  return kNames[group];
}

bool Parameters::group_decays(std::size_t group) { return group == 0 || group == 2 || group == 4; }

std::vector<double>& Parameters::group(std::size_t index) {
  switch (index) {
    case 0: return proj_weight;
    case 1: return proj_bias;
    case 2: return head_weight;
    case 3: return head_bias;
    case 4: return text_table;
    case 5: return log_scale;
  }
  throw std::out_of_range("parameter group index");
}

const std::vector<double>& Parameters::group(std::size_t index) const {
  return const_cast<Parameters*>(this)->group(index);
}

Parameters Parameters::zeros_like() const {
  Parameters z;
  for (std::size_t g = 0; g < kGroupCount; ++g) z.group(g).assign(group(g).size(), 0.0);
  return z;
}

std::size_t Parameters::total_size() const {
  std::size_t n = 0;
  for (std::size_t g = 0; g < kGroupCount; ++g) n += group(g).size();
  return n;
}

void Parameters::add_scaled(const Parameters& other, double scale) {
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    auto& dst = group(g);
    const auto& src = other.group(g);
    require(dst.size() == src.size(), "parameter group size mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  }
}

ClipModel::ClipModel(EncoderArch arch, int num_classes, Parameters params)
    : arch_(std::move(arch)), num_classes_(num_classes), params_(std::move(params)) {
  arch_.validate();
  require(num_classes_ >= 1, "model needs at least one class");
  const std::size_t f = arch_.feature_count();
  const std::size_t h = arch_.hidden;
  const std::size_t d = arch_.embed_dim;
  require(params_.proj_weight.size() == h * f && params_.proj_bias.size() == h &&
              params_.head_weight.size() == d * h && params_.head_bias.size() == d &&
              params_.text_table.size() == static_cast<std::size_t>(num_classes_) * d &&
              params_.log_scale.size() == 1,
          "parameter sizes do not match the encoder architecture");
}

ClipModel ClipModel::initialize(const EncoderArch& arch, int num_classes, Rng& rng) {
  arch.validate();
  const std::size_t f = arch.feature_count();
  const std::size_t h = arch.hidden;
  const std::size_t d = arch.embed_dim;
  Parameters p;
  const double proj_std = 2.0 / std::sqrt(static_cast<double>(f));
  const double head_std = 1.0 / std::sqrt(static_cast<double>(h));
  p.proj_weight.resize(h * f);
  for (double& w : p.proj_weight) w = proj_std * rng.normal();
  p.proj_bias.assign(h, 0.0);
  p.head_weight.resize(d * h);
  for (double& w : p.head_weight) w = head_std * rng.normal();
  p.head_bias.assign(d, 0.0);
  p.text_table.resize(static_cast<std::size_t>(num_classes) * d);
  for (double& w : p.text_table) w = rng.normal();
  p.log_scale = {std::log(1.0 / kInitialTemperature)};
  return ClipModel(arch, num_classes, std::move(p));
}

double ClipModel::inverse_temperature() const {
  return std::min(std::exp(params_.log_scale[0]), kMaxInverseTemperature);
}

double ClipModel::inverse_temperature_slope() const {
  const double s = std::exp(params_.log_scale[0]);
  return s < kMaxInverseTemperature ? s : 0.0;
}

Matrix ClipModel::text_embeddings() const {
  Matrix m(num_classes_, arch_.embed_dim);
  std::copy(params_.text_table.begin(), params_.text_table.end(), m.data().begin());
  return m;
}

std::vector<double> frame_features(const EncoderArch& arch, const ImageTensor& frame) {
  require(frame.height() == arch.height && frame.width() == arch.width && frame.channels() == arch.channels,
          "frame shape " + std::to_string(frame.height()) + "x" + std::to_string(frame.width()) + "x" +
              std::to_string(frame.channels()) + " does not match encoder input " + std::to_string(arch.height) +
              "x" + std::to_string(arch.width) + "x" + std::to_string(arch.channels));
  const int p = arch.patch;
  const int ph = arch.height / p;
  const int pw = arch.width / p;
  const int channels = arch.channels;
  const double inv_area = 1.0 / static_cast<double>(p * p);
  std::vector<double> features(static_cast<std::size_t>(ph) * pw * channels, 0.0);
  for (int y = 0; y < arch.height; ++y)
    for (int x = 0; x < arch.width; ++x)
      for (int c = 0; c < channels; ++c)
        features[(static_cast<std::size_t>(y / p) * pw + x / p) * channels + c] += frame.at(y, x, c);
  for (double& v : features) v = v * inv_area - 0.5;
  return features;
}

ClipActivations forward_clip(const ClipModel& model, const Clip& frames) {
  require(!frames.empty(), "cannot encode an empty clip");
  const auto& arch = model.arch();
  const auto& p = model.params();
  const std::size_t f = arch.feature_count();
  const std::size_t h = arch.hidden;
  const std::size_t d = arch.embed_dim;

  ClipActivations acts;
  acts.pooled.assign(h, 0.0);
  for (const auto& frame : frames) {
    auto features = frame_features(arch, frame);
    std::vector<double> hidden(h);
    for (std::size_t j = 0; j < h; ++j) {
      double a = p.proj_bias[j];
      const double* w = p.proj_weight.data() + j * f;
      for (std::size_t k = 0; k < f; ++k) a += w[k] * features[k];
      hidden[j] = std::tanh(a);
      acts.pooled[j] += hidden[j];
    }
    acts.features.push_back(std::move(features));
    acts.hidden.push_back(std::move(hidden));
  }
  const double inv_frames = 1.0 / static_cast<double>(frames.size());
  for (double& v : acts.pooled) v *= inv_frames;

  acts.output.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double a = p.head_bias[i];
    const double* w = p.head_weight.data() + i * h;
    for (std::size_t j = 0; j < h; ++j) a += w[j] * acts.pooled[j];
    acts.output[i] = a;
  }
  return acts;
}

std::vector<double> encode_clip(const ClipModel& model, const Clip& frames) {
  auto out = forward_clip(model, frames).output;
  const double n = l2_norm(out);
  require(n > 0.0 && std::isfinite(n), "encoder produced a zero or non-finite embedding");
  for (double& v : out) v /= n;
  return out;
}

void backward_clip(const ClipModel& model, const ClipActivations& acts, std::span<const double> grad_output,
                   Parameters& grads) {
  const auto& arch = model.arch();
  const auto& p = model.params();
  const std::size_t f = arch.feature_count();
  const std::size_t h = arch.hidden;
  const std::size_t d = arch.embed_dim;
  require(grad_output.size() == d, "output gradient has the wrong dimension");

  std::vector<double> grad_pooled(h, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double g = grad_output[i];
    grads.head_bias[i] += g;
    double* gw = grads.head_weight.data() + i * h;
    const double* w = p.head_weight.data() + i * h;
    for (std::size_t j = 0; j < h; ++j) {
      gw[j] += g * acts.pooled[j];
      grad_pooled[j] += g * w[j];
    }
  }

  const double inv_frames = 1.0 / static_cast<double>(acts.hidden.size());
  for (std::size_t t = 0; t < acts.hidden.size(); ++t) {
    const auto& hidden = acts.hidden[t];
    const auto& features = acts.features[t];
    for (std::size_t j = 0; j < h; ++j) {
      const double g = grad_pooled[j] * inv_frames * (1.0 - hidden[j] * hidden[j]);
      grads.proj_bias[j] += g;
      double* gw = grads.proj_weight.data() + j * f;
      for (std::size_t k = 0; k < f; ++k) gw[k] += g * features[k];
    }
  }
}

}  // namespace causalign
