#include "causalign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "causalign/error.hpp"

namespace causalign {

namespace {

void check_tau(double tau) { require(std::isfinite(tau) && tau > 0.0, "temperature must be positive and finite"); }

std::vector<double> row_norms(const Matrix& m) {
  std::vector<double> norms(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) norms[r] = l2_norm(m.row(r));
  return norms;
}

// Pulls a gradient taken w.r.t. normalized rows back to the raw rows:
// d/dv = (g - u (u . g)) / |v|.
Matrix normalize_backward(const Matrix& unit, const std::vector<double>& norms, const Matrix& grad_unit) {
  Matrix out(unit.rows(), unit.cols());
  for (std::size_t r = 0; r < unit.rows(); ++r) {
    const double proj = dot(unit.row(r), grad_unit.row(r));
    for (std::size_t c = 0; c < unit.cols(); ++c) out(r, c) = (grad_unit(r, c) - unit(r, c) * proj) / norms[r];
  }
  return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - hi);
  const double log_z = hi + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

// KL(target || softmax(logits)) computed from log-probabilities.
double kl_from_logits(std::span<const double> target, std::span<const double> log_p) {
  double kl = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] > 0.0) kl += target[i] * (std::log(target[i]) - log_p[i]);
  return std::max(kl, 0.0);  // rounding can leave -1e-17 at the optimum
}

void check_alignment_inputs(const Matrix& visual, const Matrix& text, std::span<const int> labels) {
  require(visual.rows() >= 1, "alignment loss needs at least one visual embedding");
  require(text.rows() >= 1, "alignment loss needs at least one class embedding");
  require(visual.cols() == text.cols(), "visual and text embedding dimensions differ");
  require(labels.size() == visual.rows(), "label count (" + std::to_string(labels.size()) +
                                              ") does not match visual embedding count (" +
                                              std::to_string(visual.rows()) + ")");
  for (int label : labels)
    require(label >= 0 && static_cast<std::size_t>(label) < text.rows(),
            "label " + std::to_string(label) + " outside class range [0, " + std::to_string(text.rows()) + ")");
}

}  // namespace

Matrix normalize_rows(const Matrix& rows) {
  Matrix out = rows;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const double n = l2_norm(rows.row(r));
    require(std::isfinite(n), "embedding " + std::to_string(r) + " has non-finite values");
    require(n > 0.0, "embedding " + std::to_string(r) + " has zero norm");
    for (double& v : out.row(r)) v /= n;
  }
  return out;
}

SimilarityMatrix cosine_similarity_matrix(const Matrix& rows, const Matrix& cols) {
  require(rows.rows() >= 1 && cols.rows() >= 1, "cosine similarity of an empty set");
  require(rows.cols() == cols.cols(), "embedding dimensions differ");
  const Matrix a = normalize_rows(rows);
  const Matrix b = normalize_rows(cols);
  SimilarityMatrix sim;
  sim.values = Matrix(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) sim.values(i, j) = std::clamp(dot(a.row(i), b.row(j)), -1.0, 1.0);
  for (std::size_t i = 0; i < a.rows(); ++i) sim.row_ids.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < b.rows(); ++j) sim.col_ids.push_back(static_cast<int>(j));
  return sim;
}

std::vector<double> similarity_softmax(std::span<const double> sims, double tau) {
  check_tau(tau);
  require(!sims.empty(), "softmax of an empty vector");
  for (double s : sims) require(std::isfinite(s), "similarities must be finite");
  std::vector<double> scaled(sims.size());
  for (std::size_t i = 0; i < sims.size(); ++i) scaled[i] = sims[i] / tau;
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  double sum = 0.0;
  for (double& v : scaled) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : scaled) v /= sum;
  return scaled;
}

TargetMatrix make_targets(std::span<const int> labels, int num_classes) {
  require(num_classes >= 1, "target matrix needs at least one class");
  TargetMatrix t{Matrix(labels.size(), num_classes)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes, "label " + std::to_string(labels[i]) + " outside class range");
    t.values(i, labels[i]) = 1.0;
  }
  return t;
}

double kl_divergence(std::span<const double> target, std::span<const double> predicted) {
  require(target.size() == predicted.size(), "KL arguments differ in length");
  double kl = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] <= 0.0) continue;
    if (predicted[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += target[i] * std::log(target[i] / predicted[i]);
  }
  return kl;
}

AlignmentGrad clip_loss_with_grad(const Matrix& visual, const Matrix& text, std::span<const int> labels,
                                  double tau) {
  check_tau(tau);
  check_alignment_inputs(visual, text, labels);
  const std::size_t n = visual.rows();
  const std::size_t classes = text.rows();
  const double scale = 1.0 / tau;

  const Matrix v = normalize_rows(visual);
  const Matrix t = normalize_rows(text);
  Matrix cos(n, classes);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < classes; ++c) cos(i, c) = dot(v.row(i), t.row(c));

  AlignmentGrad out;
  Matrix grad_logits(n, classes);  // d value / d (scale * cos)

  // Video -> text: each video row against all class prompts, one-hot targets.
  const TargetMatrix y = make_targets(labels, static_cast<int>(classes));
  std::vector<double> logits(classes);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) logits[c] = scale * cos(i, c);
    const auto log_p = log_softmax(logits);
    out.v2t += kl_from_logits(y.values.row(i), log_p);
    for (std::size_t c = 0; c < classes; ++c)
      grad_logits(i, c) += 0.5 * (std::exp(log_p[c]) - y.values(i, c)) / static_cast<double>(n);
  }
  out.v2t /= static_cast<double>(n);

  // Text -> video: each class present in the batch against all videos, with
  // mass spread uniformly over that class's videos.
  std::vector<std::size_t> counts(classes, 0);
  for (int label : labels) ++counts[label];
  const std::size_t present = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t k) { return k > 0; }));
  std::vector<double> column(n), target(n);
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scale * cos(i, c);
      target[i] = labels[i] == static_cast<int>(c) ? 1.0 / static_cast<double>(counts[c]) : 0.0;
    }
    const auto log_q = log_softmax(column);
    out.t2v += kl_from_logits(target, log_q);
    for (std::size_t i = 0; i < n; ++i)
      grad_logits(i, c) += 0.5 * (std::exp(log_q[i]) - target[i]) / static_cast<double>(present);
  }
  out.t2v /= static_cast<double>(present);
  out.value = 0.5 * (out.v2t + out.t2v);

  Matrix grad_v(n, v.cols()), grad_t(classes, t.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double g = grad_logits(i, c);
      out.grad_scale += g * cos(i, c);
      const double gc = g * scale;
      for (std::size_t d = 0; d < v.cols(); ++d) {
        grad_v(i, d) += gc * t(c, d);
        grad_t(c, d) += gc * v(i, d);
      }
    }
  }
  out.grad_visual = normalize_backward(v, row_norms(visual), grad_v);
  out.grad_text = normalize_backward(t, row_norms(text), grad_t);
  return out;
}

double clip_loss(const Matrix& visual, const Matrix& text, std::span<const int> labels, double tau) {
  return clip_loss_with_grad(visual, text, labels, tau).value;
}

AlignmentGrad aug_alignment_loss_with_grad(const Matrix& augmented, const Matrix& text,
                                           std::span<const int> labels, double tau) {
  return clip_loss_with_grad(augmented, text, labels, tau);
}

double aug_alignment_loss(const Matrix& augmented, const Matrix& text, std::span<const int> labels, double tau) {
  return clip_loss(augmented, text, labels, tau);
}

SuppressionGrad suppression_loss_with_grad(const Matrix& original, const Matrix& augmented) {
  require(original.rows() >= 1, "suppression loss needs at least one pair");
  require(original.rows() == augmented.rows(), "original and augmented counts differ (" +
                                                   std::to_string(original.rows()) + " vs " +
                                                   std::to_string(augmented.rows()) + ")");
  require(original.cols() == augmented.cols(), "original and augmented dimensions differ");
  const std::size_t n = original.rows();
  const Matrix o = normalize_rows(original);
  const Matrix a = normalize_rows(augmented);

  SuppressionGrad out;
  Matrix grad_o(n, o.cols()), grad_a(n, a.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double residual = dot(o.row(i), a.row(j)) - (i == j ? 1.0 : 0.0);
      out.value += residual * residual;
      const double g = 2.0 * residual;
      for (std::size_t d = 0; d < o.cols(); ++d) {
        grad_o(i, d) += g * a(j, d);
        grad_a(j, d) += g * o(i, d);
      }
    }
  }
  out.grad_original = normalize_backward(o, row_norms(original), grad_o);
  out.grad_augmented = normalize_backward(a, row_norms(augmented), grad_a);
  return out;
}

double suppression_loss(const Matrix& original, const Matrix& augmented) {
  return suppression_loss_with_grad(original, augmented).value;
}

void LossWeights::validate() const {
  require(std::isfinite(lambda_aug) && lambda_aug >= 0.0, "lambda_aug must be non-negative");
  require(std::isfinite(lambda_sup) && lambda_sup >= 0.0, "lambda_sup must be non-negative");
}

LossBundle total_loss(double l_orig, double l_aug, double l_sup, const LossWeights& weights) {
  weights.validate();
  for (double v : {l_orig, l_aug, l_sup}) require(std::isfinite(v) && v >= 0.0, "component losses must be finite and non-negative");
  return {l_orig, l_aug, l_sup, l_orig + weights.lambda_aug * l_aug + weights.lambda_sup * l_sup};
}

}  // namespace causalign
