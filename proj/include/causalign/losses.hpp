#pragma once

#include <span>
#include <vector>

#include "causalign/matrix.hpp"

namespace causalign {

// Embeddings are passed as matrix rows. Every loss re-normalizes its inputs
// to unit length, so raw encoder outputs may be passed directly; gradients
// are returned with respect to those raw rows.

/// Unit-length copy of the rows; throws ValidationError on a zero or non-finite row.
Matrix normalize_rows(const Matrix& rows);

struct SimilarityMatrix {
  Matrix values;
  std::vector<int> row_ids;
  std::vector<int> col_ids;
};

SimilarityMatrix cosine_similarity_matrix(const Matrix& rows, const Matrix& cols);

/// exp(s_i / tau) / sum_j exp(s_j / tau), max-subtracted.
std::vector<double> similarity_softmax(std::span<const double> sims, double tau);

/// Row i spreads unit mass over the columns of sample i's class (one-hot
/// for the video-to-text direction).
struct TargetMatrix {
  Matrix values;
};

TargetMatrix make_targets(std::span<const int> labels, int num_classes);

/// KL(target || predicted) with 0 * log(0 / q) := 0.
double kl_divergence(std::span<const double> target, std::span<const double> predicted);

struct AlignmentGrad {
  double value = 0.0;
  double v2t = 0.0;
  double t2v = 0.0;
  Matrix grad_visual;      // d value / d visual rows
  Matrix grad_text;        // d value / d text rows
  double grad_scale = 0.0;  // d value / d (1 / tau)
};

/// Half the sum of the video->text and text->video KL terms, each averaged
/// over its rows. Text->video rows for classes absent from the batch are skipped.
AlignmentGrad clip_loss_with_grad(const Matrix& visual, const Matrix& text, std::span<const int> labels,
                                  double tau);
double clip_loss(const Matrix& visual, const Matrix& text, std::span<const int> labels, double tau);

/// Alignment of augmented views against the original prompts.
AlignmentGrad aug_alignment_loss_with_grad(const Matrix& augmented, const Matrix& text,
                                           std::span<const int> labels, double tau);
double aug_alignment_loss(const Matrix& augmented, const Matrix& text, std::span<const int> labels,
                          double tau);

struct SuppressionGrad {
  double value = 0.0;
  Matrix grad_original;
  Matrix grad_augmented;
};

/// ||C - I||_F^2 with C_ij = cos(original_i, augmented_j).
SuppressionGrad suppression_loss_with_grad(const Matrix& original, const Matrix& augmented);
double suppression_loss(const Matrix& original, const Matrix& augmented);

struct LossWeights {
  double lambda_aug = 0.8;
  double lambda_sup = 0.4;
  void validate() const;
};

struct LossBundle {
  double l_orig = 0.0;
  double l_aug = 0.0;
  double l_sup = 0.0;
  double l_total = 0.0;
};

LossBundle total_loss(double l_orig, double l_aug, double l_sup, const LossWeights& weights);

}  // namespace causalign
