#include <doctest.h>

#include <cmath>
#include <functional>

#include "causalign/error.hpp"
#include "causalign/losses.hpp"
#include "oracles.hpp"

using namespace causalign;

namespace {

double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-2}); }

// Central differences of f over every entry of m, compared with `grad`.
void check_fd(Matrix m, const Matrix& grad, const std::function<double(const Matrix&)>& f) {
  const double h = 1e-5;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double keep = m(i, j);
      m(i, j) = keep + h;
      const double up = f(m);
      m(i, j) = keep - h;
      const double down = f(m);
      m(i, j) = keep;
      CHECK(rel_error(grad(i, j), (up - down) / (2 * h)) < 1e-4);
    }
}

std::vector<int> random_labels(std::size_t n, int classes, Rng& rng) {
  std::vector<int> l(n);
  for (auto& v : l) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return l;
}

}  // namespace

TEST_CASE("cosine similarity examples") {
  const Matrix e = Matrix::from_rows({{1, 0}, {0, 1}});
  CHECK(cosine_similarity_matrix(e, e).values == e);
  const Matrix v = Matrix::from_rows({{0.6, 0.8}, {0.6, 0.8}});
  const auto ones = cosine_similarity_matrix(v, v).values;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(ones(i, j) == doctest::Approx(1.0).epsilon(1e-15));
  const auto s = cosine_similarity_matrix(Matrix::from_rows({{1, 0}}), Matrix::from_rows({{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}}));
  CHECK(std::abs(s.values(0, 0) - 0.70710678) < 1e-8);
  CHECK_THROWS_AS(cosine_similarity_matrix(Matrix::from_rows({{0, 0}}), e), ValidationError);
  CHECK_THROWS_AS(cosine_similarity_matrix(Matrix::from_rows({{1, 0, 0}}), e), ValidationError);

  Rng rng(1);
  const Matrix a = oracle::random_matrix(5, 4, rng), b = oracle::random_matrix(3, 4, rng);
  const auto c = cosine_similarity_matrix(a, b).values;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(c(i, j) >= -1.0);
      CHECK(c(i, j) <= 1.0);
    }
}

TEST_CASE("similarity softmax") {
  const std::vector<double> even{1, 1};
  for (double tau : {0.01, 1.0, 7.0}) {
    const auto p = similarity_softmax(even, tau);
    CHECK(p[0] == doctest::Approx(0.5));
  }
  const auto p = similarity_softmax(std::vector<double>{1, 0}, 1.0);
  CHECK(std::abs(p[0] - std::exp(1.0) / (std::exp(1.0) + 1)) < 1e-12);
  CHECK(std::abs(p[0] - 0.731058578) < 1e-9);
  CHECK(std::abs(p[1] - 0.268941421) < 1e-9);
  const auto big = similarity_softmax(std::vector<double>{1000, 0}, 1.0);
  CHECK(big[0] == 1.0);
  CHECK(std::isfinite(big[1]));
  CHECK_THROWS_AS(similarity_softmax(even, 0.0), ValidationError);
  CHECK_THROWS_AS(similarity_softmax(even, -1.0), ValidationError);

  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(1 + rng.below(6));
    for (auto& v : s) v = 4 * rng.normal();
    const double tau = 0.05 + rng.uniform();
    const auto q = similarity_softmax(s, tau);
    double sum = 0;
    for (double v : q) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    auto shifted = s;
    for (auto& v : shifted) v += 3.5;
    const auto q2 = similarity_softmax(shifted, tau);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(q[i] - q2[i]) < 1e-9);
  }
}

TEST_CASE("temperature monotonicity") {
  const std::vector<double> s{0.3, 0.9, -0.2};
  double last = 0.0;
  for (double tau : {2.0, 1.0, 0.5, 0.1, 0.05}) {
    const double top = similarity_softmax(s, tau)[1];
    CHECK(top > last);
    last = top;
  }
}

TEST_CASE("targets and KL") {
  const std::vector<int> labels{1, 1};
  const TargetMatrix y = make_targets(labels, 3);
  CHECK(y.values(0, 1) == 1.0);
  CHECK(y.values(1, 0) == 0.0);
  const std::vector<double> one_hot{1, 0};
  CHECK(std::abs(kl_divergence(one_hot, similarity_softmax(std::vector<double>{1, 0}, 1.0)) - 0.313261688) < 1e-9);
  CHECK(std::abs(-std::log(0.731058578) - 0.313261688) < 1e-9);
  CHECK(kl_divergence(one_hot, one_hot) == 0.0);
  const std::vector<double> half{0.5, 0.5};
  CHECK(kl_divergence(half, half) == 0.0);
  CHECK_THROWS_AS(make_targets(std::vector<int>{3}, 3), ValidationError);
}

TEST_CASE("clip loss worked example") {
  // One video, two classes. Cosines (1, 0) with tau = 1 give p_v2t = softmax(1, 0);
  // the t2v row for class 0 has a single column, so its KL is 0.
  const Matrix visual = Matrix::from_rows({{1, 0}});
  const Matrix text = Matrix::from_rows({{1, 0}, {0, 1}});
  const std::vector<int> labels{0};
  const AlignmentGrad g = clip_loss_with_grad(visual, text, labels, 1.0);
  CHECK(std::abs(g.v2t - 0.313261688) < 1e-9);
  CHECK(std::abs(g.t2v) < 1e-15);
  CHECK(std::abs(g.value - 0.5 * 0.313261688) < 1e-9);
}

TEST_CASE("clip loss approaches zero as predictions reach targets") {
  // Orthogonal text axes, every video on its class axis: as tau -> 0 both
  // directions become one-hot on the (uniform-over-positives) target.
  const Matrix text = Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const Matrix visual = Matrix::from_rows({{1, 0, 0}, {0, 2, 0}, {0, 0, 1}});
  const std::vector<int> labels{0, 1, 2};
  double last = 1e9;
  for (double tau : {1.0, 0.1, 0.01}) {
    const double l = clip_loss(visual, text, labels, tau);
    CHECK(l >= 0.0);
    CHECK(l < last);
    last = l;
  }
  CHECK(last < 1e-30);
}

TEST_CASE("clip loss matches the reference implementation") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(6);
    const int c = 2 + static_cast<int>(rng.below(3));
    const std::size_t d = 2 + rng.below(7);
    const Matrix v = oracle::random_matrix(n, d, rng), txt = oracle::random_matrix(c, d, rng);
    const auto labels = random_labels(n, c, rng);
    const double tau = 0.05 + rng.uniform();
    const double ref = oracle::alignment(v, txt, labels, tau);
    CHECK(std::abs(clip_loss(v, txt, labels, tau) - ref) < 1e-9);
    CHECK(aug_alignment_loss(v, txt, labels, tau) == clip_loss(v, txt, labels, tau));
  }
}

TEST_CASE("multi-positive t2v targets") {
  // Two videos of class 0: t2v row for class 0 is (0.5, 0.5); identical videos
  // make p_t2v uniform too, so t2v vanishes.
  const Matrix visual = Matrix::from_rows({{1, 0.2}, {1, 0.2}});
  const Matrix text = Matrix::from_rows({{1, 0}, {0, 1}});
  const std::vector<int> labels{0, 0};
  const AlignmentGrad g = clip_loss_with_grad(visual, text, labels, 0.5);
  CHECK(std::abs(g.t2v) < 1e-15);
  CHECK(g.v2t > 0.0);
}

TEST_CASE("duplicating the batch leaves the alignment loss unchanged") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(4);
    const Matrix v = oracle::random_matrix(n, 5, rng), txt = oracle::random_matrix(3, 5, rng);
    const auto labels = random_labels(n, 3, rng);
    Matrix vv(2 * n, 5);
    std::vector<int> ll;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      for (std::size_t k = 0; k < 5; ++k) vv(i, k) = v(i % n, k);
      ll.push_back(labels[i % n]);
    }
    CHECK(std::abs(clip_loss(v, txt, labels, 0.3) - clip_loss(vv, txt, ll, 0.3)) < 1e-6);
  }
}

TEST_CASE("suppression loss examples") {
  const Matrix e = Matrix::from_rows({{1, 0, 0}, {0, 2, 0}});
  CHECK(suppression_loss(e, e) == doctest::Approx(0.0));
  const Matrix same = Matrix::from_rows({{0.6, 0.8}, {0.6, 0.8}});
  CHECK(std::abs(suppression_loss(same, same) - 2.0) < 1e-12);
  CHECK_THROWS_AS(suppression_loss(e, Matrix::from_rows({{1, 0, 0}})), ValidationError);
}

TEST_CASE("suppression loss matches the brute-force double sum") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(8), d = 1 + rng.below(16);
    const Matrix o = oracle::random_matrix(n, d, rng), a = oracle::random_matrix(n, d, rng);
    const double value = suppression_loss(o, a);
    CHECK(std::abs(value - oracle::suppression(o, a)) < 1e-9);
    CHECK(value >= 0.0);
    // Rescaling one embedding changes nothing.
    Matrix scaled = o;
    for (std::size_t k = 0; k < d; ++k) scaled(0, k) *= 3.7;
    CHECK(std::abs(suppression_loss(scaled, a) - value) < 1e-9);
  }
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(4), d = 2 + rng.below(7);
    const int c = 2 + static_cast<int>(rng.below(2));
    const Matrix v = oracle::random_matrix(n, d, rng), a = oracle::random_matrix(n, d, rng);
    const Matrix txt = oracle::random_matrix(c, d, rng);
    const auto labels = random_labels(n, c, rng);
    const double tau = 0.1 + rng.uniform();

    const AlignmentGrad g = clip_loss_with_grad(v, txt, labels, tau);
    check_fd(v, g.grad_visual, [&](const Matrix& m) { return clip_loss(m, txt, labels, tau); });
    check_fd(txt, g.grad_text, [&](const Matrix& m) { return clip_loss(v, m, labels, tau); });
    const double s = 1.0 / tau, h = 1e-5;
    const double fd = (clip_loss(v, txt, labels, 1.0 / (s + h)) - clip_loss(v, txt, labels, 1.0 / (s - h))) / (2 * h);
    CHECK(rel_error(g.grad_scale, fd) < 1e-4);

    const AlignmentGrad ga = aug_alignment_loss_with_grad(a, txt, labels, tau);
    check_fd(a, ga.grad_visual, [&](const Matrix& m) { return aug_alignment_loss(m, txt, labels, tau); });

    const SuppressionGrad sg = suppression_loss_with_grad(v, a);
    check_fd(v, sg.grad_original, [&](const Matrix& m) { return suppression_loss(m, a); });
    check_fd(a, sg.grad_augmented, [&](const Matrix& m) { return suppression_loss(v, m); });
  }
}

TEST_CASE("total loss") {
  const LossBundle b = total_loss(1.0, 1.0, 1.0, LossWeights{});
  CHECK(std::abs(b.l_total - 2.2) < 1e-12);
  CHECK(total_loss(0.7, 3.0, 2.0, LossWeights{0.0, 0.0}).l_total == 0.7);
  CHECK(total_loss(0, 0, 0, LossWeights{}).l_total == 0.0);
  CHECK_THROWS_AS(total_loss(-1.0, 0, 0, LossWeights{}), ValidationError);
  CHECK_THROWS_AS(total_loss(1.0, 0, 0, LossWeights{-0.1, 0.4}), ValidationError);

  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const double lo = rng.uniform(0, 5), la = rng.uniform(0, 5), ls = rng.uniform(0, 5);
    const double wa = rng.uniform(0, 2), ws = rng.uniform(0, 2), step = rng.uniform(0, 1);
    const double base = total_loss(lo, la, ls, {wa, ws}).l_total;
    CHECK(std::abs(base - (lo + wa * la + ws * ls)) < 1e-9);
    CHECK(std::abs(total_loss(lo, la, ls, {wa + step, ws}).l_total - base - step * la) < 1e-9);
    CHECK(std::abs(total_loss(lo, la, ls, {wa, ws + step}).l_total - base - step * ls) < 1e-9);
  }
}
