#include <doctest.h>

#include <cmath>
#include <numbers>

#include "causalign/error.hpp"
#include "causalign/spectral.hpp"
#include "oracles.hpp"

using namespace causalign;

namespace {

double wrapped_diff(double a, double b) {
  double d = std::fmod(a - b, 2 * std::numbers::pi);
  if (d > std::numbers::pi) d -= 2 * std::numbers::pi;
  if (d < -std::numbers::pi) d += 2 * std::numbers::pi;
  return std::abs(d);
}

// Image kept inside (0.25, 0.75) so mixing never clamps.
ImageTensor mid_image(int h, int w, int c, Rng& rng) {
  ImageTensor img(h, w, c);
  for (auto& v : img.data()) v = 0.4 + 0.2 * rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("constant 2x2 image has all energy at DC") {
  const double c = 0.3;
  const Spectrum s = fft2(ImageTensor(2, 2, 1, c));
  CHECK(s.amplitude[0][0] == doctest::Approx(4 * c).epsilon(1e-12));
  for (int k = 1; k < 4; ++k) CHECK(s.amplitude[0][k] == doctest::Approx(0.0));
}

TEST_CASE("DC-only spectrum inverts to a constant image") {
  Spectrum s;
  s.height = s.width = 2;
  s.amplitude = {{4 * 0.6, 0, 0, 0}};
  s.phase = {{0, 0, 0, 0}};
  const ImageTensor img = ifft2(s);
  for (double v : img.data()) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("fft2 matches the naive DFT and obeys Parseval") {
  Rng rng(11);
  for (int h : {1, 2, 3, 5, 8, 16})
    for (int w : {1, 4, 7, 16}) {
      const ImageTensor img = oracle::random_image(h, w, 3, rng);
      const Spectrum s = fft2(img);
      for (int ch = 0; ch < 3; ++ch) {
        const auto ref = oracle::naive_dft(img, ch);
        double energy = 0, spectral = 0;
        for (int k = 0; k < h * w; ++k) {
          CHECK(std::abs(s.coefficient(ch, k / w, k % w) - ref[k]) < 1e-9);
          spectral += s.amplitude[ch][k] * s.amplitude[ch][k];
        }
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) energy += img.at(y, x, ch) * img.at(y, x, ch);
        CHECK(std::abs(energy - spectral / (h * w)) <= 1e-6 * energy);
      }
    }
}

TEST_CASE("round trip and Hermitian symmetry") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(16)), w = 1 + static_cast<int>(rng.below(16));
    const ImageTensor img = oracle::random_image(h, w, 3, rng);
    const Spectrum s = fft2(img);
    double max_imag = 1.0;
    const auto planes = ifft2_planes(s, &max_imag);
    CHECK(max_imag < 1e-9);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          CHECK(std::abs(planes[ch][y * w + x] - img.at(y, x, ch)) < 1e-9);
          const auto a = s.coefficient(ch, y, x);
          const auto b = s.coefficient(ch, (h - y) % h, (w - x) % w);
          CHECK(std::abs(a - std::conj(b)) < 1e-9);
        }
  }
}

TEST_CASE("spectrum validation") {
  Spectrum s;
  s.height = 2;
  s.width = 2;
  s.amplitude = {{1, 0, 0, 0}};
  s.phase = {{0, 0, 0}};
  CHECK_THROWS_AS(ifft2(s), ValidationError);
  ImageTensor bad(2, 2, 1, 0.5);
  bad.at(0, 0, 0) = std::nan("");
  CHECK_THROWS_AS(fft2(bad), ValidationError);
}

TEST_CASE("mix_amplitude") {
  const std::vector<double> a{2.0, 0.0, 1.0}, b{4.0, 1.0, 1.0};
  CHECK(mix_amplitude(a, b, MixRatio::exact(0.0)) == a);
  CHECK(mix_amplitude(a, b, MixRatio::exact(1.0)) == b);
  CHECK(mix_amplitude(a, b, MixRatio::exact(0.5))[0] == 3.0);
  CHECK_THROWS_AS(mix_amplitude(a, std::vector<double>{1.0}, MixRatio::exact(0.5)), ValidationError);
  CHECK_THROWS_AS(MixRatio(0.6, 0.5), ValidationError);
  CHECK_THROWS_AS(MixRatio(-0.1, 0.5), ValidationError);

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(9), y(9);
    for (auto& v : x) v = 3 * rng.uniform();
    for (auto& v : y) v = 3 * rng.uniform();
    const auto m = mix_amplitude(x, y, MixRatio::exact(rng.uniform()));
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(m[i] >= std::min(x[i], y[i]) - 1e-15);
      CHECK(m[i] <= std::max(x[i], y[i]) + 1e-15);
    }
  }
}

TEST_CASE("augment keeps the source phase") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageTensor src = oracle::random_image(8, 8, 3, rng);
    const ImageTensor style = oracle::random_image(8, 8, 3, rng);
    const AugmentResult r = augment_with_ratio(src, style, MixRatio::exact(0.5));
    // Phase of the unclamped reconstruction, recomputed independently.
    const Spectrum s_src = fft2(src), s_style = fft2(style);
    for (int ch = 0; ch < 3; ++ch) {
      const auto out = oracle::naive_dft(r.unclamped, 8, 8, 3, ch);
      for (int k = 0; k < 64; ++k) {
        const double mixed = 0.5 * s_src.amplitude[ch][k] + 0.5 * s_style.amplitude[ch][k];
        CHECK(std::abs(std::abs(out[k]) - mixed) < 1e-9);
        if (mixed > 1e-8)
          CHECK(wrapped_diff(std::arg(out[k]), s_src.phase[ch][k]) < 1e-5);
      }
    }
  }
}

TEST_CASE("augment identity cases") {
  Rng rng(9);
  const ImageTensor src = oracle::random_image(8, 8, 3, rng);
  const ImageTensor style = oracle::random_image(8, 8, 3, rng);
  Rng r0(1);
  const AugmentResult zero = augment(src, style, 0.0, r0);
  CHECK(zero.beta == 0.0);
  for (std::size_t i = 0; i < src.data().size(); ++i) CHECK(std::abs(zero.image.data()[i] - src.data()[i]) < 1e-6);
  for (double beta : {0.1, 0.5, 1.0}) {
    const AugmentResult same = augment_with_ratio(src, src, MixRatio::exact(beta));
    for (std::size_t i = 0; i < src.data().size(); ++i)
      CHECK(std::abs(same.image.data()[i] - src.data()[i]) < 1e-6);
  }
}

TEST_CASE("augment samples beta in [0, alpha] and validates") {
  Rng rng(2);
  const ImageTensor a = mid_image(4, 4, 3, rng), b = mid_image(4, 4, 3, rng);
  for (int t = 0; t < 200; ++t) {
    const AugmentResult r = augment(a, b, 0.5, rng);
    CHECK(r.beta >= 0.0);
    CHECK(r.beta <= 0.5);
    CHECK(r.clamped_pixels == 0);
  }
  CHECK_THROWS_AS(augment(a, mid_image(4, 5, 3, rng), 0.5, rng), ValidationError);
  CHECK_THROWS_AS(augment(a, b, 1.5, rng), ValidationError);
  CHECK_THROWS_AS(augment(a, b, -0.1, rng), ValidationError);
}

TEST_CASE("augment_clip shares one beta and is reproducible") {
  Rng rng(4);
  Clip frames, style;
  for (int i = 0; i < 3; ++i) {
    frames.push_back(mid_image(8, 8, 3, rng));
    style.push_back(mid_image(8, 8, 3, rng));
  }
  Rng r1(42), r2(42);
  const ClipAugmentResult x = augment_clip(frames, style, 0.5, r1);
  const ClipAugmentResult y = augment_clip(frames, style, 0.5, r2);
  CHECK(x.beta == y.beta);
  for (int i = 0; i < 3; ++i) {
    CHECK(oracle::pixels(x.frames[i]) == oracle::pixels(y.frames[i]));
    const AugmentResult single = augment_with_ratio(frames[i], style[i], MixRatio(x.beta, 0.5));
    CHECK(oracle::pixels(single.image) == oracle::pixels(x.frames[i]));
  }

  Rng r3(42), r4(42);
  const ClipAugmentResult one = augment_clip({frames[0]}, {style[0]}, 0.5, r3);
  const AugmentResult direct = augment(frames[0], style[0], 0.5, r4);
  CHECK(one.beta == direct.beta);
  CHECK(oracle::pixels(one.frames[0]) == oracle::pixels(direct.image));

  Rng r5(8);
  const ClipAugmentResult none = augment_clip(frames, style, 0.0, r5);
  for (int i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < frames[i].data().size(); ++k)
      CHECK(std::abs(none.frames[i].data()[k] - frames[i].data()[k]) < 1e-6);

  CHECK_THROWS_AS(augment_clip(frames, {style[0]}, 0.5, r5), ValidationError);
}
