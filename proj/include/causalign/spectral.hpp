#pragma once

#include <complex>
#include <span>
#include <vector>

#include "causalign/image.hpp"
#include "causalign/random.hpp"

namespace causalign {

/// Per-channel 2D DFT split into modulus and argument planes.
/// Planes are row-major H x W with the DC term at (0, 0); no centering shift.
struct Spectrum {
  int height = 0;
  int width = 0;
  std::vector<std::vector<double>> amplitude;  // [channel][y * width + x], >= 0
  std::vector<std::vector<double>> phase;      // [channel][y * width + x], in (-pi, pi]

  int channels() const { return static_cast<int>(amplitude.size()); }
  std::complex<double> coefficient(int channel, int y, int x) const;
  void validate() const;
};

/// Convex mixing weight. Invariant: 0 <= beta <= alpha <= 1.
class MixRatio {
 public:
  MixRatio(double beta, double alpha);
  static MixRatio exact(double beta) { return MixRatio(beta, beta); }

  double beta() const { return beta_; }
  double alpha() const { return alpha_; }

 private:
  double beta_;
  double alpha_;
};

Spectrum fft2(const ImageTensor& image);

/// Inverse transform without clamping. `max_imag` receives the largest
/// discarded imaginary magnitude when non-null.
std::vector<std::vector<double>> ifft2_planes(const Spectrum& spectrum, double* max_imag = nullptr);

/// Inverse transform; discards the imaginary residue and clamps to [0, 1].
ImageTensor ifft2(const Spectrum& spectrum);

/// (1 - beta) * a_src + beta * a_style, elementwise over the whole spectrum.
std::vector<double> mix_amplitude(std::span<const double> a_src, std::span<const double> a_style,
                                  MixRatio ratio);

struct AugmentResult {
  ImageTensor image;
  double beta = 0.0;
  /// Reconstruction before clamping, interleaved like ImageTensor data.
  std::vector<double> unclamped;
  std::size_t clamped_pixels = 0;
};

/// Source phase combined with amplitude mixed toward `style`, for a fixed ratio.
AugmentResult augment_with_ratio(const ImageTensor& source, const ImageTensor& style, MixRatio ratio);

/// Samples beta ~ U(0, alpha) from `rng`, then mixes as above.
AugmentResult augment(const ImageTensor& source, const ImageTensor& style, double alpha, Rng& rng);

struct ClipAugmentResult {
  Clip frames;
  double beta = 0.0;
};

/// One beta per clip; frame i is mixed against style frame i.
ClipAugmentResult augment_clip(const Clip& frames, const Clip& style_frames, double alpha, Rng& rng);

}  // namespace causalign
