#include "causalign/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "causalign/error.hpp"

namespace causalign {

namespace {

// FFTW's planner is not thread-safe; plans are created once under a lock and
// executed on fresh aligned buffers (fftw_execute_dft is reentrant).
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int height, int width, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(height, width, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(height) * width;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_2d(height, width, in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

ComplexBuffer alloc_buffer(std::size_t n) {
  auto* p = fftw_alloc_complex(n);
  if (p == nullptr) throw std::bad_alloc();
  return ComplexBuffer(p);
}

double canonical_phase(double p) { return p <= -std::numbers::pi ? std::numbers::pi : p; }

using ComplexPlane = std::vector<std::complex<double>>;

// Per-channel forward DFT of an interleaved image.
std::vector<ComplexPlane> forward_complex(const ImageTensor& image) {
  const std::size_t n = static_cast<std::size_t>(image.height()) * image.width();
  const int channels = image.channels();
  fftw_plan plan = PlanCache::instance().get(image.height(), image.width(), FFTW_FORWARD);
  auto in = alloc_buffer(n);
  auto out = alloc_buffer(n);
  const auto pixels = image.data();
  std::vector<ComplexPlane> planes(channels, ComplexPlane(n));
  for (int c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      in[k][0] = pixels[k * channels + c];
      in[k][1] = 0.0;
    }
    fftw_execute_dft(plan, in.get(), out.get());
    for (std::size_t k = 0; k < n; ++k) planes[c][k] = {out[k][0], out[k][1]};
  }
  return planes;
}

// Real parts of the normalized inverse DFT; tracks the largest imaginary residue.
std::vector<std::vector<double>> inverse_real(const std::vector<ComplexPlane>& planes, int height, int width,
                                              double* max_imag) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  fftw_plan plan = PlanCache::instance().get(height, width, FFTW_BACKWARD);
  auto in = alloc_buffer(n);
  auto out = alloc_buffer(n);
  double worst_imag = 0.0;
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> real(planes.size(), std::vector<double>(n));
  for (std::size_t c = 0; c < planes.size(); ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      in[k][0] = planes[c][k].real();
      in[k][1] = planes[c][k].imag();
    }
    fftw_execute_dft(plan, in.get(), out.get());
    for (std::size_t k = 0; k < n; ++k) {
      real[c][k] = out[k][0] * scale;
      worst_imag = std::max(worst_imag, std::abs(out[k][1] * scale));
    }
  }
  if (max_imag != nullptr) *max_imag = worst_imag;
  return real;
}

}  // namespace

std::complex<double> Spectrum::coefficient(int channel, int y, int x) const {
  const std::size_t k = static_cast<std::size_t>(y) * width + x;
  return std::polar(amplitude[channel][k], phase[channel][k]);
}

void Spectrum::validate() const {
  require(height >= 1 && width >= 1, "spectrum dimensions must be positive");
  require(!amplitude.empty(), "spectrum has no channels");
  require(amplitude.size() == phase.size(), "amplitude and phase channel counts differ");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  for (std::size_t c = 0; c < amplitude.size(); ++c) {
    require(amplitude[c].size() == n && phase[c].size() == n,
            "amplitude/phase plane shape mismatch in channel " + std::to_string(c));
    for (std::size_t k = 0; k < n; ++k) {
      require(std::isfinite(amplitude[c][k]) && amplitude[c][k] >= 0.0,
              "amplitude must be finite and non-negative");
      require(std::isfinite(phase[c][k]) && std::abs(phase[c][k]) <= std::numbers::pi + 1e-12,
              "phase must be finite and within (-pi, pi]");
    }
  }
}

MixRatio::MixRatio(double beta, double alpha) : beta_(beta), alpha_(alpha) {
  require(std::isfinite(beta) && std::isfinite(alpha), "mix ratio must be finite");
  require(0.0 <= beta && beta <= alpha && alpha <= 1.0,
          "mix ratio requires 0 <= beta <= alpha <= 1 (beta=" + std::to_string(beta) +
              ", alpha=" + std::to_string(alpha) + ")");
}

Spectrum fft2(const ImageTensor& image) {
  const int h = image.height();
  const int w = image.width();
  const int channels = image.channels();
  require(h >= 1 && w >= 1 && channels >= 1, "fft2 of an empty image");
  for (double v : image.data()) require(std::isfinite(v), "fft2 input contains non-finite values");

  const std::size_t n = static_cast<std::size_t>(h) * w;
  const auto planes = forward_complex(image);
  Spectrum spec;
  spec.height = h;
  spec.width = w;
  spec.amplitude.assign(channels, std::vector<double>(n));
  spec.phase.assign(channels, std::vector<double>(n));
  for (int c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      spec.amplitude[c][k] = std::abs(planes[c][k]);
      spec.phase[c][k] = canonical_phase(std::arg(planes[c][k]));
    }
  }
  return spec;
}

std::vector<std::vector<double>> ifft2_planes(const Spectrum& spectrum, double* max_imag) {
  spectrum.validate();
  const std::size_t n = static_cast<std::size_t>(spectrum.height) * spectrum.width;
  std::vector<ComplexPlane> planes(spectrum.channels(), ComplexPlane(n));
  for (int c = 0; c < spectrum.channels(); ++c)
    for (std::size_t k = 0; k < n; ++k) planes[c][k] = std::polar(spectrum.amplitude[c][k], spectrum.phase[c][k]);
  return inverse_real(planes, spectrum.height, spectrum.width, max_imag);
}

ImageTensor ifft2(const Spectrum& spectrum) {
  const auto planes = ifft2_planes(spectrum);
  const int channels = spectrum.channels();
  const std::size_t n = static_cast<std::size_t>(spectrum.height) * spectrum.width;
  std::vector<double> data(n * channels);
  for (int c = 0; c < channels; ++c)
    for (std::size_t k = 0; k < n; ++k) data[k * channels + c] = std::clamp(planes[c][k], 0.0, 1.0);
  return ImageTensor(spectrum.height, spectrum.width, channels, std::move(data));
}

std::vector<double> mix_amplitude(std::span<const double> a_src, std::span<const double> a_style,
                                  MixRatio ratio) {
  require(a_src.size() == a_style.size(), "amplitude arrays differ in shape (" + std::to_string(a_src.size()) +
                                              " vs " + std::to_string(a_style.size()) + ")");
  const double beta = ratio.beta();
  std::vector<double> mixed(a_src.size());
  for (std::size_t i = 0; i < a_src.size(); ++i) {
    // Exact endpoints: beta = 0 and beta = 1 return an input bit-for-bit.
    if (beta == 0.0)
      mixed[i] = a_src[i];
    else if (beta == 1.0)
      mixed[i] = a_style[i];
    else
      mixed[i] = (1.0 - beta) * a_src[i] + beta * a_style[i];
  }
  return mixed;
}

AugmentResult augment_with_ratio(const ImageTensor& source, const ImageTensor& style, MixRatio ratio) {
  require(source.same_shape(style), "source and style images differ in shape");
  source.validate();
  style.validate();

  // Rescaling each source coefficient to the mixed modulus keeps its argument
  // exactly; zero coefficients take phase 0, as std::arg(0) would give.
  const auto src = forward_complex(source);
  const auto sty = forward_complex(style);
  std::vector<ComplexPlane> mixed = src;
  std::vector<double> a_src, a_sty;
  for (std::size_t c = 0; c < src.size(); ++c) {
    a_src.resize(src[c].size());
    a_sty.resize(src[c].size());
    for (std::size_t k = 0; k < src[c].size(); ++k) {
      a_src[k] = std::abs(src[c][k]);
      a_sty[k] = std::abs(sty[c][k]);
    }
    const auto a_mix = mix_amplitude(a_src, a_sty, ratio);
    for (std::size_t k = 0; k < src[c].size(); ++k)
      mixed[c][k] = a_src[k] > 0.0 ? src[c][k] * (a_mix[k] / a_src[k]) : std::complex<double>(a_mix[k], 0.0);
  }
  const auto planes = inverse_real(mixed, source.height(), source.width(), nullptr);
  const int channels = source.channels();
  const std::size_t n = static_cast<std::size_t>(source.height()) * source.width();
  AugmentResult result;
  result.beta = ratio.beta();
  result.unclamped.resize(n * channels);
  std::vector<double> data(n * channels);
  for (int c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = planes[c][k];
      result.unclamped[k * channels + c] = v;
      const double clamped = std::clamp(v, 0.0, 1.0);
      if (clamped != v) ++result.clamped_pixels;
      data[k * channels + c] = clamped;
    }
  }
  result.image = ImageTensor(source.height(), source.width(), channels, std::move(data));
  return result;
}

AugmentResult augment(const ImageTensor& source, const ImageTensor& style, double alpha, Rng& rng) {
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(source.same_shape(style), "source and style images differ in shape");
  const double beta = alpha * rng.uniform();
  return augment_with_ratio(source, style, MixRatio(beta, alpha));
}

ClipAugmentResult augment_clip(const Clip& frames, const Clip& style_frames, double alpha, Rng& rng) {
  require(frames.size() == style_frames.size(),
          "clip and style clip differ in length (" + std::to_string(frames.size()) + " vs " +
              std::to_string(style_frames.size()) + ")");
  require(!frames.empty(), "cannot augment an empty clip");
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  for (std::size_t i = 0; i < frames.size(); ++i)
    require(frames[i].same_shape(frames.front()) && style_frames[i].same_shape(frames.front()),
            "clip frames differ in shape at frame " + std::to_string(i));

  ClipAugmentResult result;
  result.beta = alpha * rng.uniform();
  const MixRatio ratio(result.beta, alpha);
  result.frames.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    result.frames.push_back(augment_with_ratio(frames[i], style_frames[i], ratio).image);
  return result;
}

}  // namespace causalign
