// Copyright 2026 The mbtdnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mbtdnn/dsp/mfcc.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "mbtdnn/error.h"

namespace mbtdnn {
namespace {

// The FFTW planner is not thread-safe; plan execution is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

// Owns the buffers and the r2c plan for one transform size.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(PlannerMutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Zero-pads `frame` to the transform size and writes |X_k|^2, k = 0..n/2.
  void PowerSpectrum(const double* frame, int len, double* power) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(frame, frame + len, in_);
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int MfccConfig::WindowSamples(int sample_rate) const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}

int MfccConfig::HopSamples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

int MfccConfig::FftSize(int sample_rate) const {
  if (fft_size > 0) return fft_size;
  int n = 1;
  while (n < WindowSamples(sample_rate)) n <<= 1;
  return n;
}

void MfccConfig::Validate(int sample_rate) const {
  if (n_mfcc <= 0 || n_mels <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "n_mfcc and n_mels must be positive");
  }
  if (n_mfcc > n_mels) {
    throw Error(ErrorCode::kInvalidConfig, "n_mfcc (" + std::to_string(n_mfcc) +
                                               ") exceeds n_mels (" +
                                               std::to_string(n_mels) + ")");
  }
  if (sample_rate <= 0) throw Error(ErrorCode::kInvalidConfig, "sample rate must be positive");
  const int window = WindowSamples(sample_rate);
  if (window < 2 || HopSamples(sample_rate) < 1) {
    throw Error(ErrorCode::kInvalidConfig, "window/hop too small for the sample rate");
  }
  const int n_fft = FftSize(sample_rate);
  if (!IsPowerOfTwo(n_fft)) {
    throw Error(ErrorCode::kInvalidConfig, "fft_size must be a power of two");
  }
  if (n_fft < window) {
    throw Error(ErrorCode::kInvalidConfig, "fft_size is shorter than the window");
  }
  if (!(log_floor > 0.0)) throw Error(ErrorCode::kInvalidConfig, "log_floor must be positive");
}

int NumFrames(int num_samples, int window, int hop) {
  if (num_samples < window) return 0;
  return (num_samples - window) / hop + 1;
}

Eigen::MatrixXd FrameSignal(const AudioClip& clip, const MfccConfig& cfg) {
  clip.Validate();
  cfg.Validate(clip.sample_rate);
  const int n = static_cast<int>(clip.samples.size());
  const int window = cfg.WindowSamples(clip.sample_rate);
  const int hop = cfg.HopSamples(clip.sample_rate);
  if (n < window) {
    throw Error(ErrorCode::kClipTooShort, "clip has " + std::to_string(n) +
                                              " samples, window needs " +
                                              std::to_string(window));
  }
  Eigen::VectorXd hamming(window);
  for (int i = 0; i < window; ++i) {
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window - 1));
  }
  const int frames = NumFrames(n, window, hop);
  Eigen::MatrixXd out(window, frames);
  for (int t = 0; t < frames; ++t) {
    for (int i = 0; i < window; ++i) {
      out(i, t) = hamming[i] * static_cast<double>(clip.samples[t * hop + i]);
    }
  }
  return out;
}

Eigen::MatrixXd MelFilterbank(int n_mels, int fft_size, int sample_rate) {
  const int n_bins = fft_size / 2 + 1;
  const double mel_max = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_max * i / (n_mels + 1));
  }
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int j = 0; j < n_mels; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      if (f > lo && f <= mid) {
        bank(j, k) = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        bank(j, k) = (hi - f) / (hi - mid);
      }
    }
  }
  return bank;
}

Eigen::MatrixXd MelEnergies(const AudioClip& clip, const MfccConfig& cfg) {
  const Eigen::MatrixXd frames = FrameSignal(clip, cfg);
  const int n_fft = cfg.FftSize(clip.sample_rate);
  const Eigen::MatrixXd bank = MelFilterbank(cfg.n_mels, n_fft, clip.sample_rate);
  RealFft fft(n_fft);
  Eigen::MatrixXd power(n_fft / 2 + 1, frames.cols());
  for (Eigen::Index t = 0; t < frames.cols(); ++t) {
    fft.PowerSpectrum(frames.col(t).data(), static_cast<int>(frames.rows()),
                      power.col(t).data());
  }
  return bank * power;
}

FeatureMatrix ComputeMfcc(const AudioClip& clip, const MfccConfig& cfg) {
  const Eigen::MatrixXd mel = MelEnergies(clip, cfg);
  const int m = cfg.n_mels;
  Eigen::MatrixXd dct(cfg.n_mfcc, m);
  for (int j = 0; j < cfg.n_mfcc; ++j) {
    const double scale = std::sqrt(2.0 / m) * (j == 0 ? 1.0 / std::sqrt(2.0) : 1.0);
    for (int i = 0; i < m; ++i) {
      dct(j, i) = scale * std::cos(std::numbers::pi * j * (i + 0.5) / m);
    }
  }
  const Eigen::MatrixXd log_mel =
      mel.unaryExpr([&](double e) { return std::log(std::max(e, cfg.log_floor)); });
  FeatureMatrix out;
  out.coeffs = (dct * log_mel).cast<float>();
  return out;
}

FeatureMatrix CepstralMeanNormalize(const FeatureMatrix& m) {
  FeatureMatrix out;
  // Accumulate in double so that a second pass sees row means of exactly
  // (or nearly) zero.
  Eigen::MatrixXd x = m.coeffs.cast<double>();
  Eigen::VectorXd mean = x.rowwise().mean();
  x.colwise() -= mean;
  out.coeffs = x.cast<float>();
  return out;
}

FeatureMatrix ExtractFeatures(const AudioClip& clip, const MfccConfig& cfg) {
  return CepstralMeanNormalize(ComputeMfcc(clip, cfg));
}

}  // namespace mbtdnn
