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

#ifndef MBTDNN_DSP_MFCC_H_
#define MBTDNN_DSP_MFCC_H_

#include <Eigen/Core>

#include "mbtdnn/dsp/feature_matrix.h"
#include "mbtdnn/dsp/wav.h"

namespace mbtdnn {

// Front-end settings. Window and hop are given in milliseconds and converted
// with the clip's own sample rate, so any rate is accepted.
struct MfccConfig {
  int n_mfcc = 20;
  double window_ms = 20.0;
  double hop_ms = 10.0;
  int n_mels = 40;
  // 0 selects the smallest power of two holding one window.
  int fft_size = 0;
  double log_floor = 1e-10;

  int WindowSamples(int sample_rate) const;
  int HopSamples(int sample_rate) const;
  int FftSize(int sample_rate) const;
  // Throws InvalidConfig on n_mfcc > n_mels, a non power-of-two FFT size, an
  // FFT shorter than the window, or non-positive sizes.
  void Validate(int sample_rate) const;
};

// floor((n - window) / hop) + 1, or 0 when n < window.
int NumFrames(int num_samples, int window, int hop);

// Hamming-windowed frames, one per column (window x T).
// Throws ClipTooShort when the clip is shorter than one window.
Eigen::MatrixXd FrameSignal(const AudioClip& clip, const MfccConfig& cfg);

// Triangular filters on the HTK mel scale spanning 0 Hz to Nyquist;
// n_mels x (fft_size / 2 + 1).
Eigen::MatrixXd MelFilterbank(int n_mels, int fft_size, int sample_rate);

// Linear (pre-log) mel filterbank energies, n_mels x T.
Eigen::MatrixXd MelEnergies(const AudioClip& clip, const MfccConfig& cfg);

// Orthonormal DCT-II of the floored log mel energies, truncated to n_mfcc.
FeatureMatrix ComputeMfcc(const AudioClip& clip, const MfccConfig& cfg);

// Subtracts each coefficient's mean over frames.
FeatureMatrix CepstralMeanNormalize(const FeatureMatrix& m);

// ComputeMfcc followed by CepstralMeanNormalize: the model input.
FeatureMatrix ExtractFeatures(const AudioClip& clip, const MfccConfig& cfg);

double HzToMel(double hz);
double MelToHz(double mel);

}  // namespace mbtdnn

#endif  // MBTDNN_DSP_MFCC_H_
