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

#ifndef MBTDNN_DSP_WAV_H_
#define MBTDNN_DSP_WAV_H_

#include <string>
#include <vector>

namespace mbtdnn {

// Mono audio with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;

  // Throws InvalidConfig when the clip is empty or the rate is not positive.
  void Validate() const;
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float
// samples (plain or WAVE_FORMAT_EXTENSIBLE). Throws Error(kIo) otherwise.
AudioClip ReadWav(const std::string& path);

// Writes 16-bit PCM; samples are clamped to [-1, 1].
void WriteWav(const std::string& path, const AudioClip& clip);

// Returns the samples in [start_ms, stop_ms). A negative stop means "to the
// end of the clip".
AudioClip SliceClip(const AudioClip& clip, double start_ms, double stop_ms);

}  // namespace mbtdnn

#endif  // MBTDNN_DSP_WAV_H_
