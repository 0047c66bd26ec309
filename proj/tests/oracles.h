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

// Reference implementations used only by the tests. They follow the textbook
// definitions directly and share no code with the library.

#ifndef MBTDNN_TESTS_ORACLES_H_
#define MBTDNN_TESTS_ORACLES_H_

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mbtdnn {
namespace oracle {

constexpr double kPi = 3.14159265358979323846;

inline std::vector<float> Sine(double hz, int sample_rate, int n, double amplitude = 0.5) {
  std::vector<float> s(n);
  for (int i = 0; i < n; ++i) {
    s[i] = static_cast<float>(amplitude * std::sin(2.0 * kPi * hz * i / sample_rate));
  }
  return s;
}

inline double Mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double InvMel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// n_mels x frames energies: Hamming window, O(N^2) DFT of the zero-padded
// frame, triangular filters whose edges are evenly spaced on the mel scale
// from 0 Hz to Nyquist.
inline Eigen::MatrixXd MelEnergies(const std::vector<float>& x, int sample_rate, int window,
                                   int hop, int n_fft, int n_mels) {
  const int frames = static_cast<int>((x.size() - window) / hop + 1);
  std::vector<double> centers(n_mels + 2);
  const double top = Mel(sample_rate / 2.0);
  for (int i = 0; i < n_mels + 2; ++i) centers[i] = InvMel(top * i / (n_mels + 1));
  Eigen::MatrixXd out(n_mels, frames);
  std::vector<double> frame(n_fft);
  for (int t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int i = 0; i < window; ++i) {
      const double w = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (window - 1));
      frame[i] = w * x[t * hop + i];
    }
    std::vector<double> power(n_fft / 2 + 1);
    for (int k = 0; k <= n_fft / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (int n = 0; n < n_fft; ++n) {
        acc += frame[n] * std::polar(1.0, -2.0 * kPi * k * n / n_fft);
      }
      power[k] = std::norm(acc);
    }
    for (int m = 0; m < n_mels; ++m) {
      double e = 0.0;
      for (int k = 0; k <= n_fft / 2; ++k) {
        const double f = static_cast<double>(k) * sample_rate / n_fft;
        const double up = (f - centers[m]) / (centers[m + 1] - centers[m]);
        const double down = (centers[m + 2] - f) / (centers[m + 2] - centers[m + 1]);
        e += std::max(0.0, std::min(up, down)) * power[k];
      }
      out(m, t) = e;
    }
  }
  return out;
}

// Orthonormal DCT-II of the clamped log energies, first n_mfcc rows.
inline Eigen::MatrixXd Cepstra(const Eigen::MatrixXd& mel, int n_mfcc, double floor) {
  const int m = static_cast<int>(mel.rows());
  Eigen::MatrixXd out(n_mfcc, mel.cols());
  for (Eigen::Index t = 0; t < mel.cols(); ++t) {
    for (int j = 0; j < n_mfcc; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += std::log(std::max(mel(i, t), floor)) * std::cos(kPi * j * (2 * i + 1) / (2.0 * m));
      }
      out(j, t) = acc * std::sqrt((j == 0 ? 1.0 : 2.0) / m);
    }
  }
  return out;
}

// Closed-form ridge regression onto one-hot targets; returns the accuracy of
// the argmax rule on the test columns.
inline double RidgeAccuracy(const Eigen::MatrixXd& x_train, const std::vector<int>& y_train,
                            const Eigen::MatrixXd& x_test, const std::vector<int>& y_test,
                            int n_classes, double ridge = 1e-3) {
  const Eigen::Index d = x_train.rows();
  Eigen::MatrixXd xa(d + 1, x_train.cols());
  xa << x_train, Eigen::RowVectorXd::Ones(x_train.cols());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_classes, x_train.cols());
  for (size_t j = 0; j < y_train.size(); ++j) y(y_train[j], j) = 1.0;
  Eigen::MatrixXd gram = xa * xa.transpose();
  gram.diagonal().array() += ridge;
  const Eigen::MatrixXd w = gram.ldlt().solve(xa * y.transpose()).transpose();
  int correct = 0;
  for (Eigen::Index j = 0; j < x_test.cols(); ++j) {
    Eigen::VectorXd xj(d + 1);
    xj << x_test.col(j), 1.0;
    Eigen::Index best;
    (w * xj).maxCoeff(&best);
    if (best == y_test[j]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x_test.cols());
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mbtdnn_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
}  // namespace mbtdnn

#endif  // MBTDNN_TESTS_ORACLES_H_
