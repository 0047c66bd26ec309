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

#ifndef MBTDNN_NN_LAYERS_H_
#define MBTDNN_NN_LAYERS_H_

// Elementwise and dense layers with explicit forward/backward passes. Each
// layer caches what its backward pass needs from the most recent forward.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {
namespace nn {

template <typename T>
class Relu {
 public:
  Matrix<T> Forward(const Matrix<T>& x) {
    out_ = x.cwiseMax(T(0));
    return out_;
  }
  Matrix<T> Backward(const Matrix<T>& d_out) const {
    CheckShape(d_out.rows() == out_.rows() && d_out.cols() == out_.cols(),
               "relu: gradient shape differs from forward output");
    return (out_.array() > T(0)).select(d_out, T(0));
  }

 private:
  Matrix<T> out_;
};

// y = W x + b over the columns of x (in_dim x batch).
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in_dim, int out_dim)
      : in_dim_(in_dim),
        out_dim_(out_dim),
        weight_(name + ".weight", {out_dim, in_dim}),
        bias_(name + ".bias", {out_dim}) {}

  void Init(std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / in_dim_);
    InitUniform(weight_, bound, rng);
    InitUniform(bias_, bound, rng);
  }

  Matrix<T> Forward(const Matrix<T>& x) {
    CheckShape(x.rows() == in_dim_, weight_.name + ": expected input of size " +
                                        std::to_string(in_dim_) + ", got " +
                                        std::to_string(x.rows()));
    in_ = x;
    Matrix<T> y = weight_.value * x;
    y.colwise() += bias_.value.col(0);
    return y;
  }

  Matrix<T> Backward(const Matrix<T>& d_out) {
    CheckShape(d_out.rows() == out_dim_ && d_out.cols() == in_.cols(),
               weight_.name + ": gradient does not match the last forward pass");
    weight_.grad.noalias() += d_out * in_.transpose();
    bias_.grad.col(0) += d_out.rowwise().sum();
    return weight_.value.transpose() * d_out;
  }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  Param<T> weight_;
  Param<T> bias_;
  Matrix<T> in_;
};

// Batch normalization over the columns of a channels x N matrix. For
// sequence activations N spans every frame of every sample in the batch.
template <typename T>
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(const std::string& name, int dim, double eps = 1e-5, double momentum = 0.1)
      : eps_(eps),
        momentum_(momentum),
        gamma_(name + ".gamma", {dim}),
        beta_(name + ".beta", {dim}),
        running_mean_(name + ".running_mean", {dim}, false),
        running_var_(name + ".running_var", {dim}, false) {
    gamma_.value.setOnes();
    running_var_.value.setOnes();
  }

  // In train mode normalizes with batch statistics and, when
  // `update_stats` is set, folds them into the running estimates (the
  // running variance uses the unbiased estimate).
  Matrix<T> Forward(const Matrix<T>& x, Mode mode, bool update_stats = true) {
    const int dim = static_cast<int>(gamma_.value.rows());
    CheckShape(x.rows() == dim, gamma_.name + ": channel count mismatch");
    mode_ = mode;
    const Eigen::Index n = x.cols();
    if (mode == Mode::kTrain) {
      if (n < 2) {
        throw Error(ErrorCode::kDegenerateBatch,
                    gamma_.name + ": train mode needs at least 2 elements per channel, got " +
                        std::to_string(n));
      }
      const Vector<T> mean = x.rowwise().mean();
      xhat_ = x.colwise() - mean;
      const Vector<T> var = xhat_.array().square().rowwise().mean();
      inv_std_ = (var.array() + T(eps_)).rsqrt();
      xhat_ = inv_std_.asDiagonal() * xhat_;
      if (update_stats) {
        const T m = T(momentum_);
        const T unbias = T(n) / T(n - 1);
        running_mean_.value.col(0) = (T(1) - m) * running_mean_.value.col(0) + m * mean;
        running_var_.value.col(0) =
            (T(1) - m) * running_var_.value.col(0) + m * unbias * var;
      }
    } else {
      inv_std_ = (running_var_.value.col(0).array() + T(eps_)).rsqrt();
      xhat_ = inv_std_.asDiagonal() * (x.colwise() - Vector<T>(running_mean_.value.col(0)));
    }
    Matrix<T> y = Vector<T>(gamma_.value.col(0)).asDiagonal() * xhat_;
    y.colwise() += beta_.value.col(0);
    return y;
  }

  Matrix<T> Backward(const Matrix<T>& d_out) {
    CheckShape(d_out.rows() == xhat_.rows() && d_out.cols() == xhat_.cols(),
               gamma_.name + ": gradient does not match the last forward pass");
    gamma_.grad.col(0) += d_out.cwiseProduct(xhat_).rowwise().sum();
    beta_.grad.col(0) += d_out.rowwise().sum();
    const Vector<T> g = gamma_.value.col(0);
    Matrix<T> d_xhat = g.asDiagonal() * d_out;
    if (mode_ == Mode::kEval) return inv_std_.asDiagonal() * d_xhat;
    const T n = T(d_out.cols());
    const Vector<T> sum_d = d_xhat.rowwise().sum();
    const Vector<T> sum_dx = d_xhat.cwiseProduct(xhat_).rowwise().sum();
    Matrix<T> d_in = d_xhat * n;
    d_in.colwise() -= sum_d;
    d_in -= sum_dx.asDiagonal() * xhat_;
    return (inv_std_ / n).asDiagonal() * d_in;
  }

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  Param<T>& running_mean() { return running_mean_; }
  Param<T>& running_var() { return running_var_; }

 private:
  double eps_ = 1e-5;
  double momentum_ = 0.1;
  Param<T> gamma_;
  Param<T> beta_;
  Param<T> running_mean_;
  Param<T> running_var_;
  Mode mode_ = Mode::kTrain;
  Matrix<T> xhat_;
  Vector<T> inv_std_;
};

// Inverted dropout: survivors are scaled by 1 / (1 - p) so eval mode is the
// identity.
template <typename T>
class Dropout {
 public:
  explicit Dropout(double p = 0.0) : p_(p) { Validate(p); }

  static void Validate(double p) {
    if (!(p >= 0.0 && p < 1.0)) {
      throw Error(ErrorCode::kInvalidRate, "dropout rate must be in [0, 1), got " +
                                               std::to_string(p));
    }
  }

  Matrix<T> Forward(const Matrix<T>& x, Mode mode, std::mt19937_64& rng) {
    if (mode == Mode::kEval || p_ == 0.0) {
      mask_.resize(0, 0);
      return x;
    }
    const T scale = T(1.0 / (1.0 - p_));
    mask_.resize(x.rows(), x.cols());
    T* m = mask_.data();
    for (Eigen::Index i = 0; i < mask_.size(); ++i) {
      // 53 random bits -> uniform in [0, 1).
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m[i] = u < p_ ? T(0) : scale;
    }
    return x.cwiseProduct(mask_);
  }

  Matrix<T> Backward(const Matrix<T>& d_out) const {
    if (mask_.size() == 0) return d_out;
    return d_out.cwiseProduct(mask_);
  }

  double rate() const { return p_; }

 private:
  double p_;
  Matrix<T> mask_;
};

// Identity on the way forward; scales the incoming gradient by -lambda on
// the way back.
template <typename T>
class GradReverse {
 public:
  explicit GradReverse(double lambda = 1.0) : lambda_(lambda) {}

  const Matrix<T>& Forward(const Matrix<T>& x) const { return x; }
  Matrix<T> Backward(const Matrix<T>& d_out) const { return d_out * T(-lambda_); }

  double lambda() const { return lambda_; }
  void set_lambda(double lambda) { lambda_ = lambda; }

 private:
  double lambda_;
};

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_LAYERS_H_
