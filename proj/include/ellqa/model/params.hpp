// Copyright 2026 The ellqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "ellqa/corpus.hpp"
#include "ellqa/rng.hpp"

namespace ellqa::model {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Named dense parameter tensors with matching gradient buffers.
class ParamStore {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    params_.push_back({std::move(name), Matrix::Zero(rows, cols),
                       Matrix::Zero(rows, cols)});
    return params_.size() - 1;
  }

  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return i;
    }
    throw Error("unknown parameter " + name);
  }

  void zero_grad() {
    for (Param& p : params_) p.grad.setZero();
  }

  void scale_grad(double factor) {
    for (Param& p : params_) p.grad *= factor;
  }

  double grad_norm() const {
    double sq = 0.0;
    for (const Param& p : params_) sq += p.grad.squaredNorm();
    return std::sqrt(sq);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Param& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

 private:
  std::vector<Param> params_;
};

inline void fill_uniform(Matrix& m, double scale, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform(-scale, scale);
    }
  }
}

struct AdamSettings {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const ParamStore& params, AdamSettings settings) : s_(settings) {
    for (const Param& p : params) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }

  void step(ParamStore& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Param& p = params[k];
      m_[k] = s_.beta1 * m_[k] + (1.0 - s_.beta1) * p.grad;
      v_[k] = s_.beta2 * v_[k] + (1.0 - s_.beta2) * p.grad.cwiseAbs2();
      p.value.array() -= s_.learning_rate * (m_[k].array() / c1) /
                         ((v_[k].array() / c2).sqrt() + s_.epsilon);
    }
  }

 private:
  AdamSettings s_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace ellqa::model
