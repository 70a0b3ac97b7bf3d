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

// Stacked bidirectional LSTM encoder with explicit backpropagation through
// time. Sequences are stored column-major: one column per time step.

#pragma once

#include <string>
#include <vector>

#include "ellqa/model/params.hpp"

namespace ellqa::model {

namespace detail {

inline Vector sigmoid(const Vector& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

}  // namespace detail

// One LSTM direction. Gate order in the stacked weights: input, forget,
// cell, output.
struct Lstm {
  std::size_t w = 0, u = 0, b = 0;
  Eigen::Index input = 0, hidden = 0;

  struct Cache {
    Matrix x;      // input, in x T
    Matrix gates;  // activated gates, 4H x T
    Matrix c;      // cell states, H x T
    Matrix h;      // hidden states, H x T
    Matrix tanh_c;
  };

  static Lstm create(ParamStore& ps, const std::string& name, Eigen::Index input,
                     Eigen::Index hidden) {
    Lstm l;
    l.input = input;
    l.hidden = hidden;
    l.w = ps.add(name + ".W", 4 * hidden, input);
    l.u = ps.add(name + ".U", 4 * hidden, hidden);
    l.b = ps.add(name + ".b", 4 * hidden, 1);
    return l;
  }

  void init(ParamStore& ps, Rng& rng) const {
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
    fill_uniform(ps[w].value, scale, rng);
    fill_uniform(ps[u].value, scale, rng);
    ps[b].value.setZero();
    ps[b].value.block(hidden, 0, hidden, 1).setOnes();  // forget gate bias
  }

  void forward(const ParamStore& ps, const Matrix& x, Cache& cache) const {
    const Eigen::Index T = x.cols();
    const Eigen::Index H = hidden;
    cache.x = x;
    cache.gates.resize(4 * H, T);
    cache.c.resize(H, T);
    cache.h.resize(H, T);
    cache.tanh_c.resize(H, T);
    Matrix z = ps[w].value * x;
    z.colwise() += ps[b].value.col(0);
    Vector h_prev = Vector::Zero(H);
    Vector c_prev = Vector::Zero(H);
    for (Eigen::Index t = 0; t < T; ++t) {
      Vector zt = z.col(t) + ps[u].value * h_prev;
      Vector i = detail::sigmoid(zt.segment(0, H));
      Vector f = detail::sigmoid(zt.segment(H, H));
      Vector g = zt.segment(2 * H, H).array().tanh().matrix();
      Vector o = detail::sigmoid(zt.segment(3 * H, H));
      Vector c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
      Vector tc = c.array().tanh().matrix();
      cache.gates.col(t) << i, f, g, o;
      cache.c.col(t) = c;
      cache.tanh_c.col(t) = tc;
      cache.h.col(t) = o.cwiseProduct(tc);
      h_prev = cache.h.col(t);
      c_prev = c;
    }
  }

  // Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Matrix backward(ParamStore& ps, const Cache& cache, const Matrix& dh_out) const {
    const Eigen::Index T = cache.x.cols();
    const Eigen::Index H = hidden;
    Matrix dz(4 * H, T);
    Vector dh_next = Vector::Zero(H);
    Vector dc_next = Vector::Zero(H);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      const auto i = cache.gates.col(t).segment(0, H).array();
      const auto f = cache.gates.col(t).segment(H, H).array();
      const auto g = cache.gates.col(t).segment(2 * H, H).array();
      const auto o = cache.gates.col(t).segment(3 * H, H).array();
      const auto tc = cache.tanh_c.col(t).array();
      Eigen::ArrayXd dh = dh_out.col(t).array() + dh_next.array();
      Eigen::ArrayXd d_o = dh * tc;
      Eigen::ArrayXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
      Eigen::ArrayXd c_prev = t > 0 ? Eigen::ArrayXd(cache.c.col(t - 1).array())
                                    : Eigen::ArrayXd::Zero(H);
      dz.col(t).segment(0, H) = (dc * g * i * (1.0 - i)).matrix();
      dz.col(t).segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
      dz.col(t).segment(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
      dz.col(t).segment(3 * H, H) = (d_o * o * (1.0 - o)).matrix();
      dc_next = (dc * f).matrix();
      dh_next = ps[u].value.transpose() * dz.col(t);
    }
    ps[w].grad.noalias() += dz * cache.x.transpose();
    if (T > 1) {
      ps[u].grad.noalias() +=
          dz.rightCols(T - 1) * cache.h.leftCols(T - 1).transpose();
    }
    ps[b].grad.col(0) += dz.rowwise().sum();
    return ps[w].value.transpose() * dz;
  }
};

// Stacked bidirectional LSTM. The output at each position is the
// concatenation of every layer's forward and backward states, so its width
// is layers * 2 * hidden.
class BiLstmStack {
 public:
  struct Cache {
    std::vector<Lstm::Cache> fwd, bwd;
    std::vector<Matrix> dropout_masks;  // empty when dropout is off
    Matrix output;
  };

  BiLstmStack() = default;

  BiLstmStack(ParamStore& ps, const std::string& name, Eigen::Index input,
              Eigen::Index hidden, int layers) {
    for (int k = 0; k < layers; ++k) {
      const Eigen::Index in = k == 0 ? input : 2 * hidden;
      const std::string prefix = name + ".l" + std::to_string(k);
      fwd_.push_back(Lstm::create(ps, prefix + ".fwd", in, hidden));
      bwd_.push_back(Lstm::create(ps, prefix + ".bwd", in, hidden));
    }
    hidden_ = hidden;
  }

  void init(ParamStore& ps, Rng& rng) const {
    for (std::size_t k = 0; k < fwd_.size(); ++k) {
      fwd_[k].init(ps, rng);
      bwd_[k].init(ps, rng);
    }
  }

  Eigen::Index output_width() const {
    return static_cast<Eigen::Index>(fwd_.size()) * 2 * hidden_;
  }

  // dropout_rng == nullptr disables dropout.
  const Matrix& forward(const ParamStore& ps, const Matrix& x, Cache& cache,
                        double dropout, Rng* dropout_rng) const {
    const Eigen::Index T = x.cols();
    const std::size_t L = fwd_.size();
    cache.fwd.resize(L);
    cache.bwd.resize(L);
    cache.dropout_masks.clear();
    cache.output.resize(output_width(), T);
    Matrix layer_in = x;
    for (std::size_t k = 0; k < L; ++k) {
      if (dropout_rng && dropout > 0.0) {
        Matrix mask(layer_in.rows(), layer_in.cols());
        const double keep = 1.0 - dropout;
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
          for (Eigen::Index i = 0; i < mask.rows(); ++i) {
            mask(i, j) = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
          }
        }
        layer_in = layer_in.cwiseProduct(mask);
        cache.dropout_masks.push_back(std::move(mask));
      }
      fwd_[k].forward(ps, layer_in, cache.fwd[k]);
      bwd_[k].forward(ps, layer_in.rowwise().reverse(), cache.bwd[k]);
      Matrix out(2 * hidden_, T);
      out.topRows(hidden_) = cache.fwd[k].h;
      out.bottomRows(hidden_) = cache.bwd[k].h.rowwise().reverse();
      cache.output.middleRows(static_cast<Eigen::Index>(k) * 2 * hidden_,
                              2 * hidden_) = out;
      layer_in = std::move(out);
    }
    return cache.output;
  }

  Matrix backward(ParamStore& ps, const Cache& cache,
                  const Matrix& d_output) const {
    const std::size_t L = fwd_.size();
    Matrix d_next;  // gradient flowing into layer k's output from layer k+1
    for (std::size_t kk = L; kk-- > 0;) {
      Matrix d_out =
          d_output.middleRows(static_cast<Eigen::Index>(kk) * 2 * hidden_,
                              2 * hidden_);
      if (kk + 1 < L) d_out += d_next;
      Matrix d_in = fwd_[kk].backward(ps, cache.fwd[kk], d_out.topRows(hidden_));
      d_in += bwd_[kk]
                  .backward(ps, cache.bwd[kk],
                            d_out.bottomRows(hidden_).rowwise().reverse())
                  .rowwise()
                  .reverse();
      if (!cache.dropout_masks.empty()) {
        d_in = d_in.cwiseProduct(cache.dropout_masks[kk]);
      }
      d_next = d_in;
    }
    return d_next;
  }

 private:
  std::vector<Lstm> fwd_, bwd_;
  Eigen::Index hidden_ = 0;
};

}  // namespace ellqa::model
