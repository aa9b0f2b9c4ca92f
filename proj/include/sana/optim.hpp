/*
 * Copyright 2026 The SANA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <vector>

#include "sana/autograd.hpp"

namespace sana::nn {

/// Linear warmup to `peak` over `warmup` steps, then peak * sqrt(warmup / step).
struct InverseSqrtSchedule {
  double peak = 5e-4;
  long warmup = 10000;

  double operator()(long step) const {
    if (step <= 0) return 0.0;
    if (step <= warmup) return peak * static_cast<double>(step) / static_cast<double>(warmup);
    return peak * std::sqrt(static_cast<double>(warmup) / static_cast<double>(step));
  }
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

struct OptimizerState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  long step = 0;
  InverseSqrtSchedule schedule;
};

class Adam {
 public:
  Adam(ParameterStore& store, InverseSqrtSchedule schedule, AdamOptions options = {})
      : store_(store), options_(options) {
    state_.schedule = schedule;
    for (const auto& p : store_) {
      state_.first.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      state_.second.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }

  /// One update from the accumulated gradients, which are then zeroed.
  void step() {
    if (state_.first.size() != store_.size()) throw Error("optimizer state does not match the parameter store");
    ++state_.step;
    const double lr = state_.schedule(state_.step);
    const double t = static_cast<double>(state_.step);
    const double c1 = 1.0 - std::pow(options_.beta1, t);
    const double c2 = 1.0 - std::pow(options_.beta2, t);
    for (std::size_t i = 0; i < store_.size(); ++i) {
      Parameter& p = store_[i];
      Matrix& m = state_.first[i];
      Matrix& v = state_.second[i];
      m = options_.beta1 * m + (1.0 - options_.beta1) * p.grad;
      v = options_.beta2 * v + (1.0 - options_.beta2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.eps);
      p.grad.setZero();
    }
  }

  double learning_rate() const { return state_.schedule(state_.step); }
  const OptimizerState& state() const { return state_; }
  OptimizerState& state() { return state_; }

 private:
  ParameterStore& store_;
  AdamOptions options_;
  OptimizerState state_;
};

}  // namespace sana::nn
