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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sana/autograd.hpp"

namespace sana::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t max_coords_per_param = 24;  // sampled when a parameter is larger
  double floor = 1e-6;                    // denominator floor for near-zero gradients
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t coords_checked = 0;
};

/// Compares the tape's gradient of `loss_fn` with central differences over
/// every parameter in `store` (coordinates sampled per parameter).
/// relative error = |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline GradCheckResult finite_difference_check(ParameterStore& store, const std::function<Var(Graph&)>& loss_fn,
                                               GradCheckOptions opt = {}) {
  GradCheckResult result;
  store.zero_grad();
  {
    Graph g;
    Var loss = loss_fn(g);
    g.backward(loss);
  }
  auto eval = [&] {
    Graph g(false);
    return loss_fn(g).scalar();
  };
  Rng rng(opt.seed);
  for (auto& p : store) {
    const auto n = static_cast<std::size_t>(p.value.size());
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    if (n > opt.max_coords_per_param) {
      rng.shuffle(coords);
      coords.resize(opt.max_coords_per_param);
    }
    for (std::size_t c : coords) {
      double& x = p.value.data()[c];
      const double saved = x;
      x = saved + opt.epsilon;
      const double up = eval();
      x = saved - opt.epsilon;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2.0 * opt.epsilon);
      const double analytic = p.grad.data()[c];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), opt.floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++result.coords_checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = p.name;
      }
    }
  }
  store.zero_grad();
  return result;
}

}  // namespace sana::nn
