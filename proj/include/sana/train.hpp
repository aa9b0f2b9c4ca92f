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

// Training loops for both stages and the end-to-end generation helper.
// Per-example randomness (order, intermediate sequences) is derived from the
// seed, so a run is a pure function of (config, corpus).

#pragma once

#include <functional>
#include <numeric>
#include <optional>

#include <nlohmann/json.hpp>

#include "sana/constrained_decoder.hpp"
#include "sana/optim.hpp"
#include "sana/pointer.hpp"
#include "sana/realizer.hpp"

namespace sana {

/// Receives one JSON object per logged event.
using LogSink = std::function<void(const nlohmann::json&)>;

namespace detail {

inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(seed ^ 0x5EEDF00DULL, static_cast<std::uint64_t>(epoch));
  rng.shuffle(order);
  return order;
}

inline void scale_grads(nn::ParameterStore& store, double factor) {
  for (auto& p : store) p.grad *= factor;
}

}  // namespace detail

/// Minimizes the pointer NLL (L1) over annotated examples.
inline nn::OptimizerState train_pointer(SkeletonPointer& model, const Corpus& corpus, const LogSink& log = {}) {
  const RunConfig& cfg = model.config();
  for (const auto& ex : corpus)
    if (!ex.skeleton) throw Error("train-pointer needs an annotated corpus (run annotate first)");
  nn::Adam adam(model.parameters(), {cfg.pointer_lr, cfg.pointer_warmup});
  for (int epoch = 0; epoch < cfg.pointer_epochs; ++epoch) {
    const auto order = detail::epoch_order(corpus.size(), cfg.seed, epoch);
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t k = start; k < end; ++k) {
        nn::Graph g;
        nn::Var loss = model.loss(g, corpus[order[k]]);
        total += loss.scalar();
        g.backward(loss);
      }
      detail::scale_grads(model.parameters(), 1.0 / static_cast<double>(end - start));
      adam.step();
    }
    if (log)
      log({{"event", "epoch"},
           {"stage", "pointer"},
           {"epoch", epoch + 1},
           {"step", adam.state().step},
           {"lr", adam.learning_rate()},
           {"L1", total / static_cast<double>(corpus.size())}});
  }
  return adam.state();
}

/// Minimizes L_edit = L_ins + lambda * L_del with oracle supervision.
inline nn::OptimizerState train_editor(EditRealizer& model, const Corpus& corpus, const LogSink& log = {}) {
  const RunConfig& cfg = model.config();
  for (const auto& ex : corpus)
    if (!ex.skeleton) throw Error("train-editor needs an annotated corpus (run annotate first)");
  nn::Adam adam(model.parameters(), {cfg.editor_lr, cfg.editor_warmup});
  for (int epoch = 0; epoch < cfg.editor_epochs; ++epoch) {
    const auto order = detail::epoch_order(corpus.size(), cfg.seed, epoch);
    double ins = 0, del = 0, edit = 0;
    long clamped = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const Example& ex = corpus[idx];
        Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch) * corpus.size() + idx);
        const Intermediate y = make_intermediate(ex.reference, *ex.skeleton, rng);
        nn::Graph g;
        EditLossParts parts;
        nn::Var loss = model.edit_loss(g, ex.table, ex.reference, y, cfg.lambda, &parts);
        ins += parts.ins();
        del += parts.deletion;
        edit += loss.scalar();
        clamped += parts.clamped_slots;
        g.backward(loss);
      }
      detail::scale_grads(model.parameters(), 1.0 / static_cast<double>(end - start));
      adam.step();
    }
    const double n = static_cast<double>(corpus.size());
    if (log) {
      log({{"event", "epoch"},
           {"stage", "editor"},
           {"epoch", epoch + 1},
           {"step", adam.state().step},
           {"lr", adam.learning_rate()},
           {"L_ins", ins / n},
           {"L_del", del / n},
           {"L_edit", edit / n}});
      if (clamped > 0)
        log({{"event", "warning"},
             {"epoch", epoch + 1},
             {"message", "oracle placeholder counts above k_max were clamped"},
             {"clamped_slots", clamped}});
    }
  }
  return adam.state();
}

inline DecodeOptions decode_options(const RunConfig& cfg) {
  return {cfg.max_iter, cfg.k_max, cfg.max_state_len, cfg.hard_constraints};
}

/// Realizes every example. Skeletons come from the pointer, or from the
/// examples' annotations when `pointer` is null.
inline std::vector<DecodeResult> generate_texts(const EditRealizer& editor, const Corpus& corpus,
                                                const SkeletonPointer* pointer, const DecodeOptions& opt) {
  std::vector<DecodeResult> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) {
    Skeleton skeleton;
    if (pointer) {
      skeleton = pointer->beam_search(ex.table).skeleton;
    } else {
      if (!ex.skeleton) throw Error("oracle-skeleton generation needs an annotated corpus");
      skeleton = *ex.skeleton;
    }
    out.push_back(iterate(ex.table, skeleton, editor, opt));
  }
  return out;
}

}  // namespace sana
