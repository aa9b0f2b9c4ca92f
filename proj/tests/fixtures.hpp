// Small corpora and configurations shared by the model tests.

#pragma once

#include "sana/gradcheck_suite.hpp"
#include "sana/skeleton.hpp"
#include "sana/synth.hpp"

namespace fixture {

inline sana::Corpus annotated_corpus(std::size_t n, std::uint64_t seed = 11) {
  sana::Corpus c = sana::generate(sana::TemplateSpec::defaults(seed), n);
  sana::annotate_corpus(c, sana::StopWordList::defaults());
  return c;
}

inline sana::RunConfig small_config(std::uint64_t seed = 3) {
  sana::RunConfig cfg = sana::suite::toy_config(seed);
  cfg.dims = {16, 32, 2, 1, 16, 8, 4, 12};
  cfg.max_len = 16;
  cfg.max_state_len = 512;
  cfg.beam_width = 4;
  return cfg;
}

}  // namespace fixture
