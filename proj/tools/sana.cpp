// Copyright 2026 The SANA Authors.
// Licensed under the Apache License, Version 2.0.
//
// Command-line driver: corpus synthesis, annotation, training, decoding and
// evaluation. Logs are JSON Lines on stderr (and optionally a file); results
// go to --out or stdout.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sana/gradcheck_suite.hpp"
#include "sana/sana.hpp"

namespace {

using sana::Corpus;
using sana::RunConfig;

struct TrainFlags {
  std::string corpus, out, config, log;
  std::optional<int> epochs, warmup, batch_size;
  std::optional<double> lr, lambda;
  std::optional<std::uint64_t> seed;
};

class Logger {
 public:
  explicit Logger(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw sana::Error("cannot write log file " + path);
    }
  }
  void operator()(const nlohmann::json& j) {
    const std::string line = j.dump();
    std::cerr << line << '\n';
    if (file_.is_open()) file_ << line << '\n';
  }

 private:
  std::ofstream file_;
};

// Precedence: defaults < --config < SANA_SEED < flags.
RunConfig resolve_config(const std::string& path, std::optional<std::uint64_t> seed_flag) {
  RunConfig cfg = path.empty() ? RunConfig{} : sana::load_config(path);
  if (const char* env = std::getenv("SANA_SEED"); env && *env) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw sana::ConfigError(std::string("SANA_SEED is not an unsigned integer: ") + env);
    }
  }
  if (seed_flag) cfg.seed = *seed_flag;
  return cfg;
}

void write_lines(const std::string& path, const std::vector<nlohmann::json>& rows) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw sana::Error("cannot write " + path);
    out = &file;
  }
  for (const auto& r : rows) *out << r.dump() << '\n';
}

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool editor) {
  cmd->add_option("--corpus", f.corpus, "Annotated corpus (JSON Lines)")->required();
  cmd->add_option("--out", f.out, "Checkpoint directory")->required();
  cmd->add_option("--config", f.config, "RunConfig JSON");
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--lr", f.lr, "Peak learning rate");
  cmd->add_option("--warmup", f.warmup, "Warmup steps");
  cmd->add_option("--batch-size", f.batch_size);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--log", f.log, "Also append JSON log lines to this file");
  if (editor) cmd->add_option("--lambda", f.lambda, "Deletion loss weight");
}

RunConfig train_config(const TrainFlags& f, bool editor) {
  RunConfig cfg = resolve_config(f.config, f.seed);
  if (f.batch_size) cfg.batch_size = *f.batch_size;
  if (editor) {
    if (f.epochs) cfg.editor_epochs = *f.epochs;
    if (f.lr) cfg.editor_lr = *f.lr;
    if (f.warmup) cfg.editor_warmup = *f.warmup;
    if (f.lambda) cfg.lambda = *f.lambda;
  } else {
    if (f.epochs) cfg.pointer_epochs = *f.epochs;
    if (f.lr) cfg.pointer_lr = *f.lr;
    if (f.warmup) cfg.pointer_warmup = *f.warmup;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sana: skeleton-based table-to-text generation"};
  app.require_subcommand(1);

  // synth-corpus
  std::size_t synth_n = 200;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth-corpus", "Generate a synthetic biography corpus");
  synth->add_option("--n", synth_n, "Number of examples")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out, "Output JSON Lines (default stdout)");

  // annotate
  std::string ann_in, ann_out, ann_stop;
  auto* annotate = app.add_subcommand("annotate", "Attach automatic skeletons to a corpus");
  annotate->add_option("--in", ann_in)->required();
  annotate->add_option("--out", ann_out, "Output JSON Lines (default stdout)");
  annotate->add_option("--stopwords", ann_stop, "Stop-word file, one token per line");

  TrainFlags ptr_flags, ed_flags;
  auto* train_ptr = app.add_subcommand("train-pointer", "Train the skeleton pointer network");
  add_train_flags(train_ptr, ptr_flags, false);
  auto* train_ed = app.add_subcommand("train-editor", "Train the edit-based realizer");
  add_train_flags(train_ed, ed_flags, true);

  // skeleton
  std::string sk_pointer, sk_corpus, sk_out;
  std::optional<int> sk_beam;
  auto* skeleton = app.add_subcommand("skeleton", "Predict skeletons with a trained pointer");
  skeleton->add_option("--pointer", sk_pointer)->required();
  skeleton->add_option("--corpus", sk_corpus)->required();
  skeleton->add_option("--out", sk_out);
  skeleton->add_option("--beam", sk_beam, "Beam width");

  // generate
  std::string gen_editor, gen_pointer, gen_corpus, gen_out;
  std::optional<int> gen_max_iter;
  bool gen_soft = false, gen_oracle = false;
  auto* generate = app.add_subcommand("generate", "Generate text with constrained iterative refinement");
  generate->add_option("--editor", gen_editor)->required();
  generate->add_option("--pointer", gen_pointer, "Pointer checkpoint (not needed with --oracle-skeleton)");
  generate->add_option("--corpus", gen_corpus)->required();
  generate->add_option("--out", gen_out);
  generate->add_option("--max-iter", gen_max_iter)->check(CLI::NonNegativeNumber);
  generate->add_flag("--no-hard-constraints", gen_soft, "Allow deleting skeleton tokens (ablation)");
  generate->add_flag("--oracle-skeleton", gen_oracle, "Use the corpus skeletons instead of the pointer");

  // evaluate
  std::string ev_corpus, ev_outputs, ev_report;
  double ev_lambda = 0.5;
  auto* evaluate = app.add_subcommand("evaluate", "Score generated text with BLEU, PARENT and PARENT-T");
  evaluate->add_option("--corpus", ev_corpus, "Gold corpus")->required();
  evaluate->add_option("--outputs", ev_outputs, "Output of generate")->required();
  evaluate->add_option("--report", ev_report, "Write the JSON report here instead of stdout");
  evaluate->add_option("--lambda-mix", ev_lambda, "PARENT reference/table recall mix")->check(CLI::Range(0.0, 1.0));

  std::uint64_t gc_seed = 7;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks of every layer");
  gradcheck->add_option("--seed", gc_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const Corpus c = sana::generate(sana::TemplateSpec::defaults(synth_seed), synth_n);
      std::vector<nlohmann::json> rows;
      for (const auto& ex : c) rows.push_back(sana::example_to_json(ex));
      write_lines(synth_out, rows);
    } else if (annotate->parsed()) {
      Corpus c = sana::load_corpus(ann_in);
      const auto stop = ann_stop.empty() ? sana::StopWordList::defaults() : sana::StopWordList::load(ann_stop);
      sana::annotate_corpus(c, stop);
      std::vector<nlohmann::json> rows;
      for (const auto& ex : c) rows.push_back(sana::example_to_json(ex));
      write_lines(ann_out, rows);
    } else if (train_ptr->parsed() || train_ed->parsed()) {
      const bool editor = train_ed->parsed();
      const TrainFlags& f = editor ? ed_flags : ptr_flags;
      const RunConfig cfg = train_config(f, editor);
      const Corpus c = sana::load_corpus(f.corpus);
      if (c.empty()) throw sana::Error("training corpus is empty: " + f.corpus);
      Logger log(f.log);
      auto tokens = sana::build_vocabulary(c, cfg.vocab_cap);
      auto keys = sana::build_key_vocabulary(c, cfg.vocab_cap);
      log({{"event", "start"},
           {"stage", editor ? "editor" : "pointer"},
           {"examples", c.size()},
           {"vocab", tokens.size()},
           {"config", cfg}});
      if (editor) {
        sana::EditRealizer model(cfg, std::move(tokens), std::move(keys));
        const auto state = sana::train_editor(model, c, std::ref(log));
        model.save(f.out, &state);
      } else {
        sana::SkeletonPointer model(cfg, std::move(tokens), std::move(keys));
        const auto state = sana::train_pointer(model, c, std::ref(log));
        model.save(f.out, &state);
      }
      log({{"event", "saved"}, {"path", f.out}});
    } else if (skeleton->parsed()) {
      const auto model = sana::SkeletonPointer::load(sk_pointer);
      const Corpus c = sana::load_corpus(sk_corpus);
      const int beam = sk_beam.value_or(model.config().beam_width);
      if (beam < 1) throw sana::ConfigError("--beam must be at least 1");
      std::vector<nlohmann::json> rows;
      for (const auto& ex : c) {
        const auto r = model.beam_search(ex.table, beam, model.config().max_len);
        rows.push_back({{"skeleton", r.skeleton}, {"score", r.score}, {"truncated", r.truncated}});
      }
      write_lines(sk_out, rows);
    } else if (generate->parsed()) {
      if (!gen_oracle && gen_pointer.empty())
        throw sana::ConfigError("generate needs --pointer unless --oracle-skeleton is given");
      const auto editor = sana::EditRealizer::load(gen_editor);
      std::optional<sana::SkeletonPointer> pointer;
      if (!gen_oracle) pointer.emplace(sana::SkeletonPointer::load(gen_pointer));
      const Corpus c = sana::load_corpus(gen_corpus);
      sana::DecodeOptions opt = sana::decode_options(editor.config());
      if (gen_max_iter) opt.max_iter = *gen_max_iter;
      if (gen_soft) opt.hard_constraints = false;
      std::vector<nlohmann::json> rows;
      for (const auto& r : sana::generate_texts(editor, c, pointer ? &*pointer : nullptr, opt))
        rows.push_back({{"text", sana::join(r.tokens)},
                        {"iterations", r.trace.iterations},
                        {"termination", sana::to_string(r.trace.termination)}});
      write_lines(gen_out, rows);
    } else if (evaluate->parsed()) {
      const Corpus gold = sana::load_corpus(ev_corpus);
      std::ifstream in(ev_outputs);
      if (!in) throw sana::Error("cannot open " + ev_outputs);
      std::vector<sana::Tokens> hyps;
      std::string line;
      for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (sana::tokenize(line).empty()) continue;
        try {
          hyps.push_back(sana::tokenize(nlohmann::json::parse(line).at("text").get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
          throw sana::ParseError(n, std::string("bad output line: ") + e.what());
        }
      }
      const auto report = sana::evaluate(hyps, gold, ev_lambda);
      if (ev_report.empty()) {
        std::cout << report.to_json().dump() << '\n';
      } else {
        std::ofstream out(ev_report);
        if (!out) throw sana::Error("cannot write " + ev_report);
        out << report.to_json().dump(2) << '\n';
      }
      std::fprintf(stderr, "%-10s %10s %10s %10s\n", "metric", "precision", "recall", "f1");
      std::fprintf(stderr, "%-10s %10.4f %10.4f %10.4f\n", "PARENT", report.parent.precision, report.parent.recall,
                   report.parent.f1);
      std::fprintf(stderr, "%-10s %10.4f %10.4f %10.4f\n", "PARENT-T", report.parent_t.precision,
                   report.parent_t.recall, report.parent_t.f1);
      std::fprintf(stderr, "%-10s %10.2f\n", "BLEU", report.bleu);
    } else if (gradcheck->parsed()) {
      bool ok = true;
      for (const auto& e : sana::run_gradcheck_suite(gc_seed)) {
        std::cout << nlohmann::json{{"layer", e.name},
                                    {"max_rel_error", e.result.max_rel_error},
                                    {"worst_param", e.result.worst_param},
                                    {"coords", e.result.coords_checked},
                                    {"pass", e.passed()}}
                         .dump()
                  << '\n';
        ok = ok && e.passed();
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "sana: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
