// dualspeech: command-line front end for codebook fitting, synthetic data,
// training, evaluation and reporting.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <map>
#include <memory>
#include <optional>

#include "dualspeech/common/error.hpp"
#include "dualspeech/common/io.hpp"
#include "dualspeech/corpus/frame_file.hpp"
#include "dualspeech/eval/report.hpp"
#include "dualspeech/pipeline.hpp"
#include "dualspeech/train/step.hpp"

namespace fs = std::filesystem;
using namespace dualspeech;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
};

AppConfig load_config(const Globals& g) {
  AppConfig cfg = g.config_path.empty() ? AppConfig{} : load_app_config(g.config_path);
  if (g.seed) cfg.set_seed(*g.seed);
  return cfg;
}

// Records from several manifests; frames resolve against each manifest's directory.
std::vector<corpus::ManifestRecord> load_all(const std::vector<std::string>& paths, corpus::FrameLoader& loader) {
  std::vector<corpus::ManifestRecord> all;
  std::map<std::string, fs::path> base_of;
  for (const auto& p : paths) {
    auto records = corpus::load_manifest(p);
    const fs::path base = fs::path(p).parent_path();
    for (auto& r : records) {
      if (base_of.count(r.id)) fail(ErrorKind::kValidation, "duplicate id '" + r.id + "' across manifests");
      base_of[r.id] = base;
      all.push_back(std::move(r));
    }
  }
  loader = [base_of](const corpus::ManifestRecord& r) { return corpus::file_frame_loader(base_of.at(r.id))(r); };
  return all;
}

void print_report(const eval::EvalReport& report) {
  for (const auto& l : report.languages) {
    std::printf("%s\t%s\tn=%zu\tR@1 %.3f", report.task.c_str(), l.language.c_str(), l.count, l.r_at_1);
    if (l.wer) std::printf("\tWER %.4f", *l.wer);
    if (l.bleu) std::printf("\tBLEU %.2f", *l.bleu);
    std::printf("\n");
  }
  std::printf("%s\taggregate\tR@1 %.3f", report.task.c_str(), report.r_at_1);
  if (report.wer) std::printf("\tWER %.4f", *report.wer);
  if (report.bleu) std::printf("\tBLEU %.2f", *report.bleu);
  std::printf("\n");
}

int run(int argc, char** argv) {
  CLI::App app{"Speech-text dual encoder: tokenize, train, and evaluate retrieval"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every random component (overrides the config)");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic multilingual corpus");
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output directory")->required();

  // fit-codebook
  auto* fit = app.add_subcommand("fit-codebook", "Fit the k-means audio codebook on manifest frames");
  std::vector<std::string> fit_manifests;
  std::string fit_out;
  std::optional<std::size_t> fit_k;
  fit->add_option("--manifest", fit_manifests, "Manifest(s) with frames_path records")->required();
  fit->add_option("--out", fit_out, "Codebook file")->required();
  fit->add_option("--k", fit_k, "Codebook size (overrides the config)");

  // quantize
  auto* quant = app.add_subcommand("quantize", "Map frames to audio token ids");
  std::string q_codebook, q_out;
  std::vector<std::string> q_inputs;
  quant->add_option("--codebook", q_codebook, "Codebook file")->required()->check(CLI::ExistingFile);
  quant->add_option("--manifest", q_inputs, "Manifest(s); writes {id, tokens} JSON lines")->required();
  quant->add_option("--out", q_out, "Output JSON-lines file (stdout if omitted)");

  // train
  auto* tr = app.add_subcommand("train", "Train the dual encoder");
  std::vector<std::string> tr_manifests, tr_eval;
  std::string tr_out, tr_codebook, tr_resume;
  std::optional<std::size_t> tr_steps, tr_stop;
  tr->add_option("--manifest", tr_manifests, "Training manifest(s): s2t and mt records")->required();
  tr->add_option("--out", tr_out, "Run directory (checkpoints, metrics.jsonl, vocab.json)")->required();
  tr->add_option("--codebook", tr_codebook, "Pre-fitted codebook (fitted on the training frames if omitted)")
      ->check(CLI::ExistingFile);
  tr->add_option("--steps", tr_steps, "Total steps (overrides the config; 0 writes the initial checkpoint)");
  tr->add_option("--resume", tr_resume, "Continue from this checkpoint")->check(CLI::ExistingFile);
  tr->add_option("--stop-at", tr_stop, "Stop after this many completed steps");
  tr->add_option("--eval-manifest", tr_eval, "S2T manifest evaluated every eval_every steps");

  // eval-s2t / eval-s2tt
  std::string ev_ckpt, ev_manifest, ev_out;
  auto add_eval = [&](const char* name, const char* desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
    sub->add_option("--manifest", ev_manifest, "Test manifest")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ev_out, "Report JSON path");
    return sub;
  };
  auto* ev_s2t = add_eval("eval-s2t", "Speech-to-text retrieval: R@1 and retrieval WER");
  auto* ev_s2tt = add_eval("eval-s2tt", "Speech-to-translation retrieval: R@1 and corpus BLEU");

  // embed
  auto* emb = app.add_subcommand("embed", "Dump embeddings as JSON lines");
  std::string emb_ckpt, emb_manifest, emb_out, emb_side = "speech";
  emb->add_option("--checkpoint", emb_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  emb->add_option("--manifest", emb_manifest, "Manifest")->required()->check(CLI::ExistingFile);
  emb->add_option("--side", emb_side, "speech|transcript|translation")
      ->check(CLI::IsMember({"speech", "transcript", "translation"}));
  emb->add_option("--out", emb_out, "Output JSON-lines file (stdout if omitted)");

  // report
  auto* rep = app.add_subcommand("report", "Render grouped CSV and per-language TSV from a report");
  std::string rep_in, rep_csv, rep_tsv;
  rep->add_option("--in", rep_in, "Report JSON")->required()->check(CLI::ExistingFile);
  rep->add_option("--csv", rep_csv, "Family-grouped CSV (stdout if neither output is given)");
  rep->add_option("--tsv", rep_tsv, "Per-language TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: UsageError: %s\n", e.what());
    return 2;
  }

  spdlog::set_default_logger(spdlog::stderr_color_st("dualspeech"));
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  const AppConfig cfg = load_config(g);

  if (*gen) {
    const auto corpus = corpus::generate_synthetic_corpus(cfg.synthetic);
    corpus::write_synthetic_corpus(corpus, gen_out);
    std::printf("wrote %zu s2t train, %zu s2t test, %zu mt, %zu s2tt records to %s\n", corpus.train_s2t.size(),
                corpus.test_s2t.size(), corpus.train_mt.size(), corpus.test_s2tt.size(), gen_out.c_str());
    return 0;
  }

  if (*fit) {
    corpus::FrameLoader loader;
    const auto records = load_all(fit_manifests, loader);
    audio::KMeansOptions opts = cfg.codebook;
    if (fit_k) opts.k = *fit_k;
    std::size_t dim = 0;
    const auto frames = corpus::collect_frames(records, loader, dim);
    if (dim == 0) fail(ErrorKind::kData, "no frames in the given manifests");
    const auto result = audio::fit_codebook(frames, dim, opts);
    audio::save_codebook(result.codebook, fit_out);
    std::printf("codebook k=%zu dim=%zu iterations=%zu distortion=%.6g converged=%s\n", result.codebook.k, dim,
                result.iterations, result.distortion_history.back(), result.converged ? "yes" : "no");
    return 0;
  }

  if (*quant) {
    const audio::Codebook book = audio::load_codebook(q_codebook);
    corpus::FrameLoader loader;
    const auto records = load_all(q_inputs, loader);
    std::string out;
    for (const auto& r : records) {
      if (!r.frames_path) continue;
      out += json{{"id", r.id}, {"tokens", audio::quantize(loader(r), book)}}.dump() + "\n";
    }
    if (q_out.empty()) std::fputs(out.c_str(), stdout);
    else io::write_file_atomic(q_out, out);
    return 0;
  }

  if (*tr) {
    corpus::FrameLoader loader;
    const auto records = load_all(tr_manifests, loader);
    train::Checkpoint start;
    if (!tr_resume.empty()) {
      start = train::load_checkpoint(tr_resume);
      spdlog::info("resuming from {} at step {}", tr_resume, start.step);
    } else {
      AppConfig run_cfg = cfg;
      if (tr_steps) {
        run_cfg.train.total_steps = *tr_steps;
        run_cfg.train.warmup_steps = std::min(run_cfg.train.warmup_steps, *tr_steps);
      }
      Assets assets;
      if (!tr_codebook.empty()) {
        assets.codebook = audio::load_codebook(tr_codebook);
        assets.vocab = build_vocab(records, run_cfg.vocab, assets.codebook.k);
      } else {
        assets = fit_assets(records, loader, run_cfg);
      }
      start = start_checkpoint(run_cfg, assets);
      vocab::save_vocab(*start.vocab, fs::path(tr_out) / "vocab.json");
    }
    const std::size_t max_length = cfg.vocab.max_length;
    const train::TrainData data = build_train_data(start, records, loader, max_length);
    spdlog::info("training pairs: {} s2t, {} mt; {} parameters", data.s2t.size(), data.mt.size(),
                 start.params.total_size());

    train::TrainOptions opts;
    opts.checkpoint_dir = tr_out;
    opts.metrics_path = fs::path(tr_out) / "metrics.jsonl";
    opts.stop_at = tr_stop;
    if (!tr_eval.empty()) {
      corpus::FrameLoader eval_loader;
      auto eval_records = std::make_shared<std::vector<corpus::ManifestRecord>>(load_all(tr_eval, eval_loader));
      auto snap = std::make_shared<train::Checkpoint>();
      snap->encoder = start.encoder;
      snap->train = start.train;
      snap->vocab = start.vocab;
      snap->codebook = start.codebook;
      opts.eval = [snap, eval_records, eval_loader, max_length](const encoder::EncoderParams<float>& params,
                                                                std::size_t) {
        snap->params = params;
        const auto report =
            evaluate_checkpoint(*snap, *eval_records, eval_loader, corpus::RecordTask::kS2T, max_length);
        return json{{"r_at_1", report.r_at_1}, {"wer", report.wer ? json(*report.wer) : json(nullptr)}};
      };
    }
    const auto result = train::train(start, data, opts);
    std::printf("trained to step %zu; checkpoint %s\n", result.last.step, (fs::path(tr_out) / "last.bin").c_str());
    return 0;
  }

  if (*ev_s2t || *ev_s2tt) {
    const train::Checkpoint ckpt = train::load_checkpoint(ev_ckpt);
    const auto records = corpus::load_manifest(ev_manifest);
    const auto loader = corpus::file_frame_loader(fs::path(ev_manifest).parent_path());
    const auto task = *ev_s2t ? corpus::RecordTask::kS2T : corpus::RecordTask::kS2TT;
    auto report = evaluate_checkpoint(ckpt, records, loader, task, cfg.vocab.max_length);
    report.provenance["checkpoint"] = ev_ckpt;
    report.provenance["manifest"] = ev_manifest;
    print_report(report);
    if (!ev_out.empty()) eval::save_report(report, ev_out);
    return 0;
  }

  if (*emb) {
    const train::Checkpoint ckpt = train::load_checkpoint(emb_ckpt);
    if (!ckpt.vocab || !ckpt.codebook) fail(ErrorKind::kData, "checkpoint carries no vocabulary or codebook");
    const auto records = corpus::load_manifest(emb_manifest);
    const auto loader = corpus::file_frame_loader(fs::path(emb_manifest).parent_path());
    const corpus::InputContext ctx{*ckpt.vocab, *ckpt.codebook,
                                   std::min(cfg.vocab.max_length, ckpt.encoder.max_len)};
    std::vector<vocab::TokenSequence> seqs;
    std::vector<std::string> ids;
    for (const auto& r : records) {
      if (emb_side == "speech" && r.frames_path) {
        seqs.push_back(corpus::speech_input(r, loader, ctx));
      } else if (emb_side == "transcript" && r.transcript) {
        seqs.push_back(vocab::build_text_input(r.language, *r.transcript, ctx.vocab, ctx.max_length));
      } else if (emb_side == "translation" && r.translation) {
        seqs.push_back(vocab::build_text_input(r.translation->target_lang, r.translation->text, ctx.vocab,
                                               ctx.max_length));
      } else {
        continue;
      }
      ids.push_back(r.id);
    }
    train::EncodeOptions enc;
    enc.chunks = ckpt.train.encode_chunks;
    enc.threads = ckpt.train.threads;
    const auto e = train::encode_batch(ckpt.params, ckpt.encoder, std::span<const vocab::TokenSequence>(seqs), enc);
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto row = e.row(i);
      out += json{{"id", ids[i]}, {"side", emb_side}, {"embedding", std::vector<float>(row.begin(), row.end())}}
                 .dump() +
             "\n";
    }
    if (emb_out.empty()) std::fputs(out.c_str(), stdout);
    else io::write_file_atomic(emb_out, out);
    return 0;
  }

  if (*rep) {
    const auto report = eval::load_report(rep_in);
    if (rep_csv.empty() && rep_tsv.empty()) {
      std::fputs(eval::render_group_csv(report).c_str(), stdout);
    }
    if (!rep_csv.empty()) io::write_file_atomic(rep_csv, eval::render_group_csv(report));
    if (!rep_tsv.empty()) io::write_file_atomic(rep_tsv, eval::render_language_tsv(report));
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(e.class_name()).c_str(), e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: RuntimeError: %s\n", e.what());
  }
  return 1;
}
