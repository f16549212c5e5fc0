#include "sentcorr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "sentcorr/checkpoint.hpp"
#include "sentcorr/correlation.hpp"
#include "sentcorr/error.hpp"
#include "sentcorr/features.hpp"
#include "sentcorr/gradcheck_suite.hpp"
#include "sentcorr/metrics.hpp"
#include "sentcorr/model.hpp"
#include "sentcorr/runconfig.hpp"
#include "sentcorr/textio.hpp"
#include "sentcorr/train.hpp"

namespace sentcorr::cli {

namespace {

struct PendingArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> flags;  // applied after the config file
    std::vector<std::string> positionals;
};

void add_setting_flags(CLI::App* sub, PendingArgs& pending) {
    sub->add_option("--config", pending.config_path, "key = value configuration file");
    for (const auto& s : settings()) {
        sub->add_option_function<std::string>(
            "--" + s.key,
            [&pending, key = s.key](const std::string& v) { pending.flags.emplace_back(key, v); },
            s.help);
    }
}

RunConfig resolve_config(const PendingArgs& pending) {
    RunConfig cfg;
    if (!pending.config_path.empty()) apply_config_file(cfg, pending.config_path);
    for (const auto& [key, value] : pending.flags) {
        apply_setting(cfg, key, value, "--" + key);
    }
    return cfg;
}

void write_snapshot(const RunConfig& cfg) {
    ensure_directory(cfg.outdir);
    atomic_write_file(cfg.outdir + "/resolved.cfg", resolved_config(cfg));
}

std::string require_path(const std::string& value, const std::string& key) {
    if (value.empty()) throw usage_error("missing required setting '" + key + "'");
    return value;
}

std::string default_path(const std::string& value, const std::string& fallback) {
    return value.empty() ? fallback : value;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
    return out;
}

struct LoadedFeatures {
    Corpus corpus;
    SynonymDictionary dict;
    bool has_dict = false;
    Vocabulary vocab;
};

SynonymDictionary load_dict_if_needed(const RunConfig& cfg, bool* has_dict) {
    *has_dict = false;
    SynonymDictionary dict;
    if (!cfg.dict.empty()) {
        dict = load_synonym_dict(cfg.dict);
        *has_dict = true;
    } else if (cfg.feature_mode() == FeatureMode::implicit_tags) {
        throw usage_error("implicit feature mode requires --dict");
    }
    return dict;
}

int resolved_seq_len(const RunConfig& cfg, const Corpus& corpus, FeatureMode mode,
                     const SynonymDictionary* dict) {
    if (cfg.seq_len > 0) return cfg.seq_len;
    const int longest = longest_train_document(corpus, mode, dict);
    if (longest < 1) throw input_error("cannot derive seq_len: no train documents");
    return std::min(longest, cfg.seq_cap);
}

std::vector<EncodedSample> encode_split(const Corpus& corpus, Split split, const Vocabulary& vocab,
                                        const SynonymDictionary* dict, int n,
                                        EncodeStats* stats) {
    std::vector<EncodedSample> out;
    for (const RawRecord* rec : corpus.split(split)) {
        out.push_back(encode_record(*rec, corpus.dataset_key, vocab, dict, n, stats));
    }
    return out;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_vocab(const RunConfig& cfg, std::ostream& out) {
    write_snapshot(cfg);
    const Corpus corpus = load_corpus_jsonl(require_path(cfg.corpus, "corpus"), cfg.dataset);
    bool has_dict = false;
    const SynonymDictionary dict = load_dict_if_needed(cfg, &has_dict);
    const FeatureMode mode = cfg.feature_mode();

    const Vocabulary vocab = build_vocab(corpus, mode, has_dict ? &dict : nullptr, cfg.min_count);
    const std::string path = default_path(cfg.vocab, cfg.outdir + "/vocab.tsv");
    save_vocabulary(vocab, path);
    out << "vocabulary: " << vocab.size() << " tokens (" << feature_mode_name(mode) << "), digest "
        << vocab.digest() << ", written to " << path << "\n";
    if (dict.duplicate_lines > 0) {
        out << "warning: " << dict.duplicate_lines
            << " duplicate dictionary entries ignored (first mapping wins)\n";
    }
    return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    write_snapshot(cfg);
    const Corpus corpus = load_corpus_jsonl(require_path(cfg.corpus, "corpus"), cfg.dataset);
    bool has_dict = false;
    const SynonymDictionary dict = load_dict_if_needed(cfg, &has_dict);
    const SynonymDictionary* dict_ptr = has_dict ? &dict : nullptr;
    const FeatureMode mode = cfg.feature_mode();
    const Vocabulary vocab = load_vocabulary(require_path(cfg.vocab, "vocab"), mode);

    ModelConfig mc = cfg.model_config();
    mc.seq_len = resolved_seq_len(cfg, corpus, mode, dict_ptr);
    mc.validate();
    const TrainConfig tc = cfg.train_config();
    tc.validate();

    EncodeStats stats;
    const std::vector<EncodedSample> train_set =
        encode_split(corpus, Split::train, vocab, dict_ptr, mc.seq_len, &stats);
    const std::vector<EncodedSample> test_set =
        encode_split(corpus, Split::test, vocab, dict_ptr, mc.seq_len, &stats);
    if (stats.truncations > 0) {
        out << "warning: " << stats.truncations << " documents truncated to seq_len "
            << mc.seq_len << "\n";
    }

    const ModelKind kind = cfg.model_kind();
    out << "training " << model_kind_name(kind) << " on " << train_set.size() << " samples (N="
        << mc.seq_len << ", V=" << vocab.size() << ")\n";
    TrainResult result = train(tc, mc, kind, vocab.size(), train_set, test_set);

    write_history_csv(cfg.outdir + "/history.csv", result.history);

    Checkpoint ckpt;
    ckpt.kind = kind;
    ckpt.config = mc;
    ckpt.vocab_digest = vocab.digest();
    ckpt.vocab_size = vocab.size();
    ckpt.epoch = result.epochs_run;
    ckpt.seed = tc.seed;
    ckpt.params = std::move(result.params);
    const std::string ckpt_path = default_path(cfg.checkpoint, cfg.outdir + "/model.sntc");
    save_checkpoint(ckpt, ckpt_path);

    if (result.clamp_warnings > 0) {
        out << "warning: cross-entropy clamped " << result.clamp_warnings << " times\n";
    }
    if (result.diverged) {
        out << "training diverged: " << result.divergence_message << " (partial history written)\n";
        throw numeric_error(result.divergence_message);
    }
    for (auto it = result.history.rbegin(); it != result.history.rend(); ++it) {
        if (it->split == "train") {
            char buf[128];
            std::snprintf(buf, sizeof buf, "epoch %d train loss %.6f accuracy %.4f\n", it->epoch,
                          it->loss, it->accuracy);
            out << buf;
            break;
        }
    }
    out << "checkpoint written to " << ckpt_path << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    write_snapshot(cfg);
    const Corpus corpus = load_corpus_jsonl(require_path(cfg.corpus, "corpus"), cfg.dataset);
    bool has_dict = false;
    const SynonymDictionary dict = load_dict_if_needed(cfg, &has_dict);
    const SynonymDictionary* dict_ptr = has_dict ? &dict : nullptr;
    const FeatureMode mode = cfg.feature_mode();
    const Vocabulary vocab = load_vocabulary(require_path(cfg.vocab, "vocab"), mode);

    const Checkpoint ckpt =
        load_checkpoint(require_path(cfg.checkpoint, "checkpoint"), vocab.digest());

    Split split;
    if (cfg.split == "train") split = Split::train;
    else if (cfg.split == "test") split = Split::test;
    else throw usage_error("unknown split '" + cfg.split + "' (expected train|test)");

    EncodeStats stats;
    const std::vector<EncodedSample> samples =
        encode_split(corpus, split, vocab, dict_ptr, ckpt.config.seq_len, &stats);
    if (samples.empty()) throw input_error("no samples in split '" + cfg.split + "'");

    const std::vector<Prediction> preds =
        predict_all(ckpt.params, ckpt.config, samples, cfg.threads);

    double loss = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double p = preds[i].probs[static_cast<std::size_t>(label_index(samples[i].label))];
        loss += -std::log(std::max(p, 1e-12));
    }
    loss /= static_cast<double>(samples.size());

    const MetricsRecord rec =
        metrics_from_counts(confusion_counts(samples, preds), loss, ckpt.epoch, cfg.split);

    const ComboKey combo{corpus.dataset_key, std::string(feature_mode_name(mode)),
                         std::string(model_kind_name(ckpt.kind))};
    atomic_write_file(cfg.outdir + "/metrics.csv", combo_metrics_csv_header() + "\n" +
                                                       combo_metrics_csv_row(combo, rec) + "\n");

    std::vector<PredictionRecord> log;
    log.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        log.push_back(PredictionRecord{samples[i].id, samples[i].label, preds[i].label, combo});
    }
    write_prediction_log(cfg.outdir + "/predictions.csv", log);

    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s: %zu samples, loss %.6f, accuracy %.4f\n",
                  combo.str().c_str(), cfg.split.c_str(), samples.size(), rec.loss, rec.accuracy);
    out << buf;
    return 0;
}

int cmd_predict(const RunConfig& cfg, std::istream& in, std::ostream& out) {
    write_snapshot(cfg);
    bool has_dict = false;
    const SynonymDictionary dict = load_dict_if_needed(cfg, &has_dict);
    const SynonymDictionary* dict_ptr = has_dict ? &dict : nullptr;
    const FeatureMode mode = cfg.feature_mode();
    const Vocabulary vocab = load_vocabulary(require_path(cfg.vocab, "vocab"), mode);
    const Checkpoint ckpt =
        load_checkpoint(require_path(cfg.checkpoint, "checkpoint"), vocab.digest());

    std::string line;
    while (std::getline(in, line)) {
        const std::vector<std::string> tokens = tokenize(line, mode, dict_ptr);
        const EncodedSample sample = encode(tokens, vocab, ckpt.config.seq_len);
        const Prediction pred = predict(ckpt.params, ckpt.config, sample);
        out << label_tag(pred.label);
        for (int c = 0; c < kNumLabels; ++c) {
            char buf[24];
            std::snprintf(buf, sizeof buf, " %.6f", pred.probs[static_cast<std::size_t>(c)]);
            out << buf;
        }
        out << "\n";
    }
    return 0;
}

int cmd_correlate(const RunConfig& cfg, const std::vector<std::string>& log_paths,
                  std::ostream& out) {
    if (log_paths.empty()) throw usage_error("correlate needs at least one prediction log");
    write_snapshot(cfg);

    std::vector<PredictionRecord> all;
    for (const auto& path : log_paths) {
        auto records = read_prediction_log(path);
        all.insert(all.end(), records.begin(), records.end());
    }

    std::map<std::tuple<std::string, std::string, std::string>, std::vector<PredictionRecord>>
        by_combo;
    for (auto& r : all) {
        by_combo[{r.combo.dataset, r.combo.feature, r.combo.model}].push_back(std::move(r));
    }

    std::vector<ConfusionMatrix> matrices;
    std::vector<BinaryConfusion> binaries;
    for (const auto& [key, records] : by_combo) {
        ConfusionMatrix m = confusion(records);
        BinaryConfusion b = cfg.theta >= 0.0 ? binarize_fixed(m, cfg.theta)
                                             : binarize_topk(m, cfg.top_k, cfg.include_diagonal);
        const std::string name = "confusion_" + sanitize(m.combo.dataset) + "_" +
                                 sanitize(m.combo.feature) + "_" + sanitize(m.combo.model) +
                                 ".csv";
        atomic_write_file(cfg.outdir + "/" + name, matrix_csv(m));
        matrices.push_back(std::move(m));
        binaries.push_back(std::move(b));
    }

    const VoteResult v = vote(binaries, cfg.quorum);
    const std::string report = correlation_report(matrices, binaries, v);
    atomic_write_file(cfg.outdir + "/correlation_report.md", report);

    out << "correlate: " << matrices.size() << " combos, quorum " << v.quorum << " of "
        << matrices.size() << "; report written to " << cfg.outdir << "/correlation_report.md\n";
    int passed = 0;
    for (int a = 0; a < kNumLabels; ++a) {
        for (int g = 0; g < kNumLabels; ++g) {
            passed += v.t[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)];
        }
    }
    out << "vote: " << passed << " pair(s) passed\n";
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
    write_snapshot(cfg);
    const std::vector<GradCheckCase> cases = run_gradcheck_suite();
    double overall = 0.0;
    bool all_passed = true;
    for (const auto& c : cases) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-22s max_rel_err %.3e  (threshold %.0e, %.2fs)  %s\n",
                      c.name.c_str(), c.max_rel_err, c.threshold, c.seconds,
                      c.passed() ? "ok" : "FAIL");
        out << buf;
        overall = std::max(overall, c.max_rel_err);
        all_passed = all_passed && c.passed();
    }
    char buf[80];
    std::snprintf(buf, sizeof buf, "max relative error: %.6e\n", overall);
    out << buf;
    if (!all_passed) throw numeric_error("gradient check failed");
    return 0;
}

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& metric_paths,
               std::ostream& out) {
    if (metric_paths.empty()) throw usage_error("report needs at least one metrics file");
    write_snapshot(cfg);
    std::vector<std::pair<ComboKey, MetricsRecord>> entries;
    for (const auto& path : metric_paths) {
        auto rows = read_combo_metrics_csv(path);
        entries.insert(entries.end(), rows.begin(), rows.end());
    }
    const std::string report = render_report(entries);
    atomic_write_file(cfg.outdir + "/report.txt", report);
    out << report;
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"sentiment classification and inter-sentiment correlation toolkit"};
    app.require_subcommand(1);

    PendingArgs pending;
    std::vector<std::string> log_paths;
    std::vector<std::string> metric_paths;

    CLI::App* vocab_cmd = app.add_subcommand("vocab", "build and write a vocabulary");
    CLI::App* train_cmd = app.add_subcommand("train", "train a model, write checkpoint + history");
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint, write metrics + prediction log");
    CLI::App* predict_cmd =
        app.add_subcommand("predict", "read text lines from stdin, write tag + probabilities");
    CLI::App* correlate_cmd =
        app.add_subcommand("correlate", "confusion matrices, binarization and vote from prediction logs");
    CLI::App* gradcheck_cmd =
        app.add_subcommand("gradcheck", "finite-difference verification of all backward passes");
    CLI::App* report_cmd = app.add_subcommand("report", "tabular summary from metrics files");

    for (CLI::App* sub : {vocab_cmd, train_cmd, eval_cmd, predict_cmd, correlate_cmd,
                          gradcheck_cmd, report_cmd}) {
        add_setting_flags(sub, pending);
    }
    correlate_cmd->add_option("logs", log_paths, "prediction log CSV files");
    report_cmd->add_option("metrics", metric_paths, "metrics CSV files");

    // CLI11 consumes the argument vector back to front.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return static_cast<int>(ExitStatus::usage);
    }

    try {
        const RunConfig cfg = resolve_config(pending);
        if (vocab_cmd->parsed()) return cmd_vocab(cfg, out);
        if (train_cmd->parsed()) return cmd_train(cfg, out);
        if (eval_cmd->parsed()) return cmd_eval(cfg, out);
        if (predict_cmd->parsed()) return cmd_predict(cfg, in, out);
        if (correlate_cmd->parsed()) return cmd_correlate(cfg, log_paths, out);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(cfg, out);
        if (report_cmd->parsed()) return cmd_report(cfg, metric_paths, out);
        err << "usage error: no subcommand\n";
        return static_cast<int>(ExitStatus::usage);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.status());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitStatus::io);
    }
}

}  // namespace sentcorr::cli
