#include "distill/cli.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "distill/analysis.hpp"
#include "distill/config.hpp"
#include "distill/curation.hpp"
#include "distill/manifest.hpp"
#include "distill/toy_model.hpp"
#include "distill/version.hpp"

namespace distill::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ToolConfig load_config(const std::string& path) {
    if (path.empty()) return ToolConfig{};
    {
        std::ifstream probe(path);
        if (!probe) throw IoError("cannot open config file '" + path + "'");
    }
    return ToolConfig::load_file(path);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_output(path);
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

RunManifest start_manifest(const std::string& subcommand, const ToolConfig& cfg,
                           const std::string& input_path) {
    RunManifest m;
    m.tool_version = std::string(kToolVersion);
    m.subcommand = subcommand;
    m.config_hash = fnv1a64_hex(cfg.to_json().dump());
    if (auto digest = file_digest_hex(input_path)) m.input_digest = *digest;
    m.started_at = iso8601_utc_now();
    return m;
}

void finish_manifest(RunManifest& m, const std::string& explicit_path,
                     const std::string& primary_output) {
    m.finished_at = iso8601_utc_now();
    std::string path = explicit_path.empty() ? primary_output + ".manifest.json" : explicit_path;
    write_text_file(path, m.to_json().dump(2) + "\n");
}

struct CurateArgs {
    std::string input, output, stats_path, config_path, manifest_path;
    std::size_t workers = 0;
    bool workers_set = false;
};

int run_curate(const CurateArgs& args, bool apply_filter, const std::string& name) {
    ToolConfig cfg = load_config(args.config_path);
    if (args.workers_set) cfg.curation.workers = args.workers;
    cfg.curation.validate();
    cfg.reward.validate();

    RunManifest manifest = start_manifest(name, cfg, args.input);
    std::ifstream in = open_input(args.input);
    std::ofstream out = open_output(args.output);

    CurateOptions options;
    options.apply_filter = apply_filter;
    options.workers = cfg.curation.workers;
    CurationStats stats = run_curation(in, out, cfg.reward, cfg.curation, options, std::cerr);
    out.flush();
    if (!out) throw IoError("failed writing '" + args.output + "'");

    write_text_file(args.stats_path, stats.to_json(cfg.curation).dump(2) + "\n");

    manifest.counts["records_in"] = stats.records_in;
    manifest.counts["groups_in"] = stats.groups_in;
    manifest.counts["groups_kept"] = stats.groups_kept;
    manifest.counts["groups_dropped"] = stats.groups_dropped;
    manifest.counts["malformed_records"] = stats.malformed_records;
    manifest.counts["responses_emitted"] = stats.responses_emitted;
    finish_manifest(manifest, args.manifest_path, args.output);

    std::cerr << name << ": " << stats.groups_kept << "/" << stats.groups_in
              << " groups kept, " << stats.malformed_records << " malformed record(s)\n";
    return kExitOk;
}

struct StatsArgs {
    std::string input, output, config_path, manifest_path;
};

int run_stats(const StatsArgs& args) {
    ToolConfig cfg = load_config(args.config_path);
    RunManifest manifest = start_manifest("stats", cfg, args.input);

    std::ifstream in = open_input(args.input);
    CurationStats stats = recompute_stats(in, cfg.curation, std::cerr);
    write_text_file(args.output, stats.to_json(cfg.curation).dump(2) + "\n");

    manifest.counts["groups_in"] = stats.groups_in;
    manifest.counts["groups_kept"] = stats.groups_kept;
    manifest.counts["malformed_records"] = stats.malformed_records;
    finish_manifest(manifest, args.manifest_path, args.output);
    return kExitOk;
}

struct AnalyzeArgs {
    std::string input, output, config_path, manifest_path;
    std::size_t n_min = 0, r_min = 0, run_min = 0;
    bool n_min_set = false, r_min_set = false, run_min_set = false;
};

int run_analyze(const AnalyzeArgs& args) {
    ToolConfig cfg = load_config(args.config_path);
    if (args.n_min_set) cfg.analysis.n_min = args.n_min;
    if (args.r_min_set) cfg.analysis.r_min = args.r_min;
    if (args.run_min_set) cfg.analysis.run_min = args.run_min;
    cfg.analysis.validate();

    RunManifest manifest = start_manifest("analyze", cfg, args.input);
    std::ifstream in = open_input(args.input);
    AnalyzeResult result = analyze_stream(in, cfg.analysis, std::cerr);

    nlohmann::ordered_json report = result.report.to_json();
    report["records_in"] = result.records_in;
    report["malformed_records"] = result.malformed_records;
    write_text_file(args.output, report.dump(2) + "\n");

    manifest.counts["records_in"] = result.records_in;
    manifest.counts["malformed_records"] = result.malformed_records;
    manifest.counts["n_correct"] = result.report.n_correct;
    manifest.counts["n_incorrect"] = result.report.n_incorrect;
    finish_manifest(manifest, args.manifest_path, args.output);
    return kExitOk;
}

struct TrainArgs {
    std::string dataset, model_out, trace_out, config_path, manifest_path;
    int epochs = 50;
    std::uint64_t seed = 1;
    double lambda_wrong = 0.0, tau = 0.0, learning_rate = 0.0, max_grad_norm = 0.0;
    bool lambda_set = false, tau_set = false, lr_set = false, norm_set = false;
};

int run_train(const TrainArgs& args) {
    ToolConfig cfg = load_config(args.config_path);
    if (args.lambda_set) cfg.loss.lambda_wrong = args.lambda_wrong;
    if (args.tau_set) cfg.reward.tau = args.tau;
    if (args.lr_set) cfg.loss.learning_rate = args.learning_rate;
    if (args.norm_set) cfg.loss.max_grad_norm = args.max_grad_norm;
    cfg.loss.validate();
    if (cfg.reward.tau <= 0.0) throw std::invalid_argument("train-toy: tau must be > 0");
    if (args.epochs < 0) throw std::invalid_argument("train-toy: epochs must be >= 0");

    RunManifest manifest = start_manifest("train-toy", cfg, args.dataset);
    std::ifstream in = open_input(args.dataset);
    ToyDataset dataset = load_toy_dataset(in, cfg.reward.tau);
    if (dataset.groups.empty()) throw std::invalid_argument("train-toy: dataset is empty");

    ToyModel model = ToyModel::zeros(dataset.vocab.size());
    model.learning_rate = cfg.loss.learning_rate;
    model.max_grad_norm = cfg.loss.max_grad_norm;

    TrainOptions options;
    options.epochs = args.epochs;
    options.seed = args.seed;
    options.learning_rate = cfg.loss.learning_rate;
    options.max_grad_norm = cfg.loss.max_grad_norm;
    options.loss.lambda_wrong = cfg.loss.lambda_wrong;
    options.loss.clamp_delta = cfg.loss.clamp_delta;

    TrainTrace trace = train_toy(model, dataset.groups, options);

    write_text_file(args.model_out, toy_model_to_json(model, dataset.vocab).dump() + "\n");
    write_text_file(args.trace_out, train_trace_to_json(trace).dump(2) + "\n");

    manifest.counts["groups"] = dataset.groups.size();
    manifest.counts["vocab_size"] = dataset.vocab.size();
    manifest.counts["epochs"] = args.epochs;
    manifest.counts["seed"] = args.seed;
    manifest.counts["initial_loss"] = trace.initial_loss;
    manifest.counts["final_loss"] = trace.final_loss;
    finish_manifest(manifest, args.manifest_path, args.model_out);

    std::cerr << "train-toy: loss " << trace.initial_loss << " -> " << trace.final_loss
              << " over " << args.epochs << " epoch(s)\n";
    return kExitOk;
}

struct GradcheckArgs {
    std::uint64_t seed = 1;
    int trials = 100;
    double step = 1e-5;
    double tolerance = 1e-4;
    double inject_error = 0.0;
};

int run_gradcheck_cmd(const GradcheckArgs& args) {
    GradCheckOptions options;
    options.seed = args.seed;
    options.trials = args.trials;
    options.step = args.step;
    options.tolerance = args.tolerance;
    options.inject_error = args.inject_error;

    GradCheckReport report = distill::run_gradcheck(options);
    std::cerr << "gradcheck: max relative error " << report.max_rel_err << " over "
              << report.trials << " trial(s), tolerance " << options.tolerance << ": "
              << (report.passed ? "PASS" : "FAIL") << "\n";
    return report.passed ? kExitOk : kExitValidation;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"reward-guided dataset curation, weighting and toy distillation toolkit"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CurateArgs curate_args;
    CurateArgs score_args;
    for (auto [sub_name, args, desc] :
         {std::tuple{"curate", &curate_args,
                     "score groups, keep those with a correct response, emit weighted dataset"},
          std::tuple{"score", &score_args,
                     "score groups and emit all of them (no zero-correct filter)"}}) {
        CLI::App* sub = app.add_subcommand(sub_name, desc);
        sub->add_option("--input", args->input, "generations JSONL file")->required();
        sub->add_option("--output", args->output, "scored dataset JSONL file")->required();
        sub->add_option("--stats", args->stats_path, "statistics JSON file")->required();
        sub->add_option("--config", args->config_path, "configuration JSON file");
        sub->add_option("--workers", args->workers, "parallel scoring workers");
        sub->add_option("--manifest", args->manifest_path, "run manifest path");
    }

    StatsArgs stats_args;
    CLI::App* stats_cmd = app.add_subcommand("stats", "recompute statistics from a scored file");
    stats_cmd->add_option("--input", stats_args.input, "scored dataset JSONL file")->required();
    stats_cmd->add_option("--output", stats_args.output, "statistics JSON file")->required();
    stats_cmd->add_option("--config", stats_args.config_path, "configuration JSON file");
    stats_cmd->add_option("--manifest", stats_args.manifest_path, "run manifest path");

    AnalyzeArgs analyze_args;
    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "behaviour report over evaluation records");
    analyze_cmd->add_option("--input", analyze_args.input, "evaluation JSONL file")->required();
    analyze_cmd->add_option("--output", analyze_args.output, "report JSON file")->required();
    analyze_cmd->add_option("--config", analyze_args.config_path, "configuration JSON file");
    analyze_cmd->add_option("--n-min", analyze_args.n_min, "minimum repeated phrase length");
    analyze_cmd->add_option("--r-min", analyze_args.r_min, "minimum back-to-back repeats");
    analyze_cmd->add_option("--run-min", analyze_args.run_min, "minimum single-token run");
    analyze_cmd->add_option("--manifest", analyze_args.manifest_path, "run manifest path");

    TrainArgs train_args;
    CLI::App* train_cmd =
        app.add_subcommand("train-toy", "fit the toy model on a curated dataset");
    train_cmd->add_option("--dataset", train_args.dataset, "curated JSONL file")->required();
    train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
    train_cmd->add_option("--seed", train_args.seed, "shuffle seed");
    train_cmd->add_option("--lambda-wrong", train_args.lambda_wrong,
                          "contrastive penalty coefficient");
    train_cmd->add_option("--tau", train_args.tau, "weight softmax temperature");
    train_cmd->add_option("--lr", train_args.learning_rate, "learning rate");
    train_cmd->add_option("--max-grad-norm", train_args.max_grad_norm,
                          "global gradient clipping norm");
    train_cmd->add_option("--out", train_args.model_out, "model JSON file")->required();
    train_cmd->add_option("--trace", train_args.trace_out, "loss trace JSON file")->required();
    train_cmd->add_option("--config", train_args.config_path, "configuration JSON file");
    train_cmd->add_option("--manifest", train_args.manifest_path, "run manifest path");

    GradcheckArgs gradcheck_args;
    CLI::App* gradcheck_cmd = app.add_subcommand(
        "gradcheck", "compare analytic gradients against central finite differences");
    gradcheck_cmd->add_option("--seed", gradcheck_args.seed, "trial generator seed");
    gradcheck_cmd->add_option("--trials", gradcheck_args.trials, "number of random trials");
    gradcheck_cmd->add_option("--step", gradcheck_args.step, "finite difference step");
    gradcheck_cmd->add_option("--tolerance", gradcheck_args.tolerance,
                              "maximum accepted relative error");
    gradcheck_cmd
        ->add_option("--inject-error", gradcheck_args.inject_error,
                     "offset added to one analytic gradient entry (self-test hook)")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (app.got_subcommand("curate")) {
            curate_args.workers_set = app.get_subcommand("curate")->count("--workers") > 0;
            return run_curate(curate_args, /*apply_filter=*/true, "curate");
        }
        if (app.got_subcommand("score")) {
            score_args.workers_set = app.get_subcommand("score")->count("--workers") > 0;
            return run_curate(score_args, /*apply_filter=*/false, "score");
        }
        if (app.got_subcommand("stats")) return run_stats(stats_args);
        if (app.got_subcommand("analyze")) {
            analyze_args.n_min_set = analyze_cmd->count("--n-min") > 0;
            analyze_args.r_min_set = analyze_cmd->count("--r-min") > 0;
            analyze_args.run_min_set = analyze_cmd->count("--run-min") > 0;
            return run_analyze(analyze_args);
        }
        if (app.got_subcommand("train-toy")) {
            train_args.lambda_set = train_cmd->count("--lambda-wrong") > 0;
            train_args.tau_set = train_cmd->count("--tau") > 0;
            train_args.lr_set = train_cmd->count("--lr") > 0;
            train_args.norm_set = train_cmd->count("--max-grad-norm") > 0;
            return run_train(train_args);
        }
        if (app.got_subcommand("gradcheck")) return run_gradcheck_cmd(gradcheck_args);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}

} // namespace distill::cli
