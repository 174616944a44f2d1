#include <algorithm>
#include <cctype>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "drcov/error.hpp"

namespace {

std::string dashed(std::string_view key) {
    std::string s(key);
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace drcov;
    CLI::App app{"drug-disease link prediction on a heterogeneous biomedical graph"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_file;
    std::string out = ".";
    app.add_option("--seed", seed, "random seed (overrides config and environment)");
    app.add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory")->capture_default_str();

    // One flag per config key; precedence is defaults < --config < DRCOV_* < flags.
    std::map<std::string, std::string> overrides;
    for (auto key : TrainConfig::keys()) {
        if (key == "seed") continue;
        app.add_option_function<std::string>(
            "--" + dashed(key), [&overrides, k = std::string(key)](const std::string& v) { overrides[k] = v; },
            "config: " + std::string(key));
    }

    cli::IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "parse triples, inject prediction targets, split links");
    c_ingest->add_option("--edges", ingest.edges, "head<TAB>relation<TAB>tail file")->required();
    c_ingest->add_option("--features", ingest.features, "node feature file (binary or text)");
    c_ingest->add_option("--covid", ingest.covid, "Disease -> Gene edges of the prediction targets");
    c_ingest->add_option("--feature-dim", ingest.feature_dim, "feature width when no feature file is given")
        ->capture_default_str();
    c_ingest->add_option("--negatives", ingest.negatives, "negative pairs to sample")->capture_default_str();
    c_ingest->add_flag("--strict-counts", ingest.strict_counts, "require the full-graph node/link counts");
    c_ingest->add_flag("--lenient", ingest.lenient, "skip malformed lines with a warning");

    cli::TrainOptions train;
    auto* c_train = app.add_subcommand("train", "precompute diffusion and train the encoder/scorer");
    c_train->add_option("--graph", train.graph_dir, "ingest output directory")->required();

    cli::EvaluateOptions evaluate;
    auto* c_eval = app.add_subcommand("evaluate", "ROC curve and held-out rankings on the test fold");
    c_eval->add_option("--graph", evaluate.graph_dir, "ingest output directory")->required();
    c_eval->add_option("--checkpoint", evaluate.checkpoint, "defaults to <out>/checkpoint.bin");
    c_eval->add_flag("--full-ranks", evaluate.full_ranks, "write every drug of every per-disease ranking");

    cli::PredictOptions predict;
    auto* c_pred = app.add_subcommand("predict", "top-K drugs per prediction target");
    c_pred->add_option("--graph", predict.graph_dir, "ingest output directory")->required();
    c_pred->add_option("--checkpoint", predict.checkpoint, "defaults to <out>/checkpoint.bin");
    c_pred->add_option("--targets", predict.targets, "disease node names (default: every injected target)")
        ->delimiter(',');
    c_pred->add_option("-k,--top", predict.k, "drugs kept per target")->capture_default_str();
    c_pred->add_flag("--full-ranks", predict.full_ranks, "fill every union cell with its rank");

    cli::BaselineOptions baseline;
    auto* c_base = app.add_subcommand("baseline", "network-proximity ranking of all drugs for one disease");
    c_base->add_option("--graph", baseline.graph_dir, "ingest output directory")->required();
    c_base->add_option("--disease", baseline.disease, "disease node name")->required();
    c_base->add_option("--n-perm", baseline.n_perm, "degree-matched resamplings")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        TrainConfig config;
        if (config_file) apply_config_file(config, *config_file);
        apply_config_env(config);
        for (const auto& [k, v] : overrides) config.set(k, v);
        if (seed) config.seed = *seed;
        config.validate();

        if (c_ingest->parsed()) cli::cmd_ingest(ingest, config, out, std::cerr);
        else if (c_train->parsed()) cli::cmd_train(train, config, out, std::cerr);
        else if (c_eval->parsed()) cli::cmd_evaluate(evaluate, config, out, std::cerr);
        else if (c_pred->parsed()) cli::cmd_predict(predict, config, out, std::cerr);
        else if (c_base->parsed()) cli::cmd_baseline(baseline, config, out, std::cerr);
    } catch (const drcov::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
