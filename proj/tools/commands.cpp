#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "drcov/binary_io.hpp"
#include "drcov/error.hpp"
#include "drcov/evaluator.hpp"
#include "drcov/proximity.hpp"
#include "drcov/random.hpp"
#include "drcov/sign_model.hpp"
#include "drcov/text.hpp"

namespace drcov::cli {

namespace {

using json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_digest(const fs::path& p) { return hex64(fnv1a64(binio::read_file(p))); }

// Manifest: command, resolved config, seed, and FNV-1a digests of every input
// and output file. No timestamps, so reruns produce the same bytes.
class Manifest {
public:
    Manifest(std::string command, const TrainConfig& config) {
        doc_["command"] = std::move(command);
        doc_["tool_version"] = kToolVersion;
        doc_["seed"] = config.seed;
        json cfg = json::object();
        for (auto key : TrainConfig::keys()) cfg[std::string(key)] = config.get(key);
        doc_["config"] = std::move(cfg);
        doc_["parameters"] = json::object();
        doc_["inputs"] = json::object();
        doc_["outputs"] = json::object();
    }

    template <class T>
    void param(const std::string& key, const T& value) {
        doc_["parameters"][key] = value;
    }
    void input(const fs::path& p) { doc_["inputs"][p.filename().string()] = file_digest(p); }
    void output(const fs::path& p) { doc_["outputs"][p.filename().string()] = file_digest(p); }
    void output_digest(const std::string& key, std::uint64_t digest) { doc_["outputs"][key] = hex64(digest); }

    void write(const fs::path& dir) const {
        const auto cmd = doc_["command"].get<std::string>();
        binio::write_file(manifest_path(dir, cmd), doc_.dump(2) + "\n");
    }

private:
    json doc_;
};

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw ValidationError("missing " + what + ": " + p.string());
}

void write_text(const fs::path& p, const std::string& text) { binio::write_file(p, text); }

fs::path checkpoint_or_default(const std::optional<fs::path>& given, const fs::path& out) {
    auto p = given.value_or(out / kCheckpointFile);
    require_file(p, "checkpoint");
    return p;
}

std::vector<std::string> global_names(const HeteroGraph& graph) {
    std::vector<std::string> names;
    names.reserve(graph.num_nodes());
    for (auto kind : kEntityKinds)
        for (const auto& n : graph.names(kind)) names.push_back(n);
    return names;
}

void report_warnings(std::ostream& log, const std::vector<std::string>& warnings, std::size_t shown = 10) {
    for (std::size_t i = 0; i < std::min(shown, warnings.size()); ++i) log << "warning: " << warnings[i] << '\n';
    if (warnings.size() > shown) log << "warning: ... " << warnings.size() - shown << " more\n";
}

void write_targets(const fs::path& p, const HeteroGraph& graph, const CovidTargetSet& targets) {
    std::ostringstream out;
    out << "# links\t" << targets.links << '\n';
    for (const auto& t : targets.targets) out << graph.name(t) << '\n';
    write_text(p, out.str());
}

CovidTargetSet read_targets(const fs::path& p, const HeteroGraph& graph) {
    std::istringstream in(binio::read_file(p));
    CovidTargetSet out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind("# links\t", 0) == 0) {
            out.links = std::stoull(line.substr(8));
            continue;
        }
        const auto ref = graph.find(line);
        if (!ref || ref->kind != EntityKind::Disease)
            throw ParseError(p.string() + ":" + std::to_string(lineno) + ": unknown target '" + line + "'");
        out.targets.push_back(*ref);
    }
    return out;
}

}  // namespace

fs::path manifest_path(const fs::path& dir, const std::string& command) { return dir / (command + ".manifest.json"); }

void cmd_ingest(const IngestOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log) {
    config.validate();
    require_file(opt.edges, "edge file");
    const auto mode = opt.lenient ? ParseMode::Lenient : ParseMode::Strict;
    Manifest manifest("ingest", config);
    manifest.input(opt.edges);

    const auto parsed = parse_edge_file(opt.edges, mode);
    for (const auto& issue : parsed.issues)
        log << "warning: " << opt.edges.string() << ':' << issue.line << ": " << issue.message << '\n';
    HeteroGraph graph = build_graph(parsed.records);
    const auto base_counts = count_graph(graph);

    CovidTargetSet targets;
    if (opt.covid) {
        require_file(*opt.covid, "covid edge file");
        manifest.input(*opt.covid);
        const auto covid = parse_edge_file(*opt.covid, mode);
        for (const auto& issue : covid.issues)
            log << "warning: " << opt.covid->string() << ':' << issue.line << ": " << issue.message << '\n';
        targets = inject_covid_nodes(graph, covid.records);
    }
    graph.relations().close();
    const auto positives = positive_pairs(graph);

    if (opt.strict_counts) {
        std::vector<std::string> problems;
        try {
            check_counts(base_counts, kFullGraphCounts);
        } catch (const ValidationError& e) {
            problems.emplace_back(e.what());
        }
        if (positives.size() != kFullPositiveCount)
            problems.push_back("positive pairs: expected " + std::to_string(kFullPositiveCount) + ", got " +
                               std::to_string(positives.size()));
        if (targets.targets.size() != kFullCovidTargets)
            problems.push_back("covid targets: expected " + std::to_string(kFullCovidTargets) + ", got " +
                               std::to_string(targets.targets.size()));
        if (targets.links != kFullCovidLinks)
            problems.push_back("covid gene links: expected " + std::to_string(kFullCovidLinks) + ", got " +
                               std::to_string(targets.links));
        if (!problems.empty()) {
            std::string msg = "count validation failed";
            for (const auto& p : problems) msg += "\n  " + p;
            throw ValidationError(msg);
        }
    }
    if (positives.empty()) throw ValidationError("no drug-disease treatment links in " + opt.edges.string());

    std::vector<std::uint32_t> excluded;
    for (const auto& t : targets.targets) excluded.push_back(t.local);
    std::size_t n_neg = opt.negatives;
    const auto capacity = negative_capacity(graph, positives, excluded);
    if (n_neg > capacity) {
        log << "warning: only " << capacity << " negative pairs available; sampling " << capacity << " instead of "
            << n_neg << '\n';
        n_neg = capacity;
    }
    const auto split = make_dataset_split(graph, config.seed, config.test_fraction, n_neg, excluded);

    std::optional<FeatureTable> table;
    std::size_t dim = opt.feature_dim;
    if (opt.features) {
        require_file(*opt.features, "feature file");
        manifest.input(*opt.features);
        table = load_feature_file(*opt.features);
        dim = table->dim();
    }
    std::vector<std::string> warnings;
    const auto x = assemble_features(graph, table ? &*table : nullptr, dim, &warnings);
    report_warnings(log, warnings);

    fs::create_directories(out);
    binio::write_file(out / kGraphFile, graph.serialize());
    write_feature_file(out / kFeatureFile, global_names(graph), x);
    {
        std::ostringstream s;
        write_split(s, graph, split);
        write_text(out / kSplitFile, s.str());
    }
    write_targets(out / kTargetsFile, graph, targets);

    manifest.param("strict_counts", opt.strict_counts);
    manifest.param("lenient", opt.lenient);
    manifest.param("negatives", n_neg);
    manifest.param("feature_dim", dim);
    for (const char* f : {kGraphFile, kFeatureFile, kSplitFile, kTargetsFile}) manifest.output(out / f);
    manifest.output(out / (std::string(kFeatureFile) + ".names"));
    manifest.write(out);

    const auto c = count_graph(graph);
    log << "ingest: " << c.nodes[0] << " drugs, " << c.nodes[1] << " diseases, " << c.nodes[2] << " genes, "
        << c.nodes[3] << " anatomies, " << c.links << " links; " << positives.size() << " positives ("
        << split.train_pos.size() << " train / " << split.test_pos.size() << " test), " << n_neg << " negatives, "
        << targets.targets.size() << " prediction targets\n";
}

StageInputs load_stage(const fs::path& graph_dir) {
    for (const char* f : {kGraphFile, kFeatureFile, kSplitFile, kTargetsFile})
        require_file(graph_dir / f, "ingest artifact");
    StageInputs s;
    s.graph = HeteroGraph::deserialize(binio::read_file(graph_dir / kGraphFile), (graph_dir / kGraphFile).string());
    const auto table = load_feature_file(graph_dir / kFeatureFile);
    if (table.size() != s.graph.num_nodes())
        throw ValidationError("features.bin has " + std::to_string(table.size()) + " rows for " +
                              std::to_string(s.graph.num_nodes()) + " nodes");
    s.features = assemble_features(s.graph, &table, table.dim());
    {
        std::ifstream in(graph_dir / kSplitFile);
        s.split = read_split(in, s.graph, (graph_dir / kSplitFile).string());
    }
    s.targets = read_targets(graph_dir / kTargetsFile, s.graph);
    return s;
}

DiffusionFeatures stage_diffusion(const StageInputs& stage, std::size_t radius) {
    const auto adj = build_adjacency(stage.graph, withheld_pairs(stage.graph, stage.split));
    return precompute_diffusion(normalize_adjacency(adj), stage.features, static_cast<int>(radius));
}

namespace {

void add_stage_inputs(Manifest& m, const fs::path& dir) {
    for (const char* f : {kGraphFile, kFeatureFile, kSplitFile, kTargetsFile}) m.input(dir / f);
}

}  // namespace

void cmd_train(const TrainOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log) {
    config.validate();
    const auto stage = load_stage(opt.graph_dir);
    const auto diffusion = stage_diffusion(stage, config.radius);
    fs::create_directories(out);
    const auto ckpt = out / kCheckpointFile;
    auto result = train(stage.graph, diffusion, stage.split, config, ckpt,
                        [&](std::size_t epoch, double loss, double seconds) {
                            log << "epoch " << epoch << ": loss " << loss << " (" << seconds << " s)\n";
                        });
    std::ostringstream s;
    write_train_log(s, result.report);
    write_text(out / kTrainLogFile, s.str());

    Manifest manifest("train", config);
    add_stage_inputs(manifest, opt.graph_dir);
    manifest.output(ckpt);
    // The seconds column varies run to run; only the losses are digested.
    std::string losses;
    for (std::size_t e = 0; e < result.report.epoch_loss.size(); ++e)
        losses += std::to_string(e + 1) + "," + format_real(result.report.epoch_loss[e]) + "\n";
    manifest.output_digest("train_log.csv:epoch,mean_loss", fnv1a64(losses));
    manifest.write(out);
}

namespace {

struct Trained {
    ModelParams params;
    Matrix embeddings;
};

Trained load_trained(const StageInputs& stage, const fs::path& ckpt) {
    Trained t{read_checkpoint(ckpt), {}};
    if (t.params.dims.input != stage.features.cols())
        throw ValidationError("checkpoint expects " + std::to_string(t.params.dims.input) +
                              "-dimensional features, stage has " + std::to_string(stage.features.cols()));
    const auto diffusion = stage_diffusion(stage, t.params.dims.radius);
    t.embeddings = encode(t.params, diffusion).y;
    return t;
}

}  // namespace

void cmd_evaluate(const EvaluateOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log) {
    const auto ckpt = checkpoint_or_default(opt.checkpoint, out);
    const auto stage = load_stage(opt.graph_dir);
    const auto model = load_trained(stage, ckpt);
    const auto eval = evaluate_test_set(model.params, model.embeddings, stage.graph, stage.split);

    fs::create_directories(out);
    {
        std::ostringstream s;
        write_roc_csv(s, eval.roc);
        write_text(out / kRocFile, s.str());
    }
    {
        std::ostringstream s;
        write_ranks_csv(s, stage.graph, eval, opt.full_ranks);
        write_text(out / kRanksFile, s.str());
    }
    Manifest manifest("evaluate", config);
    add_stage_inputs(manifest, opt.graph_dir);
    manifest.input(ckpt);
    manifest.param("full_ranks", opt.full_ranks);
    manifest.output(out / kRocFile);
    manifest.output(out / kRanksFile);
    manifest.write(out);

    std::vector<std::size_t> ranks;
    for (const auto& h : eval.held_out) ranks.push_back(h.rank);
    std::sort(ranks.begin(), ranks.end());
    log << "evaluate: AUROC " << format_real(eval.roc.auroc) << " over " << eval.test_logits.size()
        << " test pairs";
    if (!ranks.empty()) log << "; median held-out rank " << ranks[(ranks.size() - 1) / 2] << " of "
                            << stage.graph.count(EntityKind::Drug);
    log << '\n';
}

void cmd_predict(const PredictOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log) {
    const auto ckpt = checkpoint_or_default(opt.checkpoint, out);
    const auto stage = load_stage(opt.graph_dir);
    CovidTargetSet targets;
    if (opt.targets.empty()) {
        targets = stage.targets;
    } else {
        for (const auto& name : opt.targets) {
            const auto ref = stage.graph.find(name);
            if (!ref || ref->kind != EntityKind::Disease)
                throw ValidationError("predict: '" + name + "' is not a disease node of the graph");
            targets.targets.push_back(*ref);
        }
    }
    if (targets.empty()) throw ValidationError("predict: no prediction targets (ingest was run without --covid)");

    const auto model = load_trained(stage, ckpt);
    const auto report = covid_report(model.params, model.embeddings, stage.graph, targets, opt.k);
    fs::create_directories(out);
    std::ostringstream s;
    write_covid_csv(s, stage.graph, report, opt.full_ranks);
    write_text(out / kCovidFile, s.str());

    Manifest manifest("predict", config);
    add_stage_inputs(manifest, opt.graph_dir);
    manifest.input(ckpt);
    manifest.param("k", opt.k);
    manifest.param("targets", opt.targets);
    manifest.param("full_ranks", opt.full_ranks);
    manifest.output(out / kCovidFile);
    manifest.write(out);
    log << "predict: " << targets.targets.size() << " targets, top " << opt.k << ", " << report.union_drugs.size()
        << " drugs in the union\n";
}

void cmd_baseline(const BaselineOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log) {
    require_file(opt.graph_dir / kGraphFile, "ingest artifact");
    const auto graph =
        HeteroGraph::deserialize(binio::read_file(opt.graph_dir / kGraphFile), (opt.graph_dir / kGraphFile).string());
    const auto ref = graph.find(opt.disease);
    if (!ref || ref->kind != EntityKind::Disease)
        throw ValidationError("baseline: '" + opt.disease + "' is not a disease node of the graph");
    if (opt.n_perm == 0) throw ValidationError("baseline: n_perm must be positive");
    const auto interactome = GeneInteractome::from_graph(graph);
    if (interactome.adjacency().nnz() == 0) throw ValidationError("baseline: the gene interactome has no edges");
    if (gene_targets(graph, *ref).empty())
        log << "warning: " << opt.disease << " has no gene targets; every score is NC\n";

    const NullModel null_model{NullModel::Mode::Sampled, opt.n_perm, config.seed};
    const auto ranking = rank_by_proximity(graph, interactome, all_drugs(graph), ref->local, null_model);
    fs::create_directories(out);
    std::ostringstream s;
    write_proximity_csv(s, graph, ranking);
    write_text(out / kProximityFile, s.str());

    Manifest manifest("baseline", config);
    manifest.input(opt.graph_dir / kGraphFile);
    manifest.param("disease", opt.disease);
    manifest.param("n_perm", opt.n_perm);
    manifest.output(out / kProximityFile);
    manifest.write(out);
    const auto computable =
        std::count_if(ranking.ordered.begin(), ranking.ordered.end(), [](const auto& p) { return p.computable(); });
    log << "baseline: " << computable << " of " << ranking.ordered.size() << " drugs computable\n";
}

}  // namespace drcov::cli
