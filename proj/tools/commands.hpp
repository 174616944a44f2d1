#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drcov/graph.hpp"
#include "drcov/ingest.hpp"
#include "drcov/trainer.hpp"

namespace drcov::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

// Artifact names inside a stage directory.
inline constexpr const char* kGraphFile = "graph.bin";
inline constexpr const char* kFeatureFile = "features.bin";
inline constexpr const char* kSplitFile = "split.tsv";
inline constexpr const char* kTargetsFile = "targets.tsv";
inline constexpr const char* kCheckpointFile = "checkpoint.bin";
inline constexpr const char* kTrainLogFile = "train_log.csv";
inline constexpr const char* kRocFile = "roc.csv";
inline constexpr const char* kRanksFile = "ranks.csv";
inline constexpr const char* kCovidFile = "covid_report.csv";
inline constexpr const char* kProximityFile = "proximity.csv";

// "<command>.manifest.json"
fs::path manifest_path(const fs::path& dir, const std::string& command);

struct IngestOptions {
    fs::path edges;
    std::optional<fs::path> features;
    std::optional<fs::path> covid;
    std::size_t feature_dim = 400;
    std::size_t negatives = 200'000;
    bool strict_counts = false;
    bool lenient = false;
};

struct TrainOptions {
    fs::path graph_dir;
};

struct EvaluateOptions {
    fs::path graph_dir;
    std::optional<fs::path> checkpoint;  // defaults to <out>/checkpoint.bin
    bool full_ranks = false;
};

struct PredictOptions {
    fs::path graph_dir;
    std::optional<fs::path> checkpoint;
    std::vector<std::string> targets;  // empty: every injected target
    std::size_t k = 10;
    bool full_ranks = false;
};

struct BaselineOptions {
    fs::path graph_dir;
    std::string disease;
    std::size_t n_perm = 1000;
};

// Each command throws drcov::Error on failure; `log` receives warnings and
// progress lines.
void cmd_ingest(const IngestOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log);
void cmd_train(const TrainOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log);
void cmd_predict(const PredictOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log);
void cmd_baseline(const BaselineOptions& opt, const TrainConfig& config, const fs::path& out, std::ostream& log);

// Everything a later stage needs from an ingest directory.
struct StageInputs {
    HeteroGraph graph;
    Matrix features;
    DatasetSplit split;
    CovidTargetSet targets;
};
StageInputs load_stage(const fs::path& graph_dir);

// Leakage-free diffusion: test positives are withheld from the adjacency.
DiffusionFeatures stage_diffusion(const StageInputs& stage, std::size_t radius);

}  // namespace drcov::cli
