#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drcov/graph.hpp"
#include "drcov/ingest.hpp"
#include "drcov/loss.hpp"
#include "drcov/sign_model.hpp"

namespace drcov {

struct TrainConfig {
    std::size_t batch_size = 512;
    std::size_t epochs = 20;
    double learning_rate = 0.01;
    double pos_weight = 1.5;
    double batch_neg_pos_ratio = 1.5;
    std::uint64_t seed = 0;
    double test_fraction = 0.10;
    std::size_t hidden_dim = 250;
    std::size_t embed_dim = 250;
    std::size_t radius = 2;

    void validate() const;
    // Applies one "key = value" setting; unknown keys throw ValidationError.
    void set(const std::string& key, const std::string& value);
    // Every key accepted by set(), in declaration order.
    static std::span<const std::string_view> keys();
    std::string get(std::string_view key) const;
};

// "key = value" lines; '#' starts a comment.
void apply_config_stream(TrainConfig& config, std::istream& in, const std::string& source);
void apply_config_file(TrainConfig& config, const std::filesystem::path& path);
// Reads <prefix><KEY> (upper-case key) for every key present in the environment.
void apply_config_env(TrainConfig& config, const std::string& prefix = "DRCOV_");

struct Batch {
    std::vector<LinkPair> pairs;
    std::vector<std::uint8_t> labels;
    std::size_t size() const noexcept { return pairs.size(); }
    std::size_t positives() const noexcept;
};

// Positives per full batch: round(batch_size / (1 + ratio)); the rest are
// negatives.
std::size_t positives_per_batch(std::size_t batch_size, double ratio);

// One epoch of batches. Negatives are shuffled and each used once; positives
// are drawn with replacement to hold the configured ratio, including on the
// short final batch. A ratio of 0 yields a single shuffled pass over the
// positives.
std::vector<Batch> make_batches(std::span<const LinkPair> train_pos, std::span<const LinkPair> train_neg,
                                std::size_t batch_size, double ratio, std::uint64_t epoch_seed);

// θ ← θ − lr·g for every tensor.
void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate);

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_seconds;
    double wall_seconds = 0.0;
    std::optional<std::filesystem::path> checkpoint;
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

std::vector<LabeledPair> to_labeled(const HeteroGraph& graph, std::span<const LinkPair> pairs, double label);

// Mean weighted loss over the given positive and negative pairs.
double dataset_loss(const ModelParams& params, const DiffusionFeatures& diffusion, const HeteroGraph& graph,
                    std::span<const LinkPair> pos, std::span<const LinkPair> neg, double pos_weight);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss, double seconds)>;

// Epochs of batched forward/backward/SGD over split's train fold. The batch
// size is capped at the train fold size. Initial parameters come from
// init_params with a seed derived from config.seed.
TrainResult train(const HeteroGraph& graph, const DiffusionFeatures& diffusion, const DatasetSplit& split,
                  const TrainConfig& config, const std::optional<std::filesystem::path>& checkpoint = {},
                  const EpochCallback& on_epoch = {});

ModelDims model_dims(const TrainConfig& config, std::size_t input_dim);
std::uint64_t param_seed(const TrainConfig& config);

// "epoch,mean_loss,seconds" CSV.
void write_train_log(std::ostream& out, const TrainReport& report);

}  // namespace drcov
