#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drcov/dense.hpp"
#include "drcov/sparse.hpp"

namespace drcov {

// [X, ÃX, Ã²X, ...]: hop k holds the normalized adjacency applied k times.
struct DiffusionFeatures {
    std::vector<Matrix> hops;

    std::size_t num_nodes() const noexcept { return hops.empty() ? 0 : hops.front().rows(); }
    std::size_t feature_dim() const noexcept { return hops.empty() ? 0 : hops.front().cols(); }
    std::size_t radius() const noexcept { return hops.empty() ? 0 : hops.size() - 1; }
};

// Iterated sparse products; Ã^k is never formed.
DiffusionFeatures precompute_diffusion(const SparseMatrix& normalized, const Matrix& x, int radius = 2);

struct ModelDims {
    std::size_t input = 400;   // d
    std::size_t hidden = 250;  // h, width of each branch
    std::size_t embed = 250;   // l
    std::size_t radius = 2;    // r; there are r + 1 branches

    std::size_t branches() const noexcept { return radius + 1; }
    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// theta[k] is d x h, w is (r+1)h x l, phi is l x l.
struct ModelParams {
    ModelDims dims;
    std::vector<Matrix> theta;
    Matrix w;
    Matrix phi;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Same shapes as ModelParams.
struct Gradients {
    std::vector<Matrix> theta;
    Matrix w;
    Matrix phi;

    static Gradients zeros_like(const ModelParams& p);
};

// Glorot-uniform: each matrix on [-s, s], s = sqrt(6 / (fan_in + fan_out)).
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

inline constexpr double kLeakySlope = 0.01;

struct EmbeddingMatrix {
    Matrix y;  // rows x l, leaky_relu(z * w)
    Matrix z;  // rows x (r+1)h, tanh of the concatenated branches
};

// Embeds every node.
EmbeddingMatrix encode(const ModelParams& params, const DiffusionFeatures& diffusion);
// Embeds only the listed global rows, in the listed order.
EmbeddingMatrix encode_rows(const ModelParams& params, const DiffusionFeatures& diffusion,
                            std::span<const std::size_t> rows);

// Bilinear logit y_c^T Φ y_d. Callers apply the sigmoid when they need a
// probability; computed as dot(y_c, Φ y_d).
double score(const ModelParams& params, std::span<const double> drug_embedding,
             std::span<const double> disease_embedding);
// Φ y_d, reusable for scoring many drugs against one disease.
std::vector<double> disease_projection(const ModelParams& params, std::span<const double> disease_embedding);

// One labeled drug/disease pair addressed by global node index.
struct LabeledPair {
    std::size_t drug = 0;
    std::size_t disease = 0;
    double label = 0.0;
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

// Batch-mean weighted cross-entropy and its exact gradient. Runs the forward
// pass for the rows the batch touches.
LossAndGradients backward(const ModelParams& params, const DiffusionFeatures& diffusion,
                          std::span<const LabeledPair> batch, double pos_weight);

// Forward-only batch-mean loss.
double batch_loss(const ModelParams& params, const DiffusionFeatures& diffusion,
                  std::span<const LabeledPair> batch, double pos_weight);

// Checkpoint: u64 magic, u64 d/h/l/r, each matrix row-major f64 (theta_0..r,
// w, phi), then u64 FNV-1a of every preceding byte. All little-endian.
std::string serialize_checkpoint(const ModelParams& params);
ModelParams deserialize_checkpoint(std::string_view bytes, const std::string& source = "checkpoint");
void write_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams read_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint64_t kCheckpointMagic = 0x314b43564f435244ULL;  // "DRCOVCK1"

}  // namespace drcov
