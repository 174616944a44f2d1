#include "drcov/sign_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "drcov/binary_io.hpp"
#include "drcov/error.hpp"
#include "drcov/loss.hpp"
#include "drcov/random.hpp"

namespace drcov {

DiffusionFeatures precompute_diffusion(const SparseMatrix& normalized, const Matrix& x, int radius) {
    if (radius < 0) throw ShapeError("precompute_diffusion: radius must be >= 0");
    if (!normalized.is_square() || normalized.cols() != x.rows())
        throw ShapeError("precompute_diffusion: operator " + std::to_string(normalized.rows()) + "x" +
                         std::to_string(normalized.cols()) + " vs features with " + std::to_string(x.rows()) +
                         " rows");
    DiffusionFeatures out;
    out.hops.reserve(static_cast<std::size_t>(radius) + 1);
    out.hops.push_back(x);
    for (int k = 1; k <= radius; ++k) out.hops.push_back(spmm(normalized, out.hops.back()));
    return out;
}

Gradients Gradients::zeros_like(const ModelParams& p) {
    Gradients g;
    for (const auto& t : p.theta) g.theta.emplace_back(t.rows(), t.cols());
    g.w = Matrix(p.w.rows(), p.w.cols());
    g.phi = Matrix(p.phi.rows(), p.phi.cols());
    return g;
}

namespace {

void glorot_fill(Matrix& m, Rng& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (auto& v : m.values()) v = rng.uniform(-s, s);
}

void check_dims(const ModelParams& params, const DiffusionFeatures& diffusion) {
    if (diffusion.hops.size() != params.dims.branches())
        throw ShapeError("model expects " + std::to_string(params.dims.branches()) + " diffusion hops, got " +
                         std::to_string(diffusion.hops.size()));
    if (diffusion.feature_dim() != params.dims.input)
        throw ShapeError("model expects feature dim " + std::to_string(params.dims.input) + ", got " +
                         std::to_string(diffusion.feature_dim()));
}

double leaky(double q) noexcept { return q > 0.0 ? q : kLeakySlope * q; }

// Forward pass over per-hop input rows (all hop matrices share a row order).
EmbeddingMatrix forward(const ModelParams& params, std::span<const Matrix* const> inputs) {
    const auto h = params.dims.hidden;
    const auto m = inputs.front()->rows();
    EmbeddingMatrix out;
    out.z = Matrix(m, params.dims.branches() * h);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Matrix branch = matmul(*inputs[k], params.theta[k]);
        if (!branch.all_finite())
            throw NumericError("encode: non-finite value in diffusion branch " + std::to_string(k));
        for (std::size_t i = 0; i < m; ++i) {
            const auto src = branch.row(i);
            auto dst = out.z.row(i).subspan(k * h, h);
            for (std::size_t j = 0; j < h; ++j) dst[j] = std::tanh(src[j]);
        }
    }
    out.y = matmul(out.z, params.w);
    for (auto& v : out.y.values()) v = leaky(v);
    if (!out.y.all_finite()) throw NumericError("encode: non-finite value in output embedding");
    return out;
}

// Pre-activation Q = Z W is recovered from Y since leaky_relu is invertible.
double leaky_grad_from_output(double y) noexcept { return y > 0.0 ? 1.0 : kLeakySlope; }

}  // namespace

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
    if (dims.input == 0 || dims.hidden == 0 || dims.embed == 0)
        throw ShapeError("init_params: dimensions must be positive");
    Rng rng(seed);
    ModelParams p;
    p.dims = dims;
    for (std::size_t k = 0; k < dims.branches(); ++k) {
        p.theta.emplace_back(dims.input, dims.hidden);
        glorot_fill(p.theta.back(), rng);
    }
    p.w = Matrix(dims.branches() * dims.hidden, dims.embed);
    glorot_fill(p.w, rng);
    p.phi = Matrix(dims.embed, dims.embed);
    glorot_fill(p.phi, rng);
    return p;
}

EmbeddingMatrix encode(const ModelParams& params, const DiffusionFeatures& diffusion) {
    check_dims(params, diffusion);
    std::vector<const Matrix*> inputs;
    for (const auto& hop : diffusion.hops) inputs.push_back(&hop);
    return forward(params, inputs);
}

EmbeddingMatrix encode_rows(const ModelParams& params, const DiffusionFeatures& diffusion,
                            std::span<const std::size_t> rows) {
    check_dims(params, diffusion);
    std::vector<Matrix> gathered;
    gathered.reserve(diffusion.hops.size());
    for (const auto& hop : diffusion.hops) gathered.push_back(gather_rows(hop, rows));
    std::vector<const Matrix*> inputs;
    for (const auto& g : gathered) inputs.push_back(&g);
    return forward(params, inputs);
}

std::vector<double> disease_projection(const ModelParams& params, std::span<const double> disease_embedding) {
    return matvec(params.phi, disease_embedding);
}

double score(const ModelParams& params, std::span<const double> drug_embedding,
             std::span<const double> disease_embedding) {
    if (drug_embedding.size() != params.dims.embed || disease_embedding.size() != params.dims.embed)
        throw ShapeError("score: embeddings must have length " + std::to_string(params.dims.embed));
    const auto u = disease_projection(params, disease_embedding);
    return dot(drug_embedding, u);
}

namespace {

struct BatchRows {
    std::vector<std::size_t> rows;           // unique, ascending
    std::vector<std::size_t> drug_pos, disease_pos;  // per pair, into rows
};

BatchRows index_batch(std::span<const LabeledPair> batch) {
    std::map<std::size_t, std::size_t> pos;
    for (const auto& p : batch) {
        pos.emplace(p.drug, 0);
        pos.emplace(p.disease, 0);
    }
    BatchRows br;
    for (auto& [row, idx] : pos) {
        idx = br.rows.size();
        br.rows.push_back(row);
    }
    for (const auto& p : batch) {
        br.drug_pos.push_back(pos.at(p.drug));
        br.disease_pos.push_back(pos.at(p.disease));
    }
    return br;
}

}  // namespace

double batch_loss(const ModelParams& params, const DiffusionFeatures& diffusion,
                  std::span<const LabeledPair> batch, double pos_weight) {
    if (batch.empty()) return 0.0;
    const auto br = index_batch(batch);
    const auto emb = encode_rows(params, diffusion, br.rows);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const double s = score(params, emb.y.row(br.drug_pos[b]), emb.y.row(br.disease_pos[b]));
        loss += weighted_bce(s, batch[b].label, pos_weight);
    }
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw NumericError("batch loss is not finite");
    return loss;
}

LossAndGradients backward(const ModelParams& params, const DiffusionFeatures& diffusion,
                          std::span<const LabeledPair> batch, double pos_weight) {
    LossAndGradients out{0.0, Gradients::zeros_like(params)};
    if (batch.empty()) return out;
    check_dims(params, diffusion);
    const auto& dims = params.dims;
    const auto br = index_batch(batch);
    const auto m = br.rows.size();

    std::vector<Matrix> inputs;
    for (const auto& hop : diffusion.hops) inputs.push_back(gather_rows(hop, br.rows));
    std::vector<const Matrix*> input_ptrs;
    for (const auto& x : inputs) input_ptrs.push_back(&x);
    const auto emb = forward(params, input_ptrs);

    // Decoder: accumulate dL/dΦ and dL/dY.
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    Matrix dy(m, dims.embed);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto yc = emb.y.row(br.drug_pos[b]);
        const auto yd = emb.y.row(br.disease_pos[b]);
        const auto u = disease_projection(params, yd);  // Φ y_d
        const double s = dot(yc, u);
        out.loss += weighted_bce(s, batch[b].label, pos_weight);
        const double g = weighted_bce_grad(s, batch[b].label, pos_weight) * inv_b;
        if (g == 0.0) continue;
        for (std::size_t i = 0; i < dims.embed; ++i) {
            const double gyc = g * yc[i];
            auto phi_row = out.grads.phi.row(i);
            for (std::size_t j = 0; j < dims.embed; ++j) phi_row[j] += gyc * yd[j];
        }
        auto dyc = dy.row(br.drug_pos[b]);
        for (std::size_t i = 0; i < dims.embed; ++i) dyc[i] += g * u[i];
        // Φ^T y_c
        auto dyd = dy.row(br.disease_pos[b]);
        for (std::size_t i = 0; i < dims.embed; ++i) {
            const double gyc = g * yc[i];
            const auto phi_row = params.phi.row(i);
            for (std::size_t j = 0; j < dims.embed; ++j) dyd[j] += gyc * phi_row[j];
        }
    }
    out.loss *= inv_b;
    if (!std::isfinite(out.loss)) throw NumericError("backward: loss is not finite");

    // Y = leaky(Q), Q = Z W
    Matrix dq = dy;
    for (std::size_t i = 0; i < dq.size(); ++i) dq.values()[i] *= leaky_grad_from_output(emb.y.values()[i]);
    out.grads.w = matmul_at_b(emb.z, dq);
    Matrix dz = matmul_a_bt(dq, params.w);

    // Z = tanh(P), P_k = X_k Θ_k
    const auto h = dims.hidden;
    for (std::size_t k = 0; k < dims.branches(); ++k) {
        Matrix dp(m, h);
        for (std::size_t i = 0; i < m; ++i) {
            const auto zi = emb.z.row(i).subspan(k * h, h);
            const auto dzi = dz.row(i).subspan(k * h, h);
            auto dpi = dp.row(i);
            for (std::size_t j = 0; j < h; ++j) dpi[j] = dzi[j] * (1.0 - zi[j] * zi[j]);
        }
        out.grads.theta[k] = matmul_at_b(inputs[k], dp);
    }
    return out;
}

std::string serialize_checkpoint(const ModelParams& params) {
    binio::Writer w;
    w.u64(kCheckpointMagic);
    w.u64(params.dims.input);
    w.u64(params.dims.hidden);
    w.u64(params.dims.embed);
    w.u64(params.dims.radius);
    auto put = [&](const Matrix& m) {
        for (double v : m.values()) w.f64(v);
    };
    for (const auto& t : params.theta) put(t);
    put(params.w);
    put(params.phi);
    const auto& bytes = w.bytes();
    w.u64(fnv1a64({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()}));
    return w.take();
}

ModelParams deserialize_checkpoint(std::string_view bytes, const std::string& source) {
    if (bytes.size() < 48) throw ParseError(source + ": too short for a checkpoint");
    const auto body = bytes.substr(0, bytes.size() - 8);
    binio::Reader tail(bytes.substr(bytes.size() - 8), source);
    const auto expected = tail.u64();
    if (fnv1a64({reinterpret_cast<const unsigned char*>(body.data()), body.size()}) != expected)
        throw ParseError(source + ": checksum mismatch");
    binio::Reader r(body, source);
    if (r.u64() != kCheckpointMagic) throw ParseError(source + ": not a checkpoint file");
    ModelParams p;
    p.dims.input = r.u64();
    p.dims.hidden = r.u64();
    p.dims.embed = r.u64();
    p.dims.radius = r.u64();
    const auto& d = p.dims;
    const auto need = (d.branches() * d.input * d.hidden + d.branches() * d.hidden * d.embed + d.embed * d.embed) * 8;
    if (r.remaining() != need) throw ParseError(source + ": payload size does not match dims");
    auto get = [&](std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        for (auto& v : m.values()) v = r.f64();
        return m;
    };
    for (std::size_t k = 0; k < d.branches(); ++k) p.theta.push_back(get(d.input, d.hidden));
    p.w = get(d.branches() * d.hidden, d.embed);
    p.phi = get(d.embed, d.embed);
    return p;
}

void write_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    binio::write_file(path, serialize_checkpoint(params));
}

ModelParams read_checkpoint(const std::filesystem::path& path) {
    return deserialize_checkpoint(binio::read_file(path), path.string());
}

}  // namespace drcov
