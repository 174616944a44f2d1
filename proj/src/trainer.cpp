#include "drcov/trainer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "drcov/error.hpp"
#include "drcov/random.hpp"
#include "drcov/text.hpp"

namespace drcov {

namespace {

constexpr std::array<std::string_view, 10> kConfigKeys{
    "batch_size", "epochs",    "learning_rate", "pos_weight", "batch_neg_pos_ratio",
    "seed",       "test_fraction", "hidden_dim", "embed_dim",  "radius"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ValidationError("config key '" + key + "': cannot parse '" + value + "'");
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size == 0) throw ValidationError("batch_size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("learning_rate must be finite and non-negative");
    if (!(pos_weight > 0.0)) throw ValidationError("pos_weight must be positive");
    if (!(batch_neg_pos_ratio >= 0.0)) throw ValidationError("batch_neg_pos_ratio must be >= 0");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
    if (hidden_dim == 0 || embed_dim == 0) throw ValidationError("model dimensions must be positive");
}

std::span<const std::string_view> TrainConfig::keys() { return kConfigKeys; }

void TrainConfig::set(const std::string& key, const std::string& value) {
    if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value);
    else if (key == "epochs") epochs = parse_number<std::size_t>(key, value);
    else if (key == "learning_rate") learning_rate = parse_number<double>(key, value);
    else if (key == "pos_weight") pos_weight = parse_number<double>(key, value);
    else if (key == "batch_neg_pos_ratio") batch_neg_pos_ratio = parse_number<double>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "test_fraction") test_fraction = parse_number<double>(key, value);
    else if (key == "hidden_dim") hidden_dim = parse_number<std::size_t>(key, value);
    else if (key == "embed_dim") embed_dim = parse_number<std::size_t>(key, value);
    else if (key == "radius") radius = parse_number<std::size_t>(key, value);
    else throw ValidationError("unknown config key '" + key + "'");
}

std::string TrainConfig::get(std::string_view key) const {
    if (key == "batch_size") return std::to_string(batch_size);
    if (key == "epochs") return std::to_string(epochs);
    if (key == "learning_rate") return format_real(learning_rate);
    if (key == "pos_weight") return format_real(pos_weight);
    if (key == "batch_neg_pos_ratio") return format_real(batch_neg_pos_ratio);
    if (key == "seed") return std::to_string(seed);
    if (key == "test_fraction") return format_real(test_fraction);
    if (key == "hidden_dim") return std::to_string(hidden_dim);
    if (key == "embed_dim") return std::to_string(embed_dim);
    if (key == "radius") return std::to_string(radius);
    throw ValidationError("unknown config key '" + std::string(key) + "'");
}

void apply_config_stream(TrainConfig& config, std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ValidationError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        try {
            config.set(trim(std::string_view(stripped).substr(0, eq)), trim(std::string_view(stripped).substr(eq + 1)));
        } catch (const ValidationError& e) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(TrainConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    apply_config_stream(config, in, path.string());
}

void apply_config_env(TrainConfig& config, const std::string& prefix) {
    for (auto key : kConfigKeys) {
        std::string var = prefix;
        for (char c : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (const char* v = std::getenv(var.c_str())) config.set(std::string(key), trim(v));
    }
}

std::size_t Batch::positives() const noexcept {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

std::size_t positives_per_batch(std::size_t batch_size, double ratio) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(batch_size) / (1.0 + ratio)));
}

std::vector<Batch> make_batches(std::span<const LinkPair> train_pos, std::span<const LinkPair> train_neg,
                                std::size_t batch_size, double ratio, std::uint64_t epoch_seed) {
    if (train_pos.empty()) throw ValidationError("make_batches: no positive training pairs");
    if (batch_size == 0) throw ValidationError("make_batches: batch_size must be positive");
    if (!(ratio >= 0.0)) throw ValidationError("make_batches: ratio must be >= 0");
    Rng rng(epoch_seed);
    std::vector<Batch> batches;

    if (ratio == 0.0) {
        std::vector<LinkPair> pos(train_pos.begin(), train_pos.end());
        rng.shuffle(std::span(pos));
        for (std::size_t start = 0; start < pos.size(); start += batch_size) {
            Batch b;
            const auto end = std::min(pos.size(), start + batch_size);
            b.pairs.assign(pos.begin() + static_cast<std::ptrdiff_t>(start), pos.begin() + static_cast<std::ptrdiff_t>(end));
            b.labels.assign(b.pairs.size(), 1);
            batches.push_back(std::move(b));
        }
        return batches;
    }

    const auto pos_full = positives_per_batch(batch_size, ratio);
    const auto neg_full = batch_size - pos_full;
    if (neg_full == 0) throw ValidationError("make_batches: batch_size too small for the requested ratio");

    std::vector<LinkPair> neg(train_neg.begin(), train_neg.end());
    rng.shuffle(std::span(neg));
    for (std::size_t start = 0; start < neg.size(); start += neg_full) {
        const auto n_neg = std::min(neg_full, neg.size() - start);
        const auto n_pos = n_neg == neg_full
                               ? pos_full
                               : static_cast<std::size_t>(std::llround(static_cast<double>(n_neg) / ratio));
        Batch b;
        b.pairs.reserve(n_pos + n_neg);
        for (std::size_t i = 0; i < n_pos; ++i) b.pairs.push_back(train_pos[rng.below(train_pos.size())]);
        b.labels.assign(n_pos, 1);
        b.pairs.insert(b.pairs.end(), neg.begin() + static_cast<std::ptrdiff_t>(start),
                       neg.begin() + static_cast<std::ptrdiff_t>(start + n_neg));
        b.labels.resize(n_pos + n_neg, 0);
        batches.push_back(std::move(b));
    }
    return batches;
}

void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate) {
    auto step = [learning_rate](Matrix& p, const Matrix& g, const char* name) {
        if (p.rows() != g.rows() || p.cols() != g.cols())
            throw ShapeError(std::string("sgd_step: gradient shape mismatch for ") + name);
        if (!g.all_finite()) throw NumericError(std::string("sgd_step: non-finite gradient for ") + name);
        auto pv = p.values();
        auto gv = g.values();
        for (std::size_t i = 0; i < pv.size(); ++i) pv[i] -= learning_rate * gv[i];
    };
    if (grads.theta.size() != params.theta.size()) throw ShapeError("sgd_step: branch count mismatch");
    for (std::size_t k = 0; k < params.theta.size(); ++k) step(params.theta[k], grads.theta[k], "theta");
    step(params.w, grads.w, "W");
    step(params.phi, grads.phi, "Phi");
}

std::vector<LabeledPair> to_labeled(const HeteroGraph& graph, std::span<const LinkPair> pairs, double label) {
    const auto drug_off = graph.offset(EntityKind::Drug);
    const auto disease_off = graph.offset(EntityKind::Disease);
    std::vector<LabeledPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({drug_off + p.drug, disease_off + p.disease, label});
    return out;
}

double dataset_loss(const ModelParams& params, const DiffusionFeatures& diffusion, const HeteroGraph& graph,
                    std::span<const LinkPair> pos, std::span<const LinkPair> neg, double pos_weight) {
    auto all = to_labeled(graph, pos, 1.0);
    const auto n = to_labeled(graph, neg, 0.0);
    all.insert(all.end(), n.begin(), n.end());
    return batch_loss(params, diffusion, all, pos_weight);
}

ModelDims model_dims(const TrainConfig& config, std::size_t input_dim) {
    return {input_dim, config.hidden_dim, config.embed_dim, config.radius};
}

std::uint64_t param_seed(const TrainConfig& config) { return mix_seed(config.seed, 0x5eed); }

TrainResult train(const HeteroGraph& graph, const DiffusionFeatures& diffusion, const DatasetSplit& split,
                  const TrainConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                  const EpochCallback& on_epoch) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    TrainResult result{init_params(model_dims(config, diffusion.feature_dim()), param_seed(config)), {}};
    const auto fold_size = split.train_pos.size() + split.train_neg.size();
    const auto batch_size = std::max<std::size_t>(1, std::min(config.batch_size, fold_size));

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto te = clock::now();
        const auto batches = make_batches(split.train_pos, split.train_neg, batch_size, config.batch_neg_pos_ratio,
                                          mix_seed(config.seed, 1000 + epoch));
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const auto& b = batches[bi];
            std::vector<LabeledPair> labeled = to_labeled(graph, b.pairs, 0.0);
            for (std::size_t i = 0; i < labeled.size(); ++i) labeled[i].label = b.labels[i];
            try {
                const auto lg = backward(result.params, diffusion, labeled, config.pos_weight);
                sgd_step(result.params, lg.grads, config.learning_rate);
                total += lg.loss * static_cast<double>(b.size());
                count += b.size();
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(bi + 1) + ": " +
                                   e.what());
            }
        }
        const double mean = count ? total / static_cast<double>(count) : 0.0;
        if (!std::isfinite(mean)) throw NumericError("epoch " + std::to_string(epoch + 1) + ": mean loss not finite");
        const double secs = std::chrono::duration<double>(clock::now() - te).count();
        result.report.epoch_loss.push_back(mean);
        result.report.epoch_seconds.push_back(secs);
        if (on_epoch) on_epoch(epoch + 1, mean, secs);
    }
    if (checkpoint) {
        write_checkpoint(*checkpoint, result.params);
        result.report.checkpoint = checkpoint;
    }
    result.report.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return result;
}

void write_train_log(std::ostream& out, const TrainReport& report) {
    out << "epoch,mean_loss,seconds\n";
    for (std::size_t i = 0; i < report.epoch_loss.size(); ++i)
        out << i + 1 << ',' << format_real(report.epoch_loss[i]) << ',' << format_real(report.epoch_seconds[i]) << '\n';
}

}  // namespace drcov
