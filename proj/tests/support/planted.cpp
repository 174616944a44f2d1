#include "planted.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "drcov/evaluator.hpp"
#include "drcov/random.hpp"
#include "drcov/sign_model.hpp"

namespace planted {

using namespace drcov;

namespace {

constexpr const char* kTreats = "Hetionet::CtD::Compound:Disease";
constexpr const char* kBinds = "Hetionet::CbG::Compound:Gene";
constexpr const char* kAssoc = "Hetionet::DaG::Disease:Gene";
constexpr const char* kPpi = "STRING::OTHER::Gene:Gene";
constexpr const char* kExpr = "Hetionet::AeG::Anatomy:Gene";
constexpr const char* kViral = "bioarx::VirGenHumGen::Disease:Gene";

template <class T>
std::vector<T> pick(Rng& rng, std::vector<T> pool, std::size_t k) {
    rng.shuffle(std::span<T>(pool));
    pool.resize(std::min(k, pool.size()));
    return pool;
}

}  // namespace

Data generate(const Options& opt) {
    Rng rng(opt.seed);
    Data data;
    data.features = FeatureTable(opt.feature_dim);
    auto edge = [&](const std::string& h, const char* r, const std::string& t) { data.edges.push_back({h, r, t, 0}); };

    const std::size_t n_modules = opt.communities * opt.modules_per_community;
    std::vector<std::vector<std::string>> drugs(n_modules), diseases(n_modules), genes(n_modules);
    std::vector<std::vector<double>> centroid(n_modules);
    std::vector<std::vector<double>> community_centroid(opt.communities);
    for (auto& c : community_centroid)
        for (std::size_t k = 0; k < opt.feature_dim; ++k) c.push_back(rng.normal());

    std::size_t drug_id = 0, disease_id = 0, gene_id = 0;
    for (std::size_t m = 0; m < n_modules; ++m) {
        const auto& cc = community_centroid[m / opt.modules_per_community];
        for (std::size_t k = 0; k < opt.feature_dim; ++k) centroid[m].push_back(cc[k] + 0.7 * rng.normal());
        for (std::size_t i = 0; i < opt.drugs_per_module; ++i) drugs[m].push_back("Compound::DB" + std::to_string(10000 + drug_id++));
        for (std::size_t i = 0; i < opt.diseases_per_module; ++i)
            diseases[m].push_back("Disease::MESH:D" + std::to_string(100000 + disease_id++));
        for (std::size_t i = 0; i < opt.genes_per_module; ++i) genes[m].push_back("Gene::" + std::to_string(5000 + gene_id++));
    }

    for (std::size_t m = 0; m < n_modules; ++m) {
        const auto& g = genes[m];
        for (std::size_t i = 0; i < g.size(); ++i) edge(g[i], kPpi, g[(i + 1) % g.size()]);
        for (const auto& d : drugs[m])
            for (const auto& t : pick(rng, g, 2)) edge(d, kBinds, t);
        for (const auto& s : diseases[m])
            for (const auto& t : pick(rng, g, 3)) edge(s, kAssoc, t);
        for (const auto& d : drugs[m])
            for (const auto& s : diseases[m])
                if (rng.uniform() < opt.treat_probability) edge(d, kTreats, s);
        // link to the sibling module of the same community
        const std::size_t sibling = (m % opt.modules_per_community + 1) % opt.modules_per_community +
                                    (m / opt.modules_per_community) * opt.modules_per_community;
        if (sibling != m) edge(g[0], kPpi, genes[sibling][1]);
    }
    // a few long-range gene links so the interactome is connected
    for (std::size_t m = 0; m < n_modules; ++m) edge(genes[m][2], kPpi, genes[(m + 1) % n_modules][3]);
    for (std::size_t a = 0; a < opt.anatomies; ++a) {
        const auto name = "Anatomy::UBERON:" + std::to_string(1000 + a);
        const std::size_t c = a % opt.communities;
        for (std::size_t j = 0; j < opt.modules_per_community; ++j)
            for (const auto& t : pick(rng, genes[c * opt.modules_per_community + j], 2)) edge(name, kExpr, t);
        std::vector<double> row(community_centroid[c]);
        for (auto& v : row) v += opt.feature_noise * rng.normal();
        data.features.add(name, row);
    }

    for (std::size_t m = 0; m < n_modules; ++m)
        for (const auto* group : {&drugs[m], &diseases[m], &genes[m]})
            for (const auto& name : *group) {
                std::vector<double> row(centroid[m]);
                for (auto& v : row) v += opt.feature_noise * rng.normal();
                data.features.add(name, row);
            }

    for (std::size_t t = 0; t < 2; ++t)
        for (const auto& g : pick(rng, genes[t * opt.modules_per_community], 3))
            data.covid.push_back({"Disease::SARS-CoV2 " + std::string(t == 0 ? "E" : "M"), kViral, g, 0});
    return data;
}

void write_files(const Data& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "edges.tsv");
        for (const auto& e : data.edges) out << e.head_name << '\t' << e.relation << '\t' << e.tail_name << '\n';
    }
    {
        std::ofstream out(dir / "covid.tsv");
        for (const auto& e : data.covid) out << e.head_name << '\t' << e.relation << '\t' << e.tail_name << '\n';
    }
    std::ofstream out(dir / "features.txt");
    out.precision(17);
    for (const auto& name : data.features.names()) {
        out << name << '\t';
        const auto row = *data.features.find(name);
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k];
        out << '\n';
    }
}

TrainConfig config(std::uint64_t seed) {
    TrainConfig c;
    c.seed = seed;
    return c;
}

Outcome run(const Data& data, const TrainConfig& config, std::size_t negatives) {
    auto graph = build_graph(data.edges);
    const auto targets = inject_covid_nodes(graph, data.covid);
    graph.relations().close();
    std::vector<std::uint32_t> excluded;
    for (const auto& t : targets.targets) excluded.push_back(t.local);
    const auto split = make_dataset_split(graph, config.seed, config.test_fraction, negatives, excluded);
    const auto x = assemble_features(graph, &data.features, data.features.dim());
    const auto adj = build_adjacency(graph, withheld_pairs(graph, split));
    const auto diffusion = precompute_diffusion(normalize_adjacency(adj), x, static_cast<int>(config.radius));

    const auto trained = train(graph, diffusion, split, config);
    const auto y = encode(trained.params, diffusion).y;
    const auto eval = evaluate_test_set(trained.params, y, graph, split);

    Outcome o;
    o.auroc = eval.roc.auroc;
    o.drugs = graph.count(EntityKind::Drug);
    o.test_positives = eval.held_out.size();
    o.epoch_loss = trained.report.epoch_loss;
    std::vector<double> ranks;
    for (const auto& h : eval.held_out) ranks.push_back(static_cast<double>(h.rank));
    std::sort(ranks.begin(), ranks.end());
    const auto n = ranks.size();
    o.median_rank = n % 2 ? ranks[n / 2] : 0.5 * (ranks[n / 2 - 1] + ranks[n / 2]);
    return o;
}

}  // namespace planted
