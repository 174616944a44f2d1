#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "commands.hpp"
#include "drcov/error.hpp"
#include "drcov/evaluator.hpp"
#include "drcov/ingest.hpp"
#include "drcov/loss.hpp"
#include "drcov/proximity.hpp"
#include "drcov/trainer.hpp"

namespace py = pybind11;
using namespace drcov;
namespace fs = std::filesystem;

namespace {

// Values may be str, int or float; each goes through TrainConfig::set.
TrainConfig make_config(const py::dict& overrides) {
    TrainConfig c;
    for (auto [k, v] : overrides) c.set(py::str(k), py::str(v));
    c.validate();
    return c;
}

using Edges = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// "drug", "disease", "gene", "anatomy"
EntityKind parse_kind(const std::string& s) {
    static constexpr const char* names[] = {"drug", "disease", "gene", "anatomy"};
    for (std::size_t i = 0; i < kEntityKinds.size(); ++i)
        if (s == names[i]) return kEntityKinds[i];
    throw ValidationError("unknown entity kind '" + s + "'");
}

template <class Fn>
std::string run_logged(Fn&& fn) {
    std::ostringstream log;
    {
        py::gil_scoped_release release;
        fn(log);
    }
    return log.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    auto base = py::register_exception<Error>(m, "DrcovError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

    m.attr("__version__") = cli::kToolVersion;

    m.def("config_defaults", [] {
        TrainConfig c;
        py::dict d;
        for (auto key : TrainConfig::keys()) d[py::str(std::string(key))] = c.get(key);
        return d;
    });

    py::class_<HeteroGraph>(m, "Graph")
        .def_static("load", [](const fs::path& path) { return cli::load_stage(path).graph; }, py::arg("stage_dir"))
        .def_static("from_edges",
                    [](const fs::path& path, bool lenient) {
                        return build_graph(parse_edge_file(path, lenient ? ParseMode::Lenient : ParseMode::Strict).records);
                    },
                    py::arg("path"), py::arg("lenient") = false)
        .def_property_readonly("num_nodes", &HeteroGraph::num_nodes)
        .def_property_readonly("num_edges", &HeteroGraph::num_edges)
        .def("count", [](const HeteroGraph& g, const std::string& kind) { return g.count(parse_kind(kind)); })
        .def("names",
             [](const HeteroGraph& g, const std::string& kind) {
                 const auto n = g.names(parse_kind(kind));
                 return std::vector<std::string>(n.begin(), n.end());
             })
        .def("positive_pairs", [](const HeteroGraph& g) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& p : positive_pairs(g))
                out.emplace_back(g.name({EntityKind::Drug, p.drug}), g.name({EntityKind::Disease, p.disease}));
            return out;
        });

    m.def("weighted_bce", &weighted_bce, py::arg("logit"), py::arg("label"), py::arg("pos_weight") = 1.5);

    m.def(
        "auroc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            std::vector<std::uint8_t> l(labels.begin(), labels.end());
            const auto roc = auroc(scores, l);
            std::vector<std::tuple<double, double, double>> pts;
            for (const auto& p : roc.points) pts.emplace_back(p.threshold, p.fpr, p.tpr);
            return py::make_tuple(roc.auroc, pts);
        },
        py::arg("scores"), py::arg("labels"), "Returns (auroc, [(threshold, fpr, tpr), ...]).");

    m.def(
        "proximity",
        [](std::size_t n, const Edges& edges, const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
            return proximity(GeneInteractome::from_edges(n, edges), a, b);
        },
        py::arg("n_genes"), py::arg("edges"), py::arg("drug_genes"), py::arg("disease_genes"));

    m.def(
        "z_score",
        [](std::size_t n, const Edges& edges, const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
           std::size_t n_perm, std::uint64_t seed, bool exhaustive) {
            const NullModel null{exhaustive ? NullModel::Mode::Exhaustive : NullModel::Mode::Sampled, n_perm, seed};
            const auto z = z_score(GeneInteractome::from_edges(n, edges), a, b, null);
            py::dict d;
            d["p"] = z.p;
            d["z"] = z.z;
            d["mu"] = z.mu;
            d["omega"] = z.omega;
            d["null_samples"] = z.null_samples;
            return d;
        },
        py::arg("n_genes"), py::arg("edges"), py::arg("drug_genes"), py::arg("disease_genes"),
        py::arg("n_perm") = 1000, py::arg("seed") = 0, py::arg("exhaustive") = false);

    // Pipeline stages: each writes its artifacts under `out` and returns the log text.
    m.def(
        "ingest",
        [](const fs::path& edges, const fs::path& out, std::optional<fs::path> features, std::optional<fs::path> covid,
           std::size_t feature_dim, std::size_t negatives, bool strict_counts, bool lenient, const py::dict& config) {
            cli::IngestOptions o{edges, features, covid, feature_dim, negatives, strict_counts, lenient};
            const auto c = make_config(config);
            return run_logged([&](std::ostream& log) { cli::cmd_ingest(o, c, out, log); });
        },
        py::arg("edges"), py::arg("out"), py::arg("features") = py::none(), py::arg("covid") = py::none(),
        py::arg("feature_dim") = 400, py::arg("negatives") = 200000, py::arg("strict_counts") = false,
        py::arg("lenient") = false, py::arg("config") = py::dict());

    m.def(
        "train",
        [](const fs::path& graph_dir, const fs::path& out, const py::dict& config) {
            const auto c = make_config(config);
            return run_logged([&](std::ostream& log) { cli::cmd_train({graph_dir}, c, out, log); });
        },
        py::arg("graph_dir"), py::arg("out"), py::arg("config") = py::dict());

    m.def(
        "evaluate",
        [](const fs::path& graph_dir, const fs::path& out, std::optional<fs::path> checkpoint, bool full_ranks,
           const py::dict& config) {
            const auto c = make_config(config);
            return run_logged([&](std::ostream& log) { cli::cmd_evaluate({graph_dir, checkpoint, full_ranks}, c, out, log); });
        },
        py::arg("graph_dir"), py::arg("out"), py::arg("checkpoint") = py::none(), py::arg("full_ranks") = false,
        py::arg("config") = py::dict());

    m.def(
        "predict",
        [](const fs::path& graph_dir, const fs::path& out, std::optional<fs::path> checkpoint,
           std::vector<std::string> targets, std::size_t k, bool full_ranks, const py::dict& config) {
            const auto c = make_config(config);
            cli::PredictOptions o{graph_dir, checkpoint, std::move(targets), k, full_ranks};
            return run_logged([&](std::ostream& log) { cli::cmd_predict(o, c, out, log); });
        },
        py::arg("graph_dir"), py::arg("out"), py::arg("checkpoint") = py::none(),
        py::arg("targets") = std::vector<std::string>{}, py::arg("k") = 10, py::arg("full_ranks") = false,
        py::arg("config") = py::dict());

    m.def(
        "baseline",
        [](const fs::path& graph_dir, const fs::path& out, const std::string& disease, std::size_t n_perm,
           const py::dict& config) {
            const auto c = make_config(config);
            return run_logged([&](std::ostream& log) { cli::cmd_baseline({graph_dir, disease, n_perm}, c, out, log); });
        },
        py::arg("graph_dir"), py::arg("out"), py::arg("disease"), py::arg("n_perm") = 1000,
        py::arg("config") = py::dict());
}
