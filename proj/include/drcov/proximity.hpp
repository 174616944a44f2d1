#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "drcov/graph.hpp"
#include "drcov/sparse.hpp"

namespace drcov {

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

// Gene-gene subgraph with genes addressed by their local (gene-kind) index.
// Genes are binned by floor(log2(degree)): [1], [2-3], [4-7], ...; isolated
// genes share their own bin (-1).
class GeneInteractome {
public:
    explicit GeneInteractome(SparseMatrix adjacency);
    static GeneInteractome from_graph(const HeteroGraph& graph);
    // Undirected unweighted graph over n genes from an edge list.
    static GeneInteractome from_edges(std::size_t n, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

    std::size_t size() const noexcept { return adjacency_.rows(); }
    const SparseMatrix& adjacency() const noexcept { return adjacency_; }
    std::uint32_t degree(std::uint32_t gene) const { return degree_.at(gene); }
    int bin_of(std::uint32_t gene) const { return bin_.at(gene); }
    const std::map<int, std::vector<std::uint32_t>>& bins() const noexcept { return members_; }

private:
    SparseMatrix adjacency_;
    std::vector<std::uint32_t> degree_;
    std::vector<int> bin_;
    std::map<int, std::vector<std::uint32_t>> members_;
};

int degree_bin(std::uint32_t degree) noexcept;

// Multi-source BFS hop distances; kUnreachable where no path exists.
std::vector<std::uint32_t> shortest_paths(const GeneInteractome& interactome, std::span<const std::uint32_t> sources);

// Closest-distance proximity between two gene sets:
//   (Σ_{p∈C} min_{q∈T} d(p,q) + Σ_{q∈T} min_{p∈C} d(p,q)) / (|C| + |T|)
// nullopt ("not computable") when either set is empty or some minimum is
// infinite.
std::optional<double> proximity(const GeneInteractome& interactome, std::span<const std::uint32_t> drug_genes,
                                std::span<const std::uint32_t> disease_genes);

// One gene from the same degree bin per template gene, distinct within the
// result.
std::vector<std::uint32_t> sample_degree_matched(const GeneInteractome& interactome,
                                                 std::span<const std::uint32_t> template_genes, std::uint64_t seed);

// Every degree-matched set for the template (bin-wise combinations), for
// exhaustive null distributions on small interactomes.
std::vector<std::vector<std::uint32_t>> enumerate_degree_matched(const GeneInteractome& interactome,
                                                                 std::span<const std::uint32_t> template_genes,
                                                                 std::size_t limit = 1'000'000);

struct NullModel {
    enum class Mode { Sampled, Exhaustive };
    Mode mode = Mode::Sampled;
    std::size_t n_perm = 1000;
    std::uint64_t seed = 0;
};

struct ZScore {
    std::optional<double> p;
    std::optional<double> z;
    double mu = 0.0;
    double omega = 0.0;
    std::size_t null_samples = 0;  // computable resamplings that entered mu/omega
};

// Both sets are resampled; mu and omega (population form) come from the
// computable resamplings. Z is not computable when P is not, or omega < 1e-12.
ZScore z_score(const GeneInteractome& interactome, std::span<const std::uint32_t> drug_genes,
               std::span<const std::uint32_t> disease_genes, const NullModel& null_model);

// Gene neighbors (local gene indices, ascending) of a drug or disease node.
std::vector<std::uint32_t> gene_targets(const HeteroGraph& graph, NodeRef node);

struct ProximityScore {
    NodeRef drug;
    NodeRef disease;
    std::optional<double> p;
    std::optional<double> z;
    bool computable() const noexcept { return z.has_value(); }
};

struct ProximityRanking {
    NodeRef disease;
    std::vector<ProximityScore> ordered;  // ascending Z; not computable last; ties by drug index
    std::optional<std::size_t> rank_of(std::uint32_t drug_local) const;
};

// Each drug's null model is seeded from (null_model.seed, drug index), so a
// drug's score does not depend on which other drugs are ranked with it.
ProximityRanking rank_by_proximity(const HeteroGraph& graph, const GeneInteractome& interactome,
                                   std::span<const std::uint32_t> drugs, std::uint32_t disease,
                                   const NullModel& null_model);

// proximity.csv: "drug,disease,P,Z" with NC for not computable.
void write_proximity_csv(std::ostream& out, const HeteroGraph& graph, const ProximityRanking& ranking);

}  // namespace drcov
