#include "drcov/proximity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

#include "drcov/error.hpp"
#include "drcov/random.hpp"
#include "drcov/text.hpp"

namespace drcov {

int degree_bin(std::uint32_t degree) noexcept {
    return degree == 0 ? -1 : static_cast<int>(std::bit_width(degree)) - 1;
}

GeneInteractome::GeneInteractome(SparseMatrix adjacency) : adjacency_(std::move(adjacency)) {
    if (!adjacency_.is_symmetric()) throw ShapeError("gene interactome must be symmetric");
    degree_ = degrees(adjacency_);
    bin_.resize(degree_.size());
    for (std::uint32_t g = 0; g < degree_.size(); ++g) {
        bin_[g] = degree_bin(degree_[g]);
        members_[bin_[g]].push_back(g);
    }
}

GeneInteractome GeneInteractome::from_edges(std::size_t n,
                                            std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
    std::vector<Triplet> t;
    t.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        if (a == b) continue;
        t.push_back({a, b, 1.0});
        t.push_back({b, a, 1.0});
    }
    return GeneInteractome(SparseMatrix::from_triplets(n, n, std::move(t), DuplicatePolicy::KeepOne));
}

GeneInteractome GeneInteractome::from_graph(const HeteroGraph& graph) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const auto& e : graph.edges())
        if (e.head.kind == EntityKind::Gene && e.tail.kind == EntityKind::Gene) edges.emplace_back(e.head.local, e.tail.local);
    return from_edges(graph.count(EntityKind::Gene), edges);
}

std::vector<std::uint32_t> shortest_paths(const GeneInteractome& interactome, std::span<const std::uint32_t> sources) {
    if (sources.empty()) throw ValidationError("shortest_paths: empty source set");
    const auto& adj = interactome.adjacency();
    std::vector<std::uint32_t> dist(interactome.size(), kUnreachable);
    std::vector<std::uint32_t> frontier;
    for (auto s : sources) {
        if (s >= interactome.size()) throw ValidationError("shortest_paths: source gene out of range");
        if (dist[s] != 0) {
            dist[s] = 0;
            frontier.push_back(s);
        }
    }
    std::vector<std::uint32_t> next;
    for (std::uint32_t level = 1; !frontier.empty(); ++level) {
        next.clear();
        for (auto u : frontier)
            for (auto v : adj.row_cols(u))
                if (dist[v] == kUnreachable) {
                    dist[v] = level;
                    next.push_back(v);
                }
        frontier.swap(next);
    }
    return dist;
}

std::optional<double> proximity(const GeneInteractome& interactome, std::span<const std::uint32_t> drug_genes,
                                std::span<const std::uint32_t> disease_genes) {
    if (drug_genes.empty() || disease_genes.empty()) return std::nullopt;
    const auto from_disease = shortest_paths(interactome, disease_genes);
    const auto from_drug = shortest_paths(interactome, drug_genes);
    std::uint64_t total = 0;
    for (auto p : drug_genes) {
        if (from_disease[p] == kUnreachable) return std::nullopt;
        total += from_disease[p];
    }
    for (auto q : disease_genes) {
        if (from_drug[q] == kUnreachable) return std::nullopt;
        total += from_drug[q];
    }
    return static_cast<double>(total) / static_cast<double>(drug_genes.size() + disease_genes.size());
}

std::vector<std::uint32_t> sample_degree_matched(const GeneInteractome& interactome,
                                                 std::span<const std::uint32_t> template_genes, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> slots;  // bin -> positions in template
    for (std::size_t i = 0; i < template_genes.size(); ++i) slots[interactome.bin_of(template_genes[i])].push_back(i);
    Rng rng(seed);
    std::vector<std::uint32_t> out(template_genes.size());
    for (const auto& [bin, positions] : slots) {
        auto pool = interactome.bins().at(bin);
        if (pool.size() < positions.size())
            throw ValidationError("sample_degree_matched: degree bin " + std::to_string(bin) + " has " +
                                  std::to_string(pool.size()) + " genes, need " + std::to_string(positions.size()));
        // Partial Fisher-Yates: the first |positions| slots become the draw.
        for (std::size_t i = 0; i < positions.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
            out[positions[i]] = pool[i];
        }
    }
    return out;
}

namespace {

void combinations(const std::vector<std::uint32_t>& pool, std::size_t k, std::size_t start,
                  std::vector<std::uint32_t>& current, std::vector<std::vector<std::uint32_t>>& out) {
    if (current.size() == k) {
        out.push_back(current);
        return;
    }
    for (std::size_t i = start; i + (k - current.size()) <= pool.size(); ++i) {
        current.push_back(pool[i]);
        combinations(pool, k, i + 1, current, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<std::vector<std::uint32_t>> enumerate_degree_matched(const GeneInteractome& interactome,
                                                                 std::span<const std::uint32_t> template_genes,
                                                                 std::size_t limit) {
    std::map<int, std::size_t> need;
    for (auto g : template_genes) ++need[interactome.bin_of(g)];
    std::vector<std::vector<std::uint32_t>> sets{{}};
    for (const auto& [bin, count] : need) {
        std::vector<std::vector<std::uint32_t>> per_bin;
        std::vector<std::uint32_t> cur;
        combinations(interactome.bins().at(bin), count, 0, cur, per_bin);
        if (per_bin.empty())
            throw ValidationError("enumerate_degree_matched: degree bin " + std::to_string(bin) + " too small");
        if (sets.size() * per_bin.size() > limit)
            throw ValidationError("enumerate_degree_matched: more than " + std::to_string(limit) + " sets");
        std::vector<std::vector<std::uint32_t>> next;
        next.reserve(sets.size() * per_bin.size());
        for (const auto& s : sets)
            for (const auto& c : per_bin) {
                auto merged = s;
                merged.insert(merged.end(), c.begin(), c.end());
                next.push_back(std::move(merged));
            }
        sets.swap(next);
    }
    for (auto& s : sets) std::sort(s.begin(), s.end());
    return sets;
}

ZScore z_score(const GeneInteractome& interactome, std::span<const std::uint32_t> drug_genes,
               std::span<const std::uint32_t> disease_genes, const NullModel& null_model) {
    ZScore out;
    out.p = proximity(interactome, drug_genes, disease_genes);
    if (!out.p) return out;

    std::vector<double> null;
    if (null_model.mode == NullModel::Mode::Exhaustive) {
        const auto drug_sets = enumerate_degree_matched(interactome, drug_genes);
        const auto disease_sets = enumerate_degree_matched(interactome, disease_genes);
        null.reserve(drug_sets.size() * disease_sets.size());
        for (const auto& c : drug_sets)
            for (const auto& t : disease_sets)
                if (auto p = proximity(interactome, c, t)) null.push_back(*p);
    } else {
        Rng rng(null_model.seed);
        null.reserve(null_model.n_perm);
        for (std::size_t i = 0; i < null_model.n_perm; ++i) {
            const auto c = sample_degree_matched(interactome, drug_genes, rng.next());
            const auto t = sample_degree_matched(interactome, disease_genes, rng.next());
            if (auto p = proximity(interactome, c, t)) null.push_back(*p);
        }
    }
    out.null_samples = null.size();
    if (null.empty()) return out;

    double sum = 0.0;
    for (double v : null) sum += v;
    out.mu = sum / static_cast<double>(null.size());
    double ss = 0.0;
    for (double v : null) ss += (v - out.mu) * (v - out.mu);
    out.omega = std::sqrt(ss / static_cast<double>(null.size()));
    if (out.omega < 1e-12) return out;
    out.z = (*out.p - out.mu) / out.omega;
    return out;
}

namespace {

std::vector<std::vector<std::uint32_t>> gene_targets_of_kind(const HeteroGraph& graph, EntityKind kind) {
    std::vector<std::vector<std::uint32_t>> out(graph.count(kind));
    for (const auto& e : graph.edges()) {
        if (e.head.kind == kind && e.tail.kind == EntityKind::Gene) out[e.head.local].push_back(e.tail.local);
        else if (e.tail.kind == kind && e.head.kind == EntityKind::Gene) out[e.tail.local].push_back(e.head.local);
    }
    for (auto& v : out) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
}

}  // namespace

std::vector<std::uint32_t> gene_targets(const HeteroGraph& graph, NodeRef node) {
    std::vector<std::uint32_t> out;
    for (const auto& e : graph.edges()) {
        if (e.head == node && e.tail.kind == EntityKind::Gene) out.push_back(e.tail.local);
        else if (e.tail == node && e.head.kind == EntityKind::Gene) out.push_back(e.head.local);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<std::size_t> ProximityRanking::rank_of(std::uint32_t drug_local) const {
    for (std::size_t i = 0; i < ordered.size(); ++i)
        if (ordered[i].drug.local == drug_local) return i + 1;
    return std::nullopt;
}

ProximityRanking rank_by_proximity(const HeteroGraph& graph, const GeneInteractome& interactome,
                                   std::span<const std::uint32_t> drugs, std::uint32_t disease,
                                   const NullModel& null_model) {
    if (disease >= graph.count(EntityKind::Disease)) throw ValidationError("rank_by_proximity: unknown disease");
    const NodeRef disease_ref{EntityKind::Disease, disease};
    const auto disease_genes = gene_targets(graph, disease_ref);
    const auto drug_genes = gene_targets_of_kind(graph, EntityKind::Drug);

    ProximityRanking ranking;
    ranking.disease = disease_ref;
    for (auto c : drugs) {
        if (c >= drug_genes.size()) throw ValidationError("rank_by_proximity: unknown drug index");
        NullModel nm = null_model;
        nm.seed = mix_seed(null_model.seed, c);
        const auto zs = z_score(interactome, drug_genes[c], disease_genes, nm);
        ranking.ordered.push_back({{EntityKind::Drug, c}, disease_ref, zs.p, zs.z});
    }
    std::sort(ranking.ordered.begin(), ranking.ordered.end(), [](const ProximityScore& a, const ProximityScore& b) {
        if (a.computable() != b.computable()) return a.computable();
        if (a.computable() && *a.z != *b.z) return *a.z < *b.z;
        return a.drug.local < b.drug.local;
    });
    return ranking;
}

void write_proximity_csv(std::ostream& out, const HeteroGraph& graph, const ProximityRanking& ranking) {
    out << "drug,disease,P,Z\n";
    const auto& disease = graph.name(ranking.disease);
    for (const auto& s : ranking.ordered) {
        out << csv_field(graph.name(s.drug)) << ',' << csv_field(disease) << ',' << (s.p ? format_real(*s.p) : "NC")
            << ',' << (s.z ? format_real(*s.z) : "NC") << '\n';
    }
}

}  // namespace drcov
