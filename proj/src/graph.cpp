#include "drcov/graph.hpp"

#include <algorithm>
#include <set>

#include "drcov/binary_io.hpp"
#include "drcov/error.hpp"

namespace drcov {

namespace {

constexpr std::uint64_t kGraphMagic = 0x3148504152474344ULL;  // "DCGRAPH1"

std::uint64_t pack(NodeRef r) {
    return (static_cast<std::uint64_t>(r.kind) << 32) | r.local;
}

std::vector<std::string_view> split_tokens(std::string_view s, std::string_view sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + sep.size();
    }
    return out;
}

}  // namespace

std::string_view to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::Drug: return "drug";
        case EntityKind::Disease: return "disease";
        case EntityKind::Gene: return "gene";
        case EntityKind::Anatomy: return "anatomy";
    }
    return "?";
}

std::string_view entity_prefix(EntityKind kind) {
    switch (kind) {
        case EntityKind::Drug: return "Compound::";
        case EntityKind::Disease: return "Disease::";
        case EntityKind::Gene: return "Gene::";
        case EntityKind::Anatomy: return "Anatomy::";
    }
    return "";
}

std::optional<EntityKind> kind_from_name(std::string_view name) {
    for (auto k : kEntityKinds) {
        const auto p = entity_prefix(k);
        if (name.size() > p.size() && name.starts_with(p)) return k;
    }
    return std::nullopt;
}

RelationId RelationRegistry::intern(std::string_view name) {
    if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
    if (closed_) throw ValidationError("relation registry is closed; unknown relation '" + std::string(name) + "'");
    if (name.empty()) throw ValidationError("empty relation label");
    const auto id = static_cast<RelationId>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
}

RelationId RelationRegistry::find(std::string_view name) const {
    if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
    throw ValidationError("unknown relation '" + std::string(name) + "'");
}

bool is_treatment_relation(std::string_view name) {
    const auto tokens = split_tokens(name, "::");
    for (auto t : tokens) {
        if (t == "treats" || t == "palliates" || t == "CtD" || t == "CpD") return true;
    }
    // GNBR's treatment code is a bare "T", only meaningful on Compound:Disease.
    return tokens.size() == 3 && tokens[1] == "T" && tokens[2] == "Compound:Disease";
}

NodeRef HeteroGraph::add_node(std::string_view name) {
    const auto kind = kind_from_name(name);
    if (!kind) throw ValidationError("unknown entity prefix in '" + std::string(name) + "'");
    auto& vocab = vocab_[index(*kind)];
    if (auto it = vocab.find(std::string(name)); it != vocab.end()) return {*kind, it->second};
    auto& names = names_[index(*kind)];
    const auto local = static_cast<std::uint32_t>(names.size());
    names.emplace_back(name);
    vocab.emplace(names.back(), local);
    return {*kind, local};
}

std::optional<NodeRef> HeteroGraph::find(std::string_view name) const {
    const auto kind = kind_from_name(name);
    if (!kind) return std::nullopt;
    const auto& vocab = vocab_[index(*kind)];
    if (auto it = vocab.find(std::string(name)); it != vocab.end()) return NodeRef{*kind, it->second};
    return std::nullopt;
}

std::size_t HeteroGraph::EdgeKeyHash::operator()(const EdgeKey& k) const noexcept {
    std::uint64_t h = k.head * 0x9e3779b97f4a7c15ULL;
    h ^= k.tail + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.relation) * 0xc2b2ae3d27d4eb4fULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
}

bool HeteroGraph::add_edge(NodeRef head, RelationId relation, NodeRef tail) {
    if (relation >= relations_.size()) throw ValidationError("unregistered relation id " + std::to_string(relation));
    if (head.local >= count(head.kind) || tail.local >= count(tail.kind))
        throw ValidationError("edge references a node outside its vocabulary");
    if (!edge_keys_.insert({pack(head), pack(tail), relation}).second) return false;
    edges_.push_back({head, relation, tail});
    return true;
}

std::size_t HeteroGraph::num_nodes() const noexcept {
    std::size_t n = 0;
    for (const auto& v : names_) n += v.size();
    return n;
}

std::uint32_t HeteroGraph::offset(EntityKind kind) const noexcept {
    std::size_t off = 0;
    for (std::size_t k = 0; k < index(kind); ++k) off += names_[k].size();
    return static_cast<std::uint32_t>(off);
}

NodeRef HeteroGraph::from_global(std::uint32_t global) const {
    std::uint32_t g = global;
    for (auto k : kEntityKinds) {
        if (g < count(k)) return {k, g};
        g -= static_cast<std::uint32_t>(count(k));
    }
    throw ShapeError("global index " + std::to_string(global) + " out of range");
}

bool HeteroGraph::is_treatment(const TypedEdge& e) const {
    const bool drug_disease = (e.head.kind == EntityKind::Drug && e.tail.kind == EntityKind::Disease) ||
                              (e.head.kind == EntityKind::Disease && e.tail.kind == EntityKind::Drug);
    return drug_disease && is_treatment_relation(relations_.name(e.relation));
}

std::string HeteroGraph::serialize() const {
    binio::Writer w;
    w.u64(kGraphMagic);
    w.u64(relations_.size());
    for (std::size_t i = 0; i < relations_.size(); ++i) w.str(relations_.name(static_cast<RelationId>(i)));
    w.u64(relations_.closed() ? 1 : 0);
    for (const auto& names : names_) {
        w.u64(names.size());
        for (const auto& n : names) w.str(n);
    }
    w.u64(edges_.size());
    for (const auto& e : edges_) {
        w.u64(pack(e.head));
        w.u64(e.relation);
        w.u64(pack(e.tail));
    }
    return w.take();
}

HeteroGraph HeteroGraph::deserialize(std::string_view bytes, const std::string& source) {
    binio::Reader r(bytes, source);
    if (r.u64() != kGraphMagic) throw ParseError(source + ": not a graph file");
    HeteroGraph g;
    const auto n_rel = r.u64();
    for (std::uint64_t i = 0; i < n_rel; ++i) g.relations_.intern(r.str());
    const bool closed = r.u64() != 0;
    for (auto kind : kEntityKinds) {
        const auto n = r.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto ref = g.add_node(r.str());
            if (ref.kind != kind) throw ParseError(source + ": node stored under the wrong kind");
        }
    }
    const auto n_edges = r.u64();
    auto unpack = [](std::uint64_t v) {
        return NodeRef{static_cast<EntityKind>(v >> 32), static_cast<std::uint32_t>(v & 0xffffffffULL)};
    };
    g.edges_.reserve(n_edges);
    for (std::uint64_t i = 0; i < n_edges; ++i) {
        const auto h = unpack(r.u64());
        const auto rel = static_cast<RelationId>(r.u64());
        const auto t = unpack(r.u64());
        if (static_cast<std::uint8_t>(h.kind) > 3 || static_cast<std::uint8_t>(t.kind) > 3)
            throw ParseError(source + ": bad entity kind in edge " + std::to_string(i));
        g.add_edge(h, rel, t);
    }
    if (r.remaining() != 0) throw ParseError(source + ": trailing bytes");
    if (closed) g.relations_.close();
    return g;
}

SparseMatrix build_adjacency(const HeteroGraph& graph, std::span<const GlobalPair> withheld) {
    std::set<GlobalPair> skip;
    for (auto [a, b] : withheld) skip.emplace(std::min(a, b), std::max(a, b));
    std::vector<Triplet> t;
    t.reserve(graph.num_edges() * 2);
    for (const auto& e : graph.edges()) {
        const auto i = graph.global_index(e.head);
        const auto j = graph.global_index(e.tail);
        if (i == j) continue;
        if (!skip.empty() && skip.contains({std::min(i, j), std::max(i, j)})) continue;
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
    }
    const auto n = graph.num_nodes();
    return SparseMatrix::from_triplets(n, n, std::move(t), DuplicatePolicy::KeepOne);
}

}  // namespace drcov
