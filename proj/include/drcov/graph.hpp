#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "drcov/sparse.hpp"

namespace drcov {

// Global indices are assigned in this order: all drugs, then diseases, genes,
// anatomies.
enum class EntityKind : std::uint8_t { Drug = 0, Disease = 1, Gene = 2, Anatomy = 3 };

inline constexpr std::array<EntityKind, 4> kEntityKinds{EntityKind::Drug, EntityKind::Disease,
                                                        EntityKind::Gene, EntityKind::Anatomy};

std::string_view to_string(EntityKind kind);
// Name prefix used in triple files, e.g. "Compound::" for drugs.
std::string_view entity_prefix(EntityKind kind);
// Kind from a prefixed name ("Gene::5529" -> Gene); nullopt when unrecognized.
std::optional<EntityKind> kind_from_name(std::string_view name);

// A node addressed by kind and position within that kind's vocabulary. Stays
// valid when nodes of other kinds are appended, unlike a global index.
struct NodeRef {
    EntityKind kind = EntityKind::Drug;
    std::uint32_t local = 0;
    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct NodeId {
    EntityKind kind = EntityKind::Drug;
    std::uint32_t local_index = 0;
    std::uint32_t global_index = 0;
    friend bool operator==(const NodeId&, const NodeId&) = default;
};

using RelationId = std::uint32_t;

// Relation labels seen at ingest. Once closed, lookups of unknown labels and
// new registrations both fail.
class RelationRegistry {
public:
    RelationId intern(std::string_view name);
    RelationId find(std::string_view name) const;
    bool contains(std::string_view name) const { return ids_.contains(std::string(name)); }
    const std::string& name(RelationId id) const { return names_.at(id); }
    std::size_t size() const noexcept { return names_.size(); }
    void close() noexcept { closed_ = true; }
    bool closed() const noexcept { return closed_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, RelationId> ids_;
    bool closed_ = false;
};

// True for drug-disease relations counted as positive labels: "treats" and
// "palliates", plus their DRKG spellings (Hetionet CtD/CpD, DRUGBANK treats,
// GNBR T).
bool is_treatment_relation(std::string_view name);

struct TypedEdge {
    NodeRef head;
    RelationId relation = 0;
    NodeRef tail;
    friend bool operator==(const TypedEdge&, const TypedEdge&) = default;
};

class HeteroGraph {
public:
    // Returns the existing node if the name is already known. The name must
    // carry the prefix matching `kind`.
    NodeRef add_node(std::string_view name);
    std::optional<NodeRef> find(std::string_view name) const;

    // Adds (head, relation, tail); returns false for a duplicate triple.
    bool add_edge(NodeRef head, RelationId relation, NodeRef tail);
    bool add_edge(NodeRef head, std::string_view relation, NodeRef tail) {
        return add_edge(head, relations_.find(relation), tail);
    }

    std::size_t count(EntityKind kind) const noexcept { return names_[index(kind)].size(); }
    std::size_t num_nodes() const noexcept;
    std::size_t num_edges() const noexcept { return edges_.size(); }

    std::uint32_t offset(EntityKind kind) const noexcept;
    std::uint32_t global_index(NodeRef ref) const noexcept { return offset(ref.kind) + ref.local; }
    NodeId node_id(NodeRef ref) const noexcept { return {ref.kind, ref.local, global_index(ref)}; }
    NodeRef from_global(std::uint32_t global) const;

    const std::string& name(NodeRef ref) const { return names_[index(ref.kind)].at(ref.local); }
    std::span<const std::string> names(EntityKind kind) const noexcept { return names_[index(kind)]; }

    std::span<const TypedEdge> edges() const noexcept { return edges_; }
    RelationRegistry& relations() noexcept { return relations_; }
    const RelationRegistry& relations() const noexcept { return relations_; }

    bool is_treatment(const TypedEdge& e) const;

    std::string serialize() const;
    static HeteroGraph deserialize(std::string_view bytes, const std::string& source = "graph");

private:
    static constexpr std::size_t index(EntityKind k) noexcept { return static_cast<std::size_t>(k); }

    struct EdgeKey {
        std::uint64_t head;
        std::uint64_t tail;
        RelationId relation;
        friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
    };
    struct EdgeKeyHash {
        std::size_t operator()(const EdgeKey& k) const noexcept;
    };

    std::array<std::vector<std::string>, 4> names_;
    std::array<std::unordered_map<std::string, std::uint32_t>, 4> vocab_;
    std::vector<TypedEdge> edges_;
    std::unordered_set<EdgeKey, EdgeKeyHash> edge_keys_;
    RelationRegistry relations_;
};

// Unordered node pair by global index (first <= second).
using GlobalPair = std::pair<std::uint32_t, std::uint32_t>;

// Symmetric binary N x N adjacency over every edge regardless of relation;
// self-edges are dropped. Edges joining any pair in `withheld` are skipped.
SparseMatrix build_adjacency(const HeteroGraph& graph, std::span<const GlobalPair> withheld = {});

}  // namespace drcov
