#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "drcov/dense.hpp"
#include "drcov/graph.hpp"

namespace drcov {

struct EdgeRecord {
    std::string head_name;
    std::string relation;
    std::string tail_name;
    std::size_t line = 0;
};

struct ParseIssue {
    std::size_t line = 0;
    std::string message;
};

enum class ParseMode { Strict, Lenient };

struct ParsedEdges {
    std::vector<EdgeRecord> records;
    std::vector<ParseIssue> issues;  // lines skipped in lenient mode
};

// Tab-separated head/relation/tail triples; '#' lines and blank lines are
// skipped. Both endpoints need a known entity prefix. Strict mode throws a
// ParseError listing the bad line count and first offending lines.
ParsedEdges parse_edge_stream(std::istream& in, const std::string& source,
                              ParseMode mode = ParseMode::Strict);
ParsedEdges parse_edge_file(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);

// Node name -> d-dimensional feature row.
class FeatureTable {
public:
    FeatureTable() = default;
    explicit FeatureTable(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return names_.size(); }
    void add(std::string name, std::span<const double> values);
    std::optional<std::span<const double>> find(const std::string& name) const;
    std::span<const std::string> names() const noexcept { return names_; }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Binary format: three little-endian u64 (magic, N, d), then N*d little-endian
// f64 row-major, with node names one per line in "<path>.names". Anything not
// starting with the magic is read as text: "name v1 ... vd" per line (a tab
// after the name allows names containing spaces).
FeatureTable load_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, std::span<const std::string> names,
                        const Matrix& values);
inline constexpr std::uint64_t kFeatureMagic = 0x5441454643524444ULL;  // "DDRCFEAT"

struct GraphCounts {
    std::array<std::size_t, 4> nodes{};  // indexed by EntityKind
    std::size_t links = 0;
};

// Node and link totals of the published four-layer graph.
inline constexpr GraphCounts kFullGraphCounts{{8070, 4166, 29848, 400}, 1'417'624};
inline constexpr std::size_t kFullPositiveCount = 6113;
inline constexpr std::size_t kFullCovidTargets = 33;
inline constexpr std::size_t kFullCovidLinks = 461;

GraphCounts count_graph(const HeteroGraph& graph);
// Throws ValidationError naming each mismatching count.
void check_counts(const GraphCounts& actual, const GraphCounts& expected);

// Vocabularies in first-seen order; duplicate triples dropped.
HeteroGraph build_graph(std::span<const EdgeRecord> records);

// Feature rows aligned to global index. Nodes absent from `table` get a
// pseudo-random unit vector seeded by their name; one warning per node.
Matrix assemble_features(const HeteroGraph& graph, const FeatureTable* table, std::size_t dim,
                         std::vector<std::string>* warnings = nullptr);

// Unit-norm vector derived only from the name.
std::vector<double> fallback_feature(const std::string& name, std::size_t dim);

struct CovidTargetSet {
    std::vector<NodeRef> targets;  // disease-kind, first-seen order
    std::size_t links = 0;
    bool empty() const noexcept { return targets.empty(); }
};

// Disease -> Gene edges for the prediction targets. Heads must be Disease
// nodes and tails Gene nodes.
CovidTargetSet inject_covid_nodes(HeteroGraph& graph, std::span<const EdgeRecord> records);

// Drug/disease pair by local indices.
struct LinkPair {
    std::uint32_t drug = 0;
    std::uint32_t disease = 0;
    friend auto operator<=>(const LinkPair&, const LinkPair&) = default;
};

struct DatasetSplit {
    std::vector<LinkPair> train_pos, test_pos, train_neg, test_neg;
    std::uint64_t seed = 0;
};

// Unique drug-disease pairs joined by a treatment relation, sorted.
std::vector<LinkPair> positive_pairs(const HeteroGraph& graph);

// Shuffles the positive pairs and moves round(n * test_fraction) to test.
DatasetSplit split_links(const HeteroGraph& graph, std::uint64_t seed, double test_fraction = 0.10);

// `count` distinct drug-disease pairs not in `positives`, never touching the
// `excluded_diseases` (local indices).
std::vector<LinkPair> sample_negatives(const HeteroGraph& graph, std::span<const LinkPair> positives,
                                       std::size_t count, std::uint64_t seed,
                                       std::span<const std::uint32_t> excluded_diseases = {});
// How many negatives sample_negatives could return at most.
std::size_t negative_capacity(const HeteroGraph& graph, std::span<const LinkPair> positives,
                              std::span<const std::uint32_t> excluded_diseases = {});

// Positive split plus negatives, each class partitioned 90/10 on its own.
DatasetSplit make_dataset_split(const HeteroGraph& graph, std::uint64_t seed, double test_fraction,
                                std::size_t negative_count,
                                std::span<const std::uint32_t> excluded_diseases = {});

// Test positives as global pairs: withheld from the message-passing graph.
std::vector<GlobalPair> withheld_pairs(const HeteroGraph& graph, const DatasetSplit& split);

// "drug<TAB>disease<TAB>label<TAB>fold" per line, preceded by a "# seed" line.
void write_split(std::ostream& out, const HeteroGraph& graph, const DatasetSplit& split);
DatasetSplit read_split(std::istream& in, const HeteroGraph& graph, const std::string& source = "split");

}  // namespace drcov
