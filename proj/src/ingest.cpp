#include "drcov/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "drcov/binary_io.hpp"
#include "drcov/error.hpp"
#include "drcov/random.hpp"

namespace drcov {

namespace {

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const auto start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

double parse_double(std::string_view tok, const std::string& where) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError(where + ": not a number '" + std::string(tok) + "'");
    return v;
}

std::uint64_t pair_key(std::uint32_t drug, std::uint32_t disease) {
    return (static_cast<std::uint64_t>(drug) << 32) | disease;
}

}  // namespace

ParsedEdges parse_edge_stream(std::istream& in, const std::string& source, ParseMode mode) {
    ParsedEdges out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_on(line, '\t');
        if (fields.size() != 3) {
            out.issues.push_back({lineno, "expected 3 tab-separated fields, found " + std::to_string(fields.size())});
            continue;
        }
        if (fields[1].empty()) {
            out.issues.push_back({lineno, "empty relation"});
            continue;
        }
        if (!kind_from_name(fields[0])) {
            out.issues.push_back({lineno, "unrecognized entity prefix in head '" + std::string(fields[0]) + "'"});
            continue;
        }
        if (!kind_from_name(fields[2])) {
            out.issues.push_back({lineno, "unrecognized entity prefix in tail '" + std::string(fields[2]) + "'"});
            continue;
        }
        out.records.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), lineno});
    }
    if (mode == ParseMode::Strict && !out.issues.empty()) {
        std::ostringstream msg;
        msg << source << ": " << out.issues.size() << " malformed line(s)";
        for (std::size_t i = 0; i < std::min<std::size_t>(out.issues.size(), 5); ++i)
            msg << "; line " << out.issues[i].line << ": " << out.issues[i].message;
        throw ParseError(msg.str());
    }
    return out;
}

ParsedEdges parse_edge_file(const std::filesystem::path& path, ParseMode mode) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge file " + path.string());
    return parse_edge_stream(in, path.string(), mode);
}

void FeatureTable::add(std::string name, std::span<const double> values) {
    if (names_.empty() && dim_ == 0) dim_ = values.size();
    if (values.size() != dim_)
        throw ParseError("feature dimension inconsistency for '" + name + "': " + std::to_string(values.size()) +
                         " vs " + std::to_string(dim_));
    if (index_.contains(name)) throw ParseError("duplicate feature row for '" + name + "'");
    index_.emplace(name, names_.size());
    names_.push_back(std::move(name));
    values_.insert(values_.end(), values.begin(), values.end());
}

std::optional<std::span<const double>> FeatureTable::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return std::span<const double>(values_.data() + it->second * dim_, dim_);
}

FeatureTable load_feature_file(const std::filesystem::path& path) {
    const auto bytes = binio::read_file(path);
    if (bytes.size() >= 8) {
        binio::Reader r(bytes, path.string());
        if (r.u64() == kFeatureMagic) {
            const auto n = r.u64();
            const auto d = r.u64();
            if (r.remaining() != n * d * 8)
                throw ParseError(path.string() + ": payload size does not match N*d");
            auto names_path = path;
            names_path += ".names";
            std::ifstream names_in(names_path);
            if (!names_in) throw ParseError("missing feature sidecar " + names_path.string());
            FeatureTable table(d);
            std::vector<double> row(d);
            std::string name;
            for (std::uint64_t i = 0; i < n; ++i) {
                if (!std::getline(names_in, name))
                    throw ParseError(names_path.string() + ": fewer names than rows (" + std::to_string(n) + ")");
                if (!name.empty() && name.back() == '\r') name.pop_back();
                for (auto& v : row) v = r.f64();
                table.add(name, row);
            }
            return table;
        }
    }

    FeatureTable table;
    std::istringstream in(bytes);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::string_view sv(line);
        std::string name;
        std::string_view rest;
        if (const auto tab = sv.find('\t'); tab != std::string_view::npos) {
            name = std::string(sv.substr(0, tab));
            rest = sv.substr(tab + 1);
        } else {
            const auto sp = sv.find(' ');
            if (sp == std::string_view::npos)
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": no feature values");
            name = std::string(sv.substr(0, sp));
            rest = sv.substr(sp + 1);
        }
        row.clear();
        const auto where = path.string() + ":" + std::to_string(lineno);
        for (auto tok : split_ws(rest)) row.push_back(parse_double(tok, where));
        if (row.empty()) throw ParseError(where + ": no feature values");
        try {
            table.add(std::move(name), row);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return table;
}

void write_feature_file(const std::filesystem::path& path, std::span<const std::string> names,
                        const Matrix& values) {
    if (names.size() != values.rows()) throw ShapeError("write_feature_file: names/rows mismatch");
    binio::Writer w;
    w.u64(kFeatureMagic);
    w.u64(values.rows());
    w.u64(values.cols());
    for (double v : values.values()) w.f64(v);
    binio::write_file(path, w.bytes());
    std::string sidecar;
    for (const auto& n : names) {
        sidecar += n;
        sidecar += '\n';
    }
    auto names_path = path;
    names_path += ".names";
    binio::write_file(names_path, sidecar);
}

GraphCounts count_graph(const HeteroGraph& graph) {
    GraphCounts c;
    for (auto k : kEntityKinds) c.nodes[static_cast<std::size_t>(k)] = graph.count(k);
    c.links = graph.num_edges();
    return c;
}

void check_counts(const GraphCounts& actual, const GraphCounts& expected) {
    std::string msg;
    for (auto k : kEntityKinds) {
        const auto i = static_cast<std::size_t>(k);
        if (actual.nodes[i] != expected.nodes[i])
            msg += std::string(msg.empty() ? "" : "; ") + std::string(to_string(k)) + " count " +
                   std::to_string(actual.nodes[i]) + " != expected " + std::to_string(expected.nodes[i]);
    }
    if (actual.links != expected.links)
        msg += std::string(msg.empty() ? "" : "; ") + "link count " + std::to_string(actual.links) +
               " != expected " + std::to_string(expected.links);
    if (!msg.empty()) throw ValidationError("count mismatch: " + msg);
}

HeteroGraph build_graph(std::span<const EdgeRecord> records) {
    HeteroGraph g;
    for (const auto& rec : records) {
        try {
            const auto h = g.add_node(rec.head_name);
            const auto t = g.add_node(rec.tail_name);
            g.add_edge(h, g.relations().intern(rec.relation), t);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(rec.line) + ": " + e.what());
        }
    }
    return g;
}

std::vector<double> fallback_feature(const std::string& name, std::size_t dim) {
    Rng rng(fnv1a64(name));
    std::vector<double> v(dim);
    double norm2 = 0.0;
    while (dim > 0 && norm2 == 0.0) {
        for (auto& x : v) x = rng.normal();
        norm2 = 0.0;
        for (double x : v) norm2 += x * x;
    }
    const double inv = dim > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
    for (auto& x : v) x *= inv;
    return v;
}

Matrix assemble_features(const HeteroGraph& graph, const FeatureTable* table, std::size_t dim,
                         std::vector<std::string>* warnings) {
    if (table && table->size() > 0) dim = table->dim();
    if (dim == 0) throw ValidationError("feature dimension is zero");
    Matrix x(graph.num_nodes(), dim);
    std::size_t row = 0;
    for (auto kind : kEntityKinds) {
        for (const auto& name : graph.names(kind)) {
            auto dst = x.row(row++);
            if (table) {
                if (auto found = table->find(name)) {
                    std::copy(found->begin(), found->end(), dst.begin());
                    continue;
                }
            }
            const auto v = fallback_feature(name, dim);
            std::copy(v.begin(), v.end(), dst.begin());
            if (warnings && table) warnings->push_back("no feature row for '" + name + "'; using seeded unit vector");
        }
    }
    return x;
}

CovidTargetSet inject_covid_nodes(HeteroGraph& graph, std::span<const EdgeRecord> records) {
    CovidTargetSet out;
    std::set<NodeRef> seen;
    for (const auto& rec : records) {
        const auto where = "covid line " + std::to_string(rec.line);
        if (kind_from_name(rec.head_name) != EntityKind::Disease)
            throw ValidationError(where + ": head '" + rec.head_name + "' is not a Disease node");
        if (kind_from_name(rec.tail_name) != EntityKind::Gene)
            throw ValidationError(where + ": tail '" + rec.tail_name + "' is not a Gene node");
        const auto head = graph.add_node(rec.head_name);
        const auto tail = graph.add_node(rec.tail_name);
        if (graph.add_edge(head, graph.relations().intern(rec.relation), tail)) ++out.links;
        if (seen.insert(head).second) out.targets.push_back(head);
    }
    return out;
}

std::vector<LinkPair> positive_pairs(const HeteroGraph& graph) {
    std::set<LinkPair> pairs;
    for (const auto& e : graph.edges()) {
        if (!graph.is_treatment(e)) continue;
        if (e.head.kind == EntityKind::Drug)
            pairs.insert({e.head.local, e.tail.local});
        else
            pairs.insert({e.tail.local, e.head.local});
    }
    return {pairs.begin(), pairs.end()};
}

namespace {

std::size_t test_count(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

void check_fraction(double f) {
    if (!(f > 0.0 && f < 1.0)) throw ValidationError("test_fraction must lie in (0, 1), got " + std::to_string(f));
}

}  // namespace

DatasetSplit split_links(const HeteroGraph& graph, std::uint64_t seed, double test_fraction) {
    check_fraction(test_fraction);
    auto pos = positive_pairs(graph);
    Rng rng(seed);
    rng.shuffle(std::span(pos));
    DatasetSplit split;
    split.seed = seed;
    const auto n_test = test_count(pos.size(), test_fraction);
    split.test_pos.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_pos.assign(pos.begin() + static_cast<std::ptrdiff_t>(n_test), pos.end());
    return split;
}

namespace {

std::vector<std::uint32_t> candidate_diseases(const HeteroGraph& graph, std::span<const std::uint32_t> excluded) {
    const std::set<std::uint32_t> ex(excluded.begin(), excluded.end());
    std::vector<std::uint32_t> out;
    for (std::uint32_t d = 0; d < graph.count(EntityKind::Disease); ++d)
        if (!ex.contains(d)) out.push_back(d);
    return out;
}

std::unordered_set<std::uint64_t> positive_keys(std::span<const LinkPair> positives) {
    std::unordered_set<std::uint64_t> keys;
    for (const auto& p : positives) keys.insert(pair_key(p.drug, p.disease));
    return keys;
}

}  // namespace

std::size_t negative_capacity(const HeteroGraph& graph, std::span<const LinkPair> positives,
                              std::span<const std::uint32_t> excluded_diseases) {
    const auto cand = candidate_diseases(graph, excluded_diseases);
    const std::set<std::uint32_t> cand_set(cand.begin(), cand.end());
    const auto keys = positive_keys(positives);
    std::size_t blocked = 0;
    for (auto k : keys) {
        const auto drug = static_cast<std::uint32_t>(k >> 32);
        const auto disease = static_cast<std::uint32_t>(k & 0xffffffffULL);
        if (drug < graph.count(EntityKind::Drug) && cand_set.contains(disease)) ++blocked;
    }
    return graph.count(EntityKind::Drug) * cand.size() - blocked;
}

std::vector<LinkPair> sample_negatives(const HeteroGraph& graph, std::span<const LinkPair> positives,
                                       std::size_t count, std::uint64_t seed,
                                       std::span<const std::uint32_t> excluded_diseases) {
    if (count == 0) return {};
    const auto capacity = negative_capacity(graph, positives, excluded_diseases);
    if (count > capacity)
        throw ValidationError("requested " + std::to_string(count) + " negatives but only " +
                              std::to_string(capacity) + " non-positive drug-disease pairs exist");
    const auto cand = candidate_diseases(graph, excluded_diseases);
    const auto pos = positive_keys(positives);
    const auto n_drugs = graph.count(EntityKind::Drug);
    Rng rng(seed);
    std::vector<LinkPair> out;
    out.reserve(count);

    if (count * 2 >= capacity) {
        // Dense request: enumerate the complement and take a shuffled prefix.
        std::vector<LinkPair> all;
        all.reserve(capacity);
        for (std::uint32_t c = 0; c < n_drugs; ++c)
            for (auto d : cand)
                if (!pos.contains(pair_key(c, d))) all.push_back({c, d});
        rng.shuffle(std::span(all));
        all.resize(count);
        return all;
    }

    std::unordered_set<std::uint64_t> taken;
    while (out.size() < count) {
        const auto c = static_cast<std::uint32_t>(rng.below(n_drugs));
        const auto d = cand[rng.below(cand.size())];
        const auto key = pair_key(c, d);
        if (pos.contains(key) || !taken.insert(key).second) continue;
        out.push_back({c, d});
    }
    return out;
}

DatasetSplit make_dataset_split(const HeteroGraph& graph, std::uint64_t seed, double test_fraction,
                                std::size_t negative_count, std::span<const std::uint32_t> excluded_diseases) {
    auto split = split_links(graph, seed, test_fraction);
    const auto positives = positive_pairs(graph);
    auto neg = sample_negatives(graph, positives, negative_count, mix_seed(seed, 2), excluded_diseases);
    const auto n_test = test_count(neg.size(), test_fraction);
    split.test_neg.assign(neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_neg.assign(neg.begin() + static_cast<std::ptrdiff_t>(n_test), neg.end());
    return split;
}

std::vector<GlobalPair> withheld_pairs(const HeteroGraph& graph, const DatasetSplit& split) {
    std::vector<GlobalPair> out;
    out.reserve(split.test_pos.size());
    for (const auto& p : split.test_pos)
        out.emplace_back(graph.global_index({EntityKind::Drug, p.drug}),
                         graph.global_index({EntityKind::Disease, p.disease}));
    return out;
}

void write_split(std::ostream& out, const HeteroGraph& graph, const DatasetSplit& split) {
    out << "# seed\t" << split.seed << '\n';
    auto emit = [&](const std::vector<LinkPair>& pairs, int label, const char* fold) {
        for (const auto& p : pairs)
            out << graph.name({EntityKind::Drug, p.drug}) << '\t' << graph.name({EntityKind::Disease, p.disease})
                << '\t' << label << '\t' << fold << '\n';
    };
    emit(split.train_pos, 1, "train");
    emit(split.train_neg, 0, "train");
    emit(split.test_pos, 1, "test");
    emit(split.test_neg, 0, "test");
}

DatasetSplit read_split(std::istream& in, const HeteroGraph& graph, const std::string& source) {
    DatasetSplit split;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto where = source + ":" + std::to_string(lineno);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto f = split_on(line, '\t');
            if (f.size() == 2 && f[0] == "# seed") {
                auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), split.seed);
                if (ec != std::errc()) throw ParseError(where + ": bad seed");
            }
            continue;
        }
        const auto f = split_on(line, '\t');
        if (f.size() != 4) throw ParseError(where + ": expected 4 tab-separated fields");
        const auto drug = graph.find(f[0]);
        const auto disease = graph.find(f[1]);
        if (!drug || drug->kind != EntityKind::Drug) throw ParseError(where + ": unknown drug '" + std::string(f[0]) + "'");
        if (!disease || disease->kind != EntityKind::Disease)
            throw ParseError(where + ": unknown disease '" + std::string(f[1]) + "'");
        const LinkPair p{drug->local, disease->local};
        if (f[2] != "0" && f[2] != "1") throw ParseError(where + ": label must be 0 or 1");
        const bool positive = f[2] == "1";
        if (f[3] == "train")
            (positive ? split.train_pos : split.train_neg).push_back(p);
        else if (f[3] == "test")
            (positive ? split.test_pos : split.test_neg).push_back(p);
        else
            throw ParseError(where + ": fold must be train or test");
    }
    return split;
}

}  // namespace drcov
