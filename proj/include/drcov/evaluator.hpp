#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "drcov/graph.hpp"
#include "drcov/ingest.hpp"
#include "drcov/sign_model.hpp"

namespace drcov {

struct RocPoint {
    double threshold;  // +inf for the (0, 0) origin
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // (0,0) first, (1,1) last
    double auroc = 0.0;
};

// Mann-Whitney AUROC with midranks for ties; the curve has one point per
// distinct score. Throws ValidationError unless both classes are present.
RocCurve auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RankedDrug {
    NodeId drug;
    double logit = 0.0;
};

struct RankReport {
    NodeId disease;
    std::vector<RankedDrug> ordered;  // logit descending, ties by ascending drug index
    std::optional<NodeId> target;
    std::optional<std::size_t> target_rank;  // 1-based

    // 1-based rank of a drug (local index), if it was a candidate.
    std::optional<std::size_t> rank_of(std::uint32_t drug_local) const;
};

// Scores every candidate drug against the disease from the full embedding
// matrix (rows indexed by global node index).
RankReport rank_drugs(const ModelParams& params, const Matrix& embeddings, const HeteroGraph& graph,
                      std::uint32_t disease, std::span<const std::uint32_t> candidate_drugs,
                      std::optional<std::uint32_t> target_drug = std::nullopt);

// Every drug local index, ascending.
std::vector<std::uint32_t> all_drugs(const HeteroGraph& graph);

struct HeldOutRank {
    LinkPair pair;
    double logit = 0.0;
    std::size_t rank = 0;
};

struct TestEvaluation {
    RocCurve roc;
    std::vector<RankReport> reports;      // one per distinct test-positive disease
    std::vector<HeldOutRank> held_out;    // one per test positive
    std::vector<double> test_logits;      // aligned with test_pos then test_neg
};

TestEvaluation evaluate_test_set(const ModelParams& params, const Matrix& embeddings, const HeteroGraph& graph,
                                 const DatasetSplit& split);

struct CovidReport {
    std::vector<NodeRef> targets;
    std::size_t k = 0;
    std::vector<std::vector<RankedDrug>> top;  // per target, first k of its ranking
    std::vector<std::uint32_t> union_drugs;    // first appearance across targets in order
    // ranks[i][t]: full 1-based rank of union_drugs[i] for targets[t].
    std::vector<std::vector<std::size_t>> ranks;
};

CovidReport covid_report(const ModelParams& params, const Matrix& embeddings, const HeteroGraph& graph,
                         const CovidTargetSet& targets, std::size_t k = 10);

// roc.csv: "threshold,fpr,tpr" rows then "AUROC,<value>". Thresholds are
// on whatever scale the scores were (logits for evaluate_test_set).
void write_roc_csv(std::ostream& out, const RocCurve& roc);
// ranks.csv: "disease,drug,logit,rank", one row per held-out treatment, or
// every ranked drug of every report when `full` is set.
void write_ranks_csv(std::ostream& out, const HeteroGraph& graph, const TestEvaluation& eval, bool full = false);
// covid_report.csv: drug column then one column per target; cells hold the
// rank when it is within k (or always, with `full_ranks`).
void write_covid_csv(std::ostream& out, const HeteroGraph& graph, const CovidReport& report, bool full_ranks = false);

}  // namespace drcov
