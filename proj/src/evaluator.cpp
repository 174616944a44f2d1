#include "drcov/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "drcov/error.hpp"
#include "drcov/text.hpp"

namespace drcov {

RocCurve auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw ShapeError("auroc: scores and labels differ in length");
    std::size_t n_pos = 0;
    for (auto l : labels) {
        if (l > 1) throw ValidationError("auroc: labels must be 0 or 1");
        n_pos += l;
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("auroc: need at least one positive and one negative");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Rank-sum of positives with midranks, then U = R+ - n+(n+ + 1)/2.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]]) rank_sum += midrank;
        i = j;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    RocCurve roc;
    roc.auroc = (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);

    // Sweep thresholds from the highest score down.
    roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = order.size(); i > 0;) {
        std::size_t j = i;
        const double s = scores[order[i - 1]];
        while (j > 0 && scores[order[j - 1]] == s) {
            (labels[order[j - 1]] ? tp : fp) += 1;
            --j;
        }
        roc.points.push_back({s, static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
        i = j;
    }
    return roc;
}

std::optional<std::size_t> RankReport::rank_of(std::uint32_t drug_local) const {
    for (std::size_t i = 0; i < ordered.size(); ++i)
        if (ordered[i].drug.local_index == drug_local) return i + 1;
    return std::nullopt;
}

std::vector<std::uint32_t> all_drugs(const HeteroGraph& graph) {
    std::vector<std::uint32_t> d(graph.count(EntityKind::Drug));
    std::iota(d.begin(), d.end(), 0u);
    return d;
}

RankReport rank_drugs(const ModelParams& params, const Matrix& embeddings, const HeteroGraph& graph,
                      std::uint32_t disease, std::span<const std::uint32_t> candidate_drugs,
                      std::optional<std::uint32_t> target_drug) {
    if (disease >= graph.count(EntityKind::Disease))
        throw ValidationError("rank_drugs: unknown disease index " + std::to_string(disease));
    const NodeId disease_id = graph.node_id({EntityKind::Disease, disease});
    if (disease_id.global_index >= embeddings.rows())
        throw ValidationError("rank_drugs: no embedding for disease '" + graph.name({EntityKind::Disease, disease}) + "'");
    const auto u = disease_projection(params, embeddings.row(disease_id.global_index));

    RankReport report;
    report.disease = disease_id;
    report.ordered.reserve(candidate_drugs.size());
    for (auto c : candidate_drugs) {
        const NodeId id = graph.node_id({EntityKind::Drug, c});
        if (id.global_index >= embeddings.rows()) throw ValidationError("rank_drugs: no embedding for drug index " + std::to_string(c));
        report.ordered.push_back({id, dot(embeddings.row(id.global_index), u)});
    }
    std::sort(report.ordered.begin(), report.ordered.end(), [](const RankedDrug& a, const RankedDrug& b) {
        return a.logit != b.logit ? a.logit > b.logit : a.drug.global_index < b.drug.global_index;
    });
    if (target_drug) {
        report.target = graph.node_id({EntityKind::Drug, *target_drug});
        report.target_rank = report.rank_of(*target_drug);
    }
    return report;
}

TestEvaluation evaluate_test_set(const ModelParams& params, const Matrix& embeddings, const HeteroGraph& graph,
                                 const DatasetSplit& split) {
    if (split.test_pos.empty() && split.test_neg.empty()) throw ValidationError("evaluate: empty test fold");
    TestEvaluation eval;
    std::vector<std::uint8_t> labels;
    auto add = [&](const std::vector<LinkPair>& pairs, std::uint8_t label) {
        for (const auto& p : pairs) {
            const auto c = graph.global_index({EntityKind::Drug, p.drug});
            const auto d = graph.global_index({EntityKind::Disease, p.disease});
            const double s = score(params, embeddings.row(c), embeddings.row(d));
            eval.test_logits.push_back(s);
            labels.push_back(label);
        }
    };
    add(split.test_pos, 1);
    add(split.test_neg, 0);
    // Logits rather than probabilities: the sigmoid saturates to exact ties.
    eval.roc = auroc(eval.test_logits, labels);

    const auto drugs = all_drugs(graph);
    std::map<std::uint32_t, std::size_t> report_of;
    for (const auto& p : split.test_pos) {
        auto it = report_of.find(p.disease);
        if (it == report_of.end()) {
            it = report_of.emplace(p.disease, eval.reports.size()).first;
            eval.reports.push_back(rank_drugs(params, embeddings, graph, p.disease, drugs));
        }
        const auto& rep = eval.reports[it->second];
        const auto rank = *rep.rank_of(p.drug);
        eval.held_out.push_back({p, rep.ordered[rank - 1].logit, rank});
    }
    // Per-disease reports carry the first held-out drug as their target.
    for (auto& rep : eval.reports) {
        for (const auto& h : eval.held_out) {
            if (h.pair.disease == rep.disease.local_index) {
                rep.target = graph.node_id({EntityKind::Drug, h.pair.drug});
                rep.target_rank = h.rank;
                break;
            }
        }
    }
    return eval;
}

CovidReport covid_report(const ModelParams& params, const Matrix& embeddings, const HeteroGraph& graph,
                         const CovidTargetSet& targets, std::size_t k) {
    if (targets.empty()) throw ValidationError("covid_report: no target nodes");
    if (k == 0) throw ValidationError("covid_report: k must be positive");
    CovidReport report;
    report.targets = targets.targets;
    report.k = k;
    const auto drugs = all_drugs(graph);
    std::vector<RankReport> rankings;
    std::map<std::uint32_t, std::size_t> union_index;
    for (const auto& t : targets.targets) {
        if (t.kind != EntityKind::Disease) throw ValidationError("covid_report: target is not a disease node");
        rankings.push_back(rank_drugs(params, embeddings, graph, t.local, drugs));
        const auto& r = rankings.back();
        const auto n = std::min(k, r.ordered.size());
        report.top.emplace_back(r.ordered.begin(), r.ordered.begin() + static_cast<std::ptrdiff_t>(n));
        for (const auto& rd : report.top.back()) {
            if (union_index.emplace(rd.drug.local_index, report.union_drugs.size()).second)
                report.union_drugs.push_back(rd.drug.local_index);
        }
    }
    report.ranks.assign(report.union_drugs.size(), std::vector<std::size_t>(rankings.size(), 0));
    for (std::size_t t = 0; t < rankings.size(); ++t) {
        const auto& ordered = rankings[t].ordered;
        for (std::size_t pos = 0; pos < ordered.size(); ++pos) {
            auto it = union_index.find(ordered[pos].drug.local_index);
            if (it != union_index.end()) report.ranks[it->second][t] = pos + 1;
        }
    }
    return report;
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
    out << "threshold,fpr,tpr\n";
    for (const auto& p : roc.points)
        out << format_real(p.threshold) << ',' << format_real(p.fpr) << ',' << format_real(p.tpr) << '\n';
    out << "AUROC," << format_real(roc.auroc) << '\n';
}

void write_ranks_csv(std::ostream& out, const HeteroGraph& graph, const TestEvaluation& eval, bool full) {
    out << "disease,drug,logit,rank\n";
    if (full) {
        for (const auto& rep : eval.reports) {
            const auto& disease = graph.name({EntityKind::Disease, rep.disease.local_index});
            for (std::size_t i = 0; i < rep.ordered.size(); ++i)
                out << csv_field(disease) << ',' << csv_field(graph.name({EntityKind::Drug, rep.ordered[i].drug.local_index}))
                    << ',' << format_real(rep.ordered[i].logit) << ',' << i + 1 << '\n';
        }
        return;
    }
    for (const auto& h : eval.held_out)
        out << csv_field(graph.name({EntityKind::Disease, h.pair.disease})) << ','
            << csv_field(graph.name({EntityKind::Drug, h.pair.drug})) << ',' << format_real(h.logit) << ',' << h.rank
            << '\n';
}

void write_covid_csv(std::ostream& out, const HeteroGraph& graph, const CovidReport& report, bool full_ranks) {
    out << "drug";
    for (const auto& t : report.targets) out << ',' << csv_field(graph.name(t));
    out << '\n';
    for (std::size_t i = 0; i < report.union_drugs.size(); ++i) {
        out << csv_field(graph.name({EntityKind::Drug, report.union_drugs[i]}));
        for (std::size_t t = 0; t < report.targets.size(); ++t) {
            out << ',';
            const auto r = report.ranks[i][t];
            if (r > 0 && (full_ranks || r <= report.k)) out << r;
        }
        out << '\n';
    }
}

}  // namespace drcov
