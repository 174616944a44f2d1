#include <doctest.h>

#include <cmath>
#include <sstream>

#include "drcov/error.hpp"
#include "drcov/evaluator.hpp"
#include "drcov/loss.hpp"
#include "drcov/random.hpp"
#include "oracles.hpp"

using namespace drcov;

namespace {

// l = 1 and Φ = 1, so a logit is the product of two scalar embeddings.
ModelParams unit_phi() {
    ModelParams p = init_params({1, 1, 1, 0}, 0);
    p.phi(0, 0) = 1.0;
    return p;
}

struct Scene {
    HeteroGraph graph;
    Matrix y;
};

// Drugs with the given scalar embeddings, then diseases with theirs.
Scene scene(std::vector<double> drugs, std::vector<double> diseases) {
    Scene s;
    for (std::size_t i = 0; i < drugs.size(); ++i) s.graph.add_node("Compound::d" + std::to_string(i + 1));
    for (std::size_t i = 0; i < diseases.size(); ++i) s.graph.add_node("Disease::s" + std::to_string(i + 1));
    s.y = Matrix(drugs.size() + diseases.size(), 1);
    for (std::size_t i = 0; i < drugs.size(); ++i) s.y(i, 0) = drugs[i];
    for (std::size_t i = 0; i < diseases.size(); ++i) s.y(drugs.size() + i, 0) = diseases[i];
    return s;
}

}  // namespace

TEST_CASE("auroc examples") {
    const std::vector<std::uint8_t> labels{1, 0, 1, 0};
    CHECK(auroc(std::vector<double>{0.9, 0.1, 0.8, 0.2}, labels).auroc == 1.0);
    CHECK(auroc(std::vector<double>{0.1, 0.9, 0.2, 0.8}, labels).auroc == 0.0);
    CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels).auroc == 0.5);
    CHECK(auroc(std::vector<double>{0.9, 0.8, 0.3, 0.1}, labels).auroc == 0.75);
    CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1}), ValidationError);
    CHECK_THROWS_AS(auroc(std::vector<double>{0.1}, labels), ShapeError);
}

TEST_CASE("roc curve endpoints and monotonicity") {
    Rng rng(2);
    std::vector<double> s;
    std::vector<std::uint8_t> l;
    for (int i = 0; i < 50; ++i) {
        s.push_back(std::round(rng.uniform(0.0, 10.0)));
        l.push_back(i % 3 == 0);
    }
    const auto roc = auroc(s, l);
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(std::isinf(roc.points.front().threshold));
    CHECK(roc.points.back().fpr == 1.0);
    CHECK(roc.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
        CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
    std::vector<int> li(l.begin(), l.end());
    CHECK(std::abs(roc.auroc - oracle::concordance(s, li)) <= 1e-12);
    // trapezoid area under the curve equals the rank statistic
    double area = 0.0;
    for (std::size_t i = 1; i < roc.points.size(); ++i)
        area += (roc.points[i].fpr - roc.points[i - 1].fpr) * (roc.points[i].tpr + roc.points[i - 1].tpr) / 2;
    CHECK(area == doctest::Approx(roc.auroc).epsilon(1e-12));
}

TEST_CASE("property: auroc is invariant under the sigmoid and flips with negation") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s, p, neg;
        std::vector<std::uint8_t> l;
        for (int i = 0; i < 30; ++i) {
            s.push_back(rng.uniform(-5.0, 5.0));
            p.push_back(sigmoid(s.back()));
            neg.push_back(-s.back());
            l.push_back(i < 10);
        }
        const double a = auroc(s, l).auroc;
        CHECK(auroc(p, l).auroc == doctest::Approx(a).epsilon(1e-12));
        CHECK(auroc(neg, l).auroc == doctest::Approx(1.0 - a).epsilon(1e-12));
    }
}

TEST_CASE("rank_drugs examples") {
    const auto p = unit_phi();
    {
        const auto s = scene({0.4}, {1.0});
        const std::vector<std::uint32_t> one{0};
        const auto r = rank_drugs(p, s.y, s.graph, 0, one, 0u);
        CHECK(r.target_rank == 1u);
    }
    {
        const auto s = scene({0.2, 0.9, 0.5}, {1.0});
        const auto r = rank_drugs(p, s.y, s.graph, 0, all_drugs(s.graph), 2u);
        CHECK(r.target_rank == 2u);
        REQUIRE(r.ordered.size() == 3);
        CHECK(r.ordered[0].drug.local_index == 1);
        CHECK(r.ordered[1].drug.local_index == 2);
        CHECK(r.ordered[2].drug.local_index == 0);
        CHECK(r.ordered[0].logit == doctest::Approx(0.9));
        CHECK(r.rank_of(0) == 3u);
    }
    {
        const auto s = scene({0.3, 0.7, 0.3, 0.7}, {1.0});
        const auto r = rank_drugs(p, s.y, s.graph, 0, all_drugs(s.graph));
        CHECK(r.ordered[0].drug.local_index == 1);
        CHECK(r.ordered[1].drug.local_index == 3);
        CHECK(r.ordered[2].drug.local_index == 0);
        CHECK(r.ordered[3].drug.local_index == 2);
        CHECK_FALSE(r.target_rank.has_value());
    }
    const auto s = scene({0.1}, {1.0});
    CHECK_THROWS_AS(rank_drugs(p, s.y, s.graph, 4, all_drugs(s.graph)), ValidationError);
}

TEST_CASE("evaluate_test_set with one positive and one negative") {
    auto s = scene({2.0, -1.0}, {1.0});
    DatasetSplit split;
    split.test_pos = {{0, 0}};
    split.test_neg = {{1, 0}};
    const auto eval = evaluate_test_set(unit_phi(), s.y, s.graph, split);
    CHECK(eval.roc.auroc == 1.0);
    CHECK(eval.roc.points.size() == 3);
    REQUIRE(eval.held_out.size() == 1);
    CHECK(eval.held_out[0].rank == 1);
    CHECK(eval.test_logits == std::vector<double>{2.0, -1.0});

    std::ostringstream roc, ranks;
    write_roc_csv(roc, eval.roc);
    CHECK(roc.str() == "threshold,fpr,tpr\ninf,0,0\n2,0,1\n-1,1,1\nAUROC,1\n");
    write_ranks_csv(ranks, s.graph, eval);
    CHECK(ranks.str() == "disease,drug,logit,rank\nDisease::s1,Compound::d1,2,1\n");
    std::ostringstream full;
    write_ranks_csv(full, s.graph, eval, true);
    CHECK(full.str() == "disease,drug,logit,rank\nDisease::s1,Compound::d1,2,1\nDisease::s1,Compound::d2,-1,2\n");

    CHECK_THROWS_AS(evaluate_test_set(unit_phi(), s.y, s.graph, DatasetSplit{}), ValidationError);
}

TEST_CASE("covid_report") {
    const auto p = unit_phi();
    auto s = scene({5.0, 4.0, 0.0, -4.0, -5.0}, {1.0, -1.0});
    CovidTargetSet targets;
    targets.targets = {{EntityKind::Disease, 0}, {EntityKind::Disease, 1}};

    SUBCASE("two targets at K = 2 fill four cells") {
        const auto r = covid_report(p, s.y, s.graph, targets, 2);
        CHECK(r.union_drugs == std::vector<std::uint32_t>{0, 1, 4, 3});
        std::ostringstream out;
        write_covid_csv(out, s.graph, r);
        CHECK(out.str() == "drug,Disease::s1,Disease::s2\nCompound::d1,1,\nCompound::d2,2,\nCompound::d5,,1\n"
                           "Compound::d4,,2\n");
        std::ostringstream full;
        write_covid_csv(full, s.graph, r, true);
        CHECK(full.str() == "drug,Disease::s1,Disease::s2\nCompound::d1,1,5\nCompound::d2,2,4\nCompound::d5,5,1\n"
                            "Compound::d4,4,2\n");
    }
    SUBCASE("a shared top drug appears once") {
        auto same = scene({5.0, 4.0, 0.0}, {1.0, 2.0});
        const auto r = covid_report(p, same.y, same.graph, targets, 1);
        CHECK(r.union_drugs == std::vector<std::uint32_t>{0});
        CHECK(r.ranks[0] == std::vector<std::size_t>{1, 1});
    }
    SUBCASE("K at least the drug count covers every drug") {
        const auto r = covid_report(p, s.y, s.graph, targets, 9);
        CHECK(r.union_drugs.size() == 5);
        CHECK(r.top[0].size() == 5);
    }
    CHECK_THROWS_AS(covid_report(p, s.y, s.graph, CovidTargetSet{}, 2), ValidationError);
    CHECK_THROWS_AS(covid_report(p, s.y, s.graph, targets, 0), ValidationError);
}

TEST_CASE("csv fields with commas are quoted") {
    Scene s;
    s.graph.add_node("Compound::a, b");
    s.graph.add_node("Disease::x");
    s.y = Matrix(2, 1, 1.0);
    DatasetSplit split;
    split.test_pos = {{0, 0}};
    split.test_neg = {{0, 0}};
    const auto eval = evaluate_test_set(unit_phi(), s.y, s.graph, split);
    std::ostringstream out;
    write_ranks_csv(out, s.graph, eval);
    CHECK(out.str().find("\"Compound::a, b\"") != std::string::npos);
}
