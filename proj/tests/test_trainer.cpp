#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "drcov/error.hpp"
#include "drcov/random.hpp"
#include "drcov/trainer.hpp"
#include "oracles.hpp"

using namespace drcov;

namespace {

std::vector<LinkPair> pairs(std::size_t n, std::uint32_t offset = 0) {
    std::vector<LinkPair> out;
    for (std::uint32_t i = 0; i < n; ++i) out.push_back({offset + i, i % 7});
    return out;
}

// 2 drugs, 2 diseases, 2 genes; drug i treats disease i.
struct Toy {
    HeteroGraph graph;
    DiffusionFeatures diffusion;
    DatasetSplit split;
};

Toy toy() {
    Toy t;
    auto& g = t.graph;
    for (auto n : {"Compound::a", "Compound::b", "Disease::x", "Disease::y", "Gene::1", "Gene::2"}) g.add_node(n);
    const auto treats = g.relations().intern("treats");
    const auto binds = g.relations().intern("binds");
    const auto assoc = g.relations().intern("associates");
    g.add_edge(*g.find("Compound::a"), treats, *g.find("Disease::x"));
    g.add_edge(*g.find("Compound::b"), treats, *g.find("Disease::y"));
    g.add_edge(*g.find("Compound::a"), binds, *g.find("Gene::1"));
    g.add_edge(*g.find("Compound::b"), binds, *g.find("Gene::2"));
    g.add_edge(*g.find("Disease::x"), assoc, *g.find("Gene::1"));
    g.add_edge(*g.find("Disease::y"), assoc, *g.find("Gene::2"));
    Rng rng(1);
    Matrix x(6, 4);
    for (auto& v : x.values()) v = rng.normal();
    t.diffusion = precompute_diffusion(normalize_adjacency(build_adjacency(g)), x, 2);
    t.split.train_pos = {{0, 0}, {1, 1}};
    t.split.train_neg = {{0, 1}, {1, 0}};
    return t;
}

TrainConfig small(std::size_t epochs, double lr) {
    TrainConfig c;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.hidden_dim = 4;
    c.embed_dim = 3;
    c.seed = 2;
    return c;
}

}  // namespace

TEST_CASE("weighted_bce examples") {
    CHECK(weighted_bce(0.0, 1.0, 1.5) == doctest::Approx(1.5 * std::log(2.0)));
    CHECK(weighted_bce(0.0, 0.0, 1.5) == doctest::Approx(std::log(2.0)));
    CHECK(weighted_bce(40.0, 1.0, 1.5) < 1e-16);
    CHECK(weighted_bce(-800.0, 1.0, 1.0) == doctest::Approx(800.0));
    CHECK(std::isfinite(weighted_bce(800.0, 0.0, 1.0)));
}

TEST_CASE("property: weighted_bce is non-negative and matches the naive form") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double s = rng.uniform(-15.0, 15.0);
        const double z = rng.below(2);
        const double w = rng.uniform(0.1, 5.0);
        const double loss = weighted_bce(s, z, w);
        CHECK(loss >= 0.0);
        CHECK(std::abs(loss - oracle::naive_bce(s, z, w)) <= 1e-10);
        const double h = 1e-5;
        const double numeric = (weighted_bce(s + h, z, w) - weighted_bce(s - h, z, w)) / (2 * h);
        CHECK(std::abs(numeric - weighted_bce_grad(s, z, w)) <= 1e-6 * std::max(1.0, std::abs(numeric)));
    }
}

TEST_CASE("make_batches composition") {
    const auto pos = pairs(300);
    const auto neg = pairs(3070, 1000);

    SUBCASE("full batches hold 205 positives and 307 negatives") {
        CHECK(positives_per_batch(512, 1.5) == 205);
        const auto batches = make_batches(pos, neg, 512, 1.5, 9);
        CHECK(batches.size() == 10);
        std::multiset<LinkPair> seen;
        for (const auto& b : batches) {
            CHECK(b.size() == 512);
            CHECK(b.positives() == 205);
            for (std::size_t i = 0; i < b.size(); ++i)
                if (!b.labels[i]) seen.insert(b.pairs[i]);
        }
        CHECK(seen.size() == neg.size());
        CHECK(std::set<LinkPair>(seen.begin(), seen.end()).size() == neg.size());
    }
    SUBCASE("ratio zero is a pass over the positives") {
        const auto batches = make_batches(pos, neg, 128, 0.0, 1);
        CHECK(batches.size() == 3);
        std::size_t total = 0;
        for (const auto& b : batches) {
            CHECK(b.positives() == b.size());
            total += b.size();
        }
        CHECK(total == 300);
    }
    SUBCASE("a short final batch keeps the ratio") {
        const auto batches = make_batches(pos, pairs(10, 1000), 512, 1.5, 1);
        REQUIRE(batches.size() == 1);
        CHECK(batches[0].size() == 17);
        CHECK(batches[0].positives() == 7);
    }
    SUBCASE("seeded") {
        const auto a = make_batches(pos, neg, 512, 1.5, 4);
        const auto b = make_batches(pos, neg, 512, 1.5, 4);
        CHECK(a.front().pairs == b.front().pairs);
        CHECK_FALSE(a.front().pairs == make_batches(pos, neg, 512, 1.5, 5).front().pairs);
    }
    CHECK_THROWS_AS(make_batches({}, neg, 512, 1.5, 1), ValidationError);
    CHECK_THROWS_AS(make_batches(pos, neg, 0, 1.5, 1), ValidationError);
}

TEST_CASE("sgd_step") {
    auto p = init_params({1, 1, 1, 0}, 1);
    auto g = Gradients::zeros_like(p);
    const auto before = p;
    sgd_step(p, g, 0.5);
    CHECK(p == before);

    p.phi(0, 0) = 1.0;
    g.phi(0, 0) = 2.0;
    sgd_step(p, g, 0.1);
    CHECK(p.phi(0, 0) == doctest::Approx(0.8));
    g.w(0, 0) = 7.0;
    const auto frozen = p;
    sgd_step(p, g, 0.0);
    CHECK(p == frozen);

    g.w(0, 0) = std::nan("");
    CHECK_THROWS_AS(sgd_step(p, g, 0.1), NumericError);
}

TEST_CASE("train on a toy graph") {
    const auto t = toy();
    SUBCASE("one epoch lowers the training loss") {
        const auto cfg = small(1, 0.1);
        const auto init = init_params(model_dims(cfg, 4), param_seed(cfg));
        const auto before = dataset_loss(init, t.diffusion, t.graph, t.split.train_pos, t.split.train_neg, 1.5);
        const auto r = train(t.graph, t.diffusion, t.split, cfg);
        const auto after = dataset_loss(r.params, t.diffusion, t.graph, t.split.train_pos, t.split.train_neg, 1.5);
        CHECK(after < before);
        CHECK(r.report.epoch_loss.size() == 1);
    }
    SUBCASE("zero epochs return the initial parameters") {
        const auto cfg = small(0, 0.1);
        const auto r = train(t.graph, t.diffusion, t.split, cfg);
        CHECK(r.params == init_params(model_dims(cfg, 4), param_seed(cfg)));
        CHECK(r.report.epoch_loss.empty());
    }
    SUBCASE("deterministic for a seed") {
        const auto cfg = small(5, 0.1);
        std::vector<double> seen;
        const auto a = train(t.graph, t.diffusion, t.split, cfg, {}, [&](std::size_t, double l, double) {
            seen.push_back(l);
        });
        const auto b = train(t.graph, t.diffusion, t.split, cfg);
        CHECK(a.params == b.params);
        CHECK(a.report.epoch_loss == b.report.epoch_loss);
        CHECK(seen == a.report.epoch_loss);
    }
    SUBCASE("a diverging rate reports where it failed") {
        CHECK_THROWS_WITH_AS(train(t.graph, t.diffusion, t.split, small(50, 1e200)), doctest::Contains("epoch"),
                             NumericError);
    }
}

TEST_CASE("training log format") {
    TrainReport r;
    r.epoch_loss = {0.5, 0.25};
    r.epoch_seconds = {1.0, 2.0};
    std::ostringstream out;
    write_train_log(out, r);
    CHECK(out.str() == "epoch,mean_loss,seconds\n1,0.5,1\n2,0.25,2\n");
}

TEST_CASE("config precedence and validation") {
    TrainConfig c;
    CHECK(c.get("learning_rate") == "0.01");
    CHECK(c.get("test_fraction") == "0.1");
    std::istringstream file("# comment\nepochs = 3\nlearning_rate=0.2  # trailing\n\n");
    apply_config_stream(c, file, "cfg");
    CHECK(c.epochs == 3);
    CHECK(c.learning_rate == 0.2);

    ::setenv("DRCOVTEST_EPOCHS", "7", 1);
    apply_config_env(c, "DRCOVTEST_");
    ::unsetenv("DRCOVTEST_EPOCHS");
    CHECK(c.epochs == 7);

    c.set("seed", "12");
    CHECK(c.seed == 12);
    CHECK_THROWS_AS(c.set("momentum", "0.9"), ValidationError);
    CHECK_THROWS_AS(c.set("epochs", "many"), ValidationError);
    std::istringstream bad("epochs 3\n");
    CHECK_THROWS_WITH_AS(apply_config_stream(c, bad, "cfg"), doctest::Contains("cfg:1"), ValidationError);
    for (auto key : TrainConfig::keys()) CHECK_NOTHROW(c.get(std::string(key)));

    c.test_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}
