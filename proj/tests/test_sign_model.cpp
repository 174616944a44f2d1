#include <doctest.h>

#include <cmath>
#include <string>

#include "drcov/error.hpp"
#include "drcov/random.hpp"
#include "drcov/sign_model.hpp"
#include "drcov/trainer.hpp"
#include "oracles.hpp"

using namespace drcov;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Matrix m(r, c);
    for (auto& v : m.values()) v = rng.uniform(-scale, scale);
    return m;
}

oracle::Dense to_dense(const Matrix& m) {
    auto d = oracle::zeros(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
    return d;
}

SparseMatrix path3() {
    return normalize_adjacency(
        SparseMatrix::from_triplets(3, 3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}}));
}

ModelParams zero_params(const ModelDims& dims) {
    ModelParams p = init_params(dims, 0);
    for (auto& t : p.theta) t.fill(0.0);
    p.w.fill(0.0);
    p.phi.fill(0.0);
    return p;
}

ModelParams scalar_params() {
    ModelParams p = zero_params({1, 1, 1, 0});
    p.theta[0](0, 0) = 1.0;
    p.w(0, 0) = 1.0;
    p.phi(0, 0) = 1.0;
    return p;
}

DiffusionFeatures ones(std::size_t n, std::size_t d, std::size_t radius) {
    DiffusionFeatures f;
    f.hops.assign(radius + 1, Matrix(n, d, 1.0));
    return f;
}

}  // namespace

TEST_CASE("precompute_diffusion") {
    Rng rng(1);
    const auto x = random_matrix(rng, 3, 4);

    SUBCASE("radius 0 keeps only X") {
        const auto f = precompute_diffusion(path3(), x, 0);
        REQUIRE(f.hops.size() == 1);
        CHECK(f.hops[0] == x);
        CHECK(f.radius() == 0);
    }
    SUBCASE("identity operator repeats X") {
        const auto f = precompute_diffusion(SparseMatrix::identity(3), x, 2);
        for (const auto& h : f.hops) CHECK(h == x);
    }
    SUBCASE("path graph against dense powers") {
        const auto f = precompute_diffusion(path3(), x, 2);
        REQUIRE(f.hops.size() == 3);
        const auto a = oracle::normalize(oracle::Dense{{0, 1, 0}, {1, 0, 1}, {0, 1, 0}});
        const auto ax = oracle::matmul(a, to_dense(x));
        const auto aax = oracle::matmul(a, ax);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(std::abs(f.hops[1](i, j) - ax[i][j]) <= 1e-12);
                CHECK(std::abs(f.hops[2](i, j) - aax[i][j]) <= 1e-12);
            }
    }
    CHECK_THROWS_AS(precompute_diffusion(path3(), Matrix(2, 4), 1), ShapeError);
    CHECK_THROWS_AS(precompute_diffusion(path3(), x, -1), ShapeError);
}

TEST_CASE("init_params is seeded and bounded") {
    const ModelDims dims{400, 250, 250, 2};
    const auto a = init_params(dims, 7);
    CHECK(a == init_params(dims, 7));
    CHECK_FALSE(a == init_params(dims, 8));
    REQUIRE(a.theta.size() == 3);
    CHECK(a.theta[0].rows() == 400);
    CHECK(a.theta[0].cols() == 250);
    CHECK(a.w.rows() == 750);
    CHECK(a.phi.rows() == 250);
    const double s = std::sqrt(6.0 / 650.0);
    CHECK(s == doctest::Approx(0.09608).epsilon(1e-4));
    double lo = 0.0, hi = 0.0;
    for (double v : a.theta[1].values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= -s);
    CHECK(hi <= s);
    CHECK(hi > 0.9 * s);  // the range is actually used

    const auto one = init_params({1, 1, 1, 0}, 3);
    CHECK(std::abs(one.phi(0, 0)) <= std::sqrt(3.0));
    CHECK_THROWS_AS(init_params({0, 1, 1, 0}, 1), ShapeError);
}

TEST_CASE("encode examples") {
    const auto zeros = encode(zero_params({2, 3, 4, 1}), ones(5, 2, 1));
    CHECK(zeros.y == Matrix(5, 4));

    const auto scalar = encode(scalar_params(), ones(1, 1, 0));
    CHECK(scalar.y(0, 0) == doctest::Approx(0.76159).epsilon(1e-5));
    CHECK(scalar.z(0, 0) == doctest::Approx(std::tanh(1.0)));

    auto negative = scalar_params();
    negative.w(0, 0) = -1.0;
    CHECK(encode(negative, ones(1, 1, 0)).y(0, 0) == doctest::Approx(-0.01 * std::tanh(1.0)));

    CHECK_THROWS_AS(encode(scalar_params(), ones(1, 2, 0)), ShapeError);
    CHECK_THROWS_AS(encode(scalar_params(), ones(1, 1, 1)), ShapeError);
}

TEST_CASE("encode reports the branch holding a non-finite value") {
    auto f = ones(2, 1, 1);
    f.hops[1](1, 0) = std::nan("");
    CHECK_THROWS_WITH_AS(encode(zero_params({1, 1, 1, 1}), f), doctest::Contains("branch 1"), NumericError);
}

TEST_CASE("encode_rows matches the full encoding") {
    Rng rng(2);
    DiffusionFeatures f;
    for (int k = 0; k < 3; ++k) f.hops.push_back(random_matrix(rng, 6, 5));
    const auto p = init_params({5, 4, 3, 2}, 11);
    const auto all = encode(p, f);
    const std::vector<std::size_t> rows{4, 0, 4};
    const auto some = encode_rows(p, f, rows);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(some.y(i, j) == all.y(rows[i], j));
    CHECK(encode(p, f).y == all.y);
}

TEST_CASE("score examples") {
    const auto p = zero_params({1, 1, 2, 0});
    const std::vector<double> a{1.0, 2.0}, b{-3.0, 0.5};
    CHECK(score(p, a, b) == 0.0);

    auto e1 = zero_params({1, 1, 1, 0});
    e1.phi(0, 0) = 1.0;
    const std::vector<double> one{1.0};
    CHECK(score(e1, one, one) == 1.0);
    CHECK(sigmoid(score(e1, one, one)) == doctest::Approx(0.73106).epsilon(1e-5));

    Rng rng(3);
    auto r = init_params({1, 1, 3, 0}, 4);
    r.phi = random_matrix(rng, 3, 3);
    const std::vector<double> c{rng.uniform(), rng.uniform(), rng.uniform()};
    const std::vector<double> d{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto phi_d = oracle::matmul(to_dense(r.phi), oracle::Dense{{d[0]}, {d[1]}, {d[2]}});
    const double want = c[0] * phi_d[0][0] + c[1] * phi_d[1][0] + c[2] * phi_d[2][0];
    CHECK(std::abs(score(r, c, d) - want) <= 1e-12);

    CHECK_THROWS_AS(score(r, a, b), ShapeError);
}

TEST_CASE("backward examples") {
    const std::vector<LabeledPair> pos{{0, 1, 1.0}};
    const auto z = zero_params({2, 3, 2, 1});
    const auto lg = backward(z, ones(2, 2, 1), pos, 1.5);
    CHECK(lg.loss == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-15));
    CHECK(lg.grads.phi == Matrix(2, 2));
    CHECK(batch_loss(z, ones(2, 2, 1), pos, 1.5) == lg.loss);
}

TEST_CASE("backward matches central differences") {
    Rng rng(5);
    DiffusionFeatures f;
    for (int k = 0; k < 3; ++k) f.hops.push_back(random_matrix(rng, 5, 3));
    auto p = init_params({3, 4, 3, 2}, 6);
    for (auto& v : p.phi.values()) v *= 3.0;
    const std::vector<LabeledPair> batch{{0, 3, 1.0}, {1, 4, 0.0}, {2, 3, 0.0}, {0, 4, 1.0}};
    const auto lg = backward(p, f, batch, 1.5);

    const double h = 1e-6;
    double worst = 0.0;
    auto probe = [&](Matrix& m, const Matrix& g) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double keep = m.values()[i];
            m.values()[i] = keep + h;
            const double up = batch_loss(p, f, batch, 1.5);
            m.values()[i] = keep - h;
            const double down = batch_loss(p, f, batch, 1.5);
            m.values()[i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double analytic = g.values()[i];
            worst = std::max(worst, std::abs(numeric - analytic) /
                                        std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
        }
    };
    for (std::size_t k = 0; k < 3; ++k) probe(p.theta[k], lg.grads.theta[k]);
    probe(p.w, lg.grads.w);
    probe(p.phi, lg.grads.phi);
    CHECK(worst <= 1e-4);
}

TEST_CASE("checkpoints round-trip and reject damage") {
    const auto p = init_params({4, 3, 2, 1}, 9);
    const auto bytes = serialize_checkpoint(p);
    CHECK(deserialize_checkpoint(bytes) == p);

    auto flipped = bytes;
    flipped[40] ^= 0x10;
    CHECK_THROWS_WITH_AS(deserialize_checkpoint(flipped), doctest::Contains("checksum"), ParseError);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)), ParseError);
    CHECK_THROWS_AS(deserialize_checkpoint("short"), ParseError);
    CHECK_THROWS_AS(read_checkpoint("/nonexistent/checkpoint.bin"), Error);
}
