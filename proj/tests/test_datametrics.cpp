#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flowlab/datasets.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/metrics.hpp"
#include "test_helpers.hpp"

using namespace flowlab;
using namespace flowlab::test;

namespace {

// Exact W2 between equal-size point sets via the Hungarian algorithm on squared
// distances (O(n^3), potentials form).
double exact_w2(const Matrix& a, const Matrix& b) {
    const int n = static_cast<int>(a.rows());
    const double inf = std::numeric_limits<double>::infinity();
    auto cost = [&](int i, int j) { return (a.row(i - 1) - b.row(j - 1)).squaredNorm(); };
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost(p[j], j);
    return std::sqrt(total / n);
}

// Brute force over all permutations, for cross-checking the assignment oracle.
double brute_w2(const Matrix& a, const Matrix& b) {
    std::vector<int> perm(static_cast<std::size_t>(a.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            total += (a.row(static_cast<Eigen::Index>(i)) - b.row(perm[i])).squaredNorm();
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(a.rows()));
}

Matrix permute_rows(const Matrix& m, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace

TEST_SUITE("datametrics") {

TEST_CASE("gauss8 label counts") {
    DatasetSpec spec;
    const SampleBatch batch = sample_data(spec, 8000, 42);
    std::vector<int> counts(8, 0);
    for (int c : batch.labels) {
        REQUIRE(c >= 0);
        REQUIRE(c < 8);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (int c : counts)
        CHECK(std::abs(c - 1000) <= 120);
}

TEST_CASE("sampling is deterministic per seed") {
    for (const char* name : {"gauss8", "moons", "checkerboard"}) {
        DatasetSpec spec;
        spec.name = name;
        const SampleBatch a = sample_data(spec, 300, 7);
        const SampleBatch b = sample_data(spec, 300, 7);
        CHECK(a.points == b.points);
        CHECK(a.labels == b.labels);
        CHECK(sample_data(spec, 300, 8).points != a.points);
    }
}

TEST_CASE("gauss8 radius tail") {
    DatasetSpec spec;
    const SampleBatch batch = sample_data(spec, 20000, 3);
    const double bound = kGauss8Radius + 5.0 * spec.noise;
    const auto inside = (batch.points.rowwise().norm().array() <= bound).count();
    CHECK(static_cast<double>(inside) / 20000.0 >= 0.999);

    // Points sit near the center of their own mode.
    for (Eigen::Index i = 0; i < 200; ++i)
        CHECK((batch.points.row(i) - gauss8_center(batch.labels[static_cast<std::size_t>(i)])).norm() < 6 * spec.noise);
}

TEST_CASE("moons and checkerboard shapes") {
    DatasetSpec moons;
    moons.name = "moons";
    const SampleBatch m = sample_data(moons, 2000, 1);
    CHECK(moons.class_count() == 2);
    for (int c : m.labels)
        CHECK((c == 0 || c == 1));

    DatasetSpec board;
    board.name = "checkerboard";
    CHECK(board.class_count() == 0);
    const SampleBatch b = sample_data(board, 4000, 1);
    for (Eigen::Index i = 0; i < b.points.rows(); ++i) {
        const double x = b.points(i, 0);
        const double y = b.points(i, 1);
        REQUIRE(std::abs(x) <= 2.0);
        REQUIRE(std::abs(y) <= 2.0);
        const int cx = std::min(3, static_cast<int>(std::floor(x + 2.0)));
        const int cy = std::min(3, static_cast<int>(std::floor(y + 2.0)));
        CHECK((cx + cy) % 2 == 0);
        CHECK(b.labels[static_cast<std::size_t>(i)] == kNullCondition);
    }
}

TEST_CASE("dataset errors") {
    DatasetSpec spec;
    spec.name = "spiral";
    CHECK_THROWS_AS(sample_data(spec, 10, 1), ConfigError);
    spec.name = "";
    CHECK_THROWS_AS(sample_data(spec, 10, 1), ConfigError);
    spec.name = "gauss8";
    CHECK_THROWS_AS(sample_data(spec, 0, 1), ArgumentError);
}

TEST_CASE("swd basics") {
    Rng rng(1);
    const Matrix a = random_matrix(512, 2, rng);
    CHECK(swd(a, a) == 0.0);
    CHECK(swd(a, permute_rows(a, rng)) == swd(a, a));

    const Matrix b = random_matrix(512, 2, rng);
    CHECK(swd(a, b) == swd(b, a));
    CHECK(swd(a, b) == swd(a, b));
    CHECK(swd(a, 2.0 * a) > swd(a, a));
    CHECK_THROWS_AS(swd(Matrix(0, 2), a), ArgumentError);
    CHECK_THROWS_AS(swd(a, Matrix::Zero(3, 3)), ShapeError);
}

TEST_CASE("swd of a shifted Gaussian") {
    Rng rng(2);
    const Matrix a = random_matrix(4096, 2, rng);
    Matrix b = a;
    b.col(0).array() += 3.0;
    // Projected shift is 3 cos(theta); the root mean square over directions is 3/sqrt(2).
    const double oracle = 3.0 / std::sqrt(2.0);
    CHECK(std::abs(swd(a, b, 256) - oracle) <= 0.1 * oracle);
}

TEST_CASE("assignment oracle agrees with brute force") {
    Rng rng(3);
    for (int k = 0; k < 5; ++k) {
        const Matrix a = random_matrix(7, 2, rng);
        const Matrix b = random_matrix(7, 2, rng);
        CHECK(exact_w2(a, b) == doctest::Approx(brute_w2(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("swd orders distributions like exact W2") {
    Rng rng(4);
    const Matrix a = random_matrix(64, 2, rng);
    std::vector<Matrix> others;
    for (int k = 0; k < 6; ++k) {
        Matrix b = random_matrix(64, 2, rng);
        b *= 1.0 + 0.4 * k;
        b.col(0).array() += 0.5 * k;
        others.push_back(b);
    }
    std::vector<double> w2, sw;
    for (const auto& b : others) {
        w2.push_back(exact_w2(a, b));
        sw.push_back(swd(a, b));
        CHECK(sw.back() <= w2.back() + 1e-12);
    }
    for (std::size_t i = 0; i < others.size(); ++i)
        for (std::size_t j = i + 1; j < others.size(); ++j)
            CHECK((w2[i] < w2[j]) == (sw[i] < sw[j]));
}

TEST_CASE("mmd_rbf") {
    Rng rng(6);
    const Matrix a = random_matrix(200, 2, rng);
    CHECK(mmd_rbf(a, a, 1.0).raw <= 1e-10);
    CHECK(mmd_rbf(a, a, 1.0).value >= 0.0);

    const Matrix same = random_matrix(200, 2, rng);
    Matrix far = random_matrix(200, 2, rng) * 0.1;
    far.col(0).array() += 100.0;
    const Matrix near = a * 0.1;
    const MmdResult apart = mmd_rbf(near, far, 1.0);
    // Self-terms are each close to 1 for tight clusters, cross-term vanishes.
    CHECK(apart.value == doctest::Approx(2.0).epsilon(0.05));
    CHECK(apart.value > mmd_rbf(a, same, 1.0).value);

    const MmdResult base = mmd_rbf(a, same, 0.7);
    const MmdResult permuted = mmd_rbf(permute_rows(a, rng), permute_rows(same, rng), 0.7);
    CHECK(permuted.raw == doctest::Approx(base.raw).epsilon(1e-9));
    CHECK(base.value == std::max(base.raw, 0.0));

    CHECK_THROWS_AS(mmd_rbf(a, same, 0.0), ArgumentError);
    CHECK_THROWS_AS(mmd_rbf(a.topRows(1), same, 1.0), ArgumentError);
}

TEST_CASE("noise floor") {
    DatasetSpec spec;
    const double large = noise_floor(spec, 4096, 3, 1);
    const double small = noise_floor(spec, 512, 3, 1);
    CHECK(large > 0.0);
    CHECK(large < small);
    CHECK(noise_floor(spec, 512, 3, 1) == small);
    CHECK_THROWS_AS(noise_floor(spec, 512, 2, 1), ArgumentError);
}

TEST_CASE("a trained conditional teacher respects its labels") {
    DatasetSpec spec;
    const SampleBatch data = sample_data(spec, 4096, 11);
    Architecture arch = small_arch(8);
    arch.hidden = {64, 64};
    arch.time_dim = 16;
    TeacherTrainConfig cfg;
    cfg.steps = 1500;
    cfg.batch = 256;
    cfg.final_lr_fraction = 0.1;
    const VelocityNet net = train_teacher(data, arch, cfg).net;

    const Matrix z0 = gaussian_noise(800, 2, 5);
    std::vector<int> labels(800);
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = static_cast<int>(i % 8);
    const Matrix out = sample(net, z0, StepSchedule::uniform(16), labels, {3.0, true}, false).final;
    std::vector<int> hits(8, 0);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        int nearest = 0;
        for (int k = 1; k < 8; ++k)
            if ((out.row(i) - gauss8_center(k)).norm() < (out.row(i) - gauss8_center(nearest)).norm())
                nearest = k;
        hits[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += nearest == labels[static_cast<std::size_t>(i)];
    }
    for (int k = 0; k < 8; ++k) {
        INFO("mode " << k);
        CHECK(hits[static_cast<std::size_t>(k)] >= 90);
    }
}

TEST_CASE("batch validation") {
    SampleBatch bad{Matrix::Zero(3, 2), {0, 1}};
    CHECK_THROWS_AS(bad.validate(), ShapeError);
    SampleBatch ok{Matrix::Zero(3, 2), {0, 1, 2}};
    CHECK(ok.head(2).points.rows() == 2);
}

}  // TEST_SUITE
