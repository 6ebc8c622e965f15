#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "mailproc/errors.hpp"
#include "mailproc/kmeans.hpp"

using namespace mailproc;

namespace {

DenseMatrix random_points(std::mt19937& rng, std::size_t n, std::size_t dims) {
    std::uniform_real_distribution<double> u(-1, 1);
    DenseMatrix m(n, dims);
    for (auto& x : m.data) x = u(rng);
    return m;
}

DenseMatrix pick_rows(const DenseMatrix& points, const std::vector<std::size_t>& rows) {
    DenseMatrix m(rows.size(), points.cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy(points.row(rows[r]).begin(), points.row(rows[r]).end(), m.row(r).begin());
    return m;
}

double sse(const DenseMatrix& points, const std::vector<int>& labels, std::size_t k) {
    std::vector<std::size_t> sizes;
    auto means = kernels::cluster_means(points, labels, k, sizes);
    double s = 0;
    for (std::size_t i = 0; i < points.rows; ++i)
        s += squared_euclidean(points.row(i), means.row(static_cast<std::size_t>(labels[i])));
    return s;
}

// Smallest within-cluster sum of squares over every labeling with k non-empty clusters.
double optimum(const DenseMatrix& points, std::size_t k, std::vector<int>& best_labels) {
    const std::size_t n = points.rows;
    std::vector<int> labels(n, 0);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            std::vector<bool> used(k, false);
            for (int l : labels) used[static_cast<std::size_t>(l)] = true;
            if (std::count(used.begin(), used.end(), true) != static_cast<long>(k)) return;
            double s = sse(points, labels, k);
            if (s < best) {
                best = s;
                best_labels = labels;
            }
            return;
        }
        for (std::size_t c = 0; c < k; ++c) {
            labels[i] = static_cast<int>(c);
            rec(i + 1);
        }
    };
    rec(0);
    return best;
}

}  // namespace

TEST_CASE("k-means objective is non-increasing on 100 random runs") {
    std::mt19937 rng(99);
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 5 + rng() % 60;
        const std::size_t dims = 1 + rng() % 6;
        auto pts = random_points(rng, n, dims);
        KMeansConfig cfg;
        cfg.k = 1 + static_cast<int>(rng() % std::min<std::size_t>(n, 8));
        // Arbitrary starting centroids, not necessarily data points.
        cfg.initial_centroids = random_points(rng, static_cast<std::size_t>(cfg.k), dims);
        auto r = kmeans(pts, cfg);
        REQUIRE(!r.objective.empty());
        for (std::size_t i = 1; i < r.objective.size(); ++i)
            REQUIRE(r.objective[i] <= r.objective[i - 1] * (1 + 1e-12) + 1e-15);
        REQUIRE(r.labels.size() == n);
        REQUIRE(r.iterations <= cfg.max_iterations);
    }
}

TEST_CASE("converged k-means is a fixed point of Lloyd's step") {
    std::mt19937 rng(101);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 4 + rng() % 30;
        auto pts = random_points(rng, n, 2);
        KMeansConfig cfg;
        cfg.k = 1 + static_cast<int>(rng() % 4);
        std::vector<std::size_t> rows;
        for (int c = 0; c < cfg.k; ++c) rows.push_back(static_cast<std::size_t>(c));
        cfg.initial_centroids = pick_rows(pts, rows);
        cfg.max_iterations = 500;
        auto r = kmeans(pts, cfg);
        REQUIRE(r.converged);
        auto again = kernels::assign_nearest(pts, r.centroids);
        CHECK(again.labels == r.labels);
    }
}

TEST_CASE("empty clusters are reseeded with the farthest point") {
    DenseMatrix pts(3, 1);
    pts.data = {0.0, 0.0, 10.0};
    KMeansConfig cfg;
    cfg.k = 2;
    cfg.initial_centroids = DenseMatrix(2, 1);
    cfg.initial_centroids.data = {0.0, 100.0};
    auto r = kmeans(pts, cfg);
    CHECK(r.labels == std::vector<int>{0, 0, 1});
    CHECK(r.centroids.data == std::vector<double>{0.0, 10.0});
    CHECK(r.converged);
    CHECK(r.objective.back() == 0.0);
}

TEST_CASE("k-means on all-identical points terminates") {
    DenseMatrix pts(4, 2);
    std::fill(pts.data.begin(), pts.data.end(), 1.0);
    KMeansConfig cfg;
    cfg.k = 2;
    cfg.initial_centroids = DenseMatrix(2, 2);
    cfg.initial_centroids.data = {1.0, 1.0, 5.0, 5.0};
    auto r = kmeans(pts, cfg);
    CHECK(r.iterations <= cfg.max_iterations);
    CHECK(r.objective.back() == 0.0);
}

TEST_CASE("exhaustive check on small inputs with duplicate points") {
    std::mt19937 rng(103);
    for (int round = 0; round < 60; ++round) {
        const std::size_t n = 2 + rng() % 5;  // up to 6 points
        DenseMatrix pts(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && rng() % 3 == 0) {
                const std::size_t src = rng() % i;
                std::copy(pts.row(src).begin(), pts.row(src).end(), pts.row(i).begin());
                continue;
            }
            pts.row(i)[0] = static_cast<double>(rng() % 5);
            pts.row(i)[1] = static_cast<double>(rng() % 5);
        }
        const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 3);
        std::vector<int> best_labels;
        const double best = optimum(pts, k, best_labels);

        // From any data-point start, Lloyd never beats the optimum.
        KMeansConfig cfg;
        cfg.k = static_cast<int>(k);
        std::vector<std::size_t> rows;
        for (std::size_t c = 0; c < k; ++c) rows.push_back(c);
        cfg.initial_centroids = pick_rows(pts, rows);
        auto r = kmeans(pts, cfg);
        CHECK(r.objective.back() >= best - 1e-9);

        // Started at the optimal means, it stays optimal.
        std::vector<std::size_t> sizes;
        cfg.initial_centroids = kernels::cluster_means(pts, best_labels, k, sizes);
        auto opt = kmeans(pts, cfg);
        CHECK(std::abs(opt.objective.back() - best) < 1e-9);
    }
}

TEST_CASE("custom assignment distance") {
    DenseMatrix pts(4, 2);
    pts.data = {0, 0, 0, 1, 10, 0, 10, 1};
    KMeansConfig cfg;
    cfg.k = 2;
    cfg.initial_centroids = pick_rows(pts, {0, 2});
    auto manhattan = [](std::span<const double> a, std::span<const double> b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        return s;
    };
    auto r = kmeans(pts, cfg, manhattan);
    CHECK(r.labels == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("serial and parallel k-means agree exactly") {
    std::mt19937 rng(107);
    for (int round = 0; round < 20; ++round) {
        auto pts = random_points(rng, 200, 5);
        KMeansConfig cfg;
        cfg.k = 6;
        cfg.initial_centroids = pick_rows(pts, {0, 1, 2, 3, 4, 5});
        auto s = kmeans(pts, cfg, {}, kernels::Execution::serial);
        auto p = kmeans(pts, cfg, {}, kernels::Execution::parallel);
        CHECK(s.labels == p.labels);
        CHECK(s.centroids == p.centroids);
        CHECK(s.objective == p.objective);
    }
}

TEST_CASE("k-means config validation") {
    DenseMatrix pts(3, 1);
    KMeansConfig cfg;
    cfg.k = 4;
    cfg.initial_centroids = DenseMatrix(4, 1);
    CHECK_THROWS_AS(kmeans(pts, cfg), ContractViolation);
    cfg.k = 0;
    CHECK_THROWS_AS(kmeans(pts, cfg), ContractViolation);
    cfg.k = 2;
    cfg.initial_centroids = DenseMatrix(2, 3);
    CHECK_THROWS_AS(kmeans(pts, cfg), ContractViolation);
    cfg.initial_centroids = DenseMatrix(2, 1);
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(kmeans(pts, cfg), ContractViolation);
}
