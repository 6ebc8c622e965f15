#include "mailproc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mailproc/errors.hpp"

namespace mailproc {

void KMeansConfig::validate(std::size_t points, std::size_t dims) const {
    if (k < 1) throw ContractViolation("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > points)
        throw ContractViolation("kmeans: k=" + std::to_string(k) + " exceeds " + std::to_string(points) + " points");
    if (initial_centroids.rows != static_cast<std::size_t>(k) || initial_centroids.cols != dims)
        throw ContractViolation("kmeans: need exactly k initial centroids of the point dimension");
    if (max_iterations < 1) throw ContractViolation("kmeans: max_iterations must be >= 1");
    if (!(convergence_epsilon > 0.0)) throw ContractViolation("kmeans: convergence_epsilon must be > 0");
}

namespace {

kernels::Assignment assign(const DenseMatrix& points, const DenseMatrix& centroids, const VectorDistance& dist,
                           kernels::Execution exec) {
    if (!dist) return kernels::assign_nearest(points, centroids, exec);
    kernels::Assignment a;
    a.labels.assign(points.rows, 0);
    a.squared_distance.assign(points.rows, 0.0);
    for (std::size_t i = 0; i < points.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.rows; ++c) {
            double d = dist(points.row(i), centroids.row(c));
            if (d < best) {
                best = d;
                a.labels[i] = static_cast<int>(c);
            }
        }
        a.squared_distance[i] = squared_euclidean(points.row(i), centroids.row(a.labels[i]));
    }
    return a;
}

double total(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

KMeansResult kmeans(const DenseMatrix& points, const KMeansConfig& cfg, const VectorDistance& dist,
                    kernels::Execution exec) {
    cfg.validate(points.rows, points.cols);
    const auto k = static_cast<std::size_t>(cfg.k);

    KMeansResult r;
    r.centroids = cfg.initial_centroids;
    auto a = assign(points, r.centroids, dist, exec);
    r.labels = a.labels;
    r.objective.push_back(total(a.squared_distance));

    for (r.iterations = 1; r.iterations <= cfg.max_iterations; ++r.iterations) {
        std::vector<std::size_t> sizes;
        DenseMatrix next = kernels::cluster_means(points, r.labels, k, sizes);

        bool reseeded = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            // Reseed with the point farthest from its centroid, taken from a
            // cluster that can spare it.
            std::size_t far = points.rows;
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.rows; ++i) {
                auto own = static_cast<std::size_t>(r.labels[i]);
                if (sizes[own] < 2) continue;
                double d = squared_euclidean(points.row(i), next.row(own));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == points.rows) continue;
            --sizes[static_cast<std::size_t>(r.labels[far])];
            r.labels[far] = static_cast<int>(c);
            sizes[c] = 1;
            std::copy(points.row(far).begin(), points.row(far).end(), next.row(c).begin());
            reseeded = true;
        }
        // Donor clusters lost a point, so their means are stale.
        if (reseeded) next = kernels::cluster_means(points, r.labels, k, sizes);

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            shift = std::max(shift, std::sqrt(squared_euclidean(next.row(c), r.centroids.row(c))));
        r.centroids = std::move(next);

        a = assign(points, r.centroids, dist, exec);
        bool changed = a.labels != r.labels;
        r.labels = a.labels;
        r.objective.push_back(total(a.squared_distance));
        if (!changed || shift < cfg.convergence_epsilon) {
            r.converged = true;
            break;
        }
    }
    r.iterations = std::min(r.iterations, cfg.max_iterations);
    return r;
}

}  // namespace mailproc
