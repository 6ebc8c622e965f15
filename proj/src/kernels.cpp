#include "mailproc/kernels.hpp"

#include <cmath>
#include <limits>

#include "mailproc/errors.hpp"

namespace mailproc::kernels {

namespace {

void check_vocabularies(const std::vector<EmailFeatures>& features) {
    for (const auto& f : features)
        if (f.subject_vocabulary != features.front().subject_vocabulary ||
            f.body_vocabulary != features.front().body_vocabulary)
            throw ContractViolation("pairwise distances: email " + std::to_string(f.id) +
                                    " uses a different vocabulary");
}

std::vector<EmailId> ids_of(const std::vector<EmailFeatures>& features) {
    std::vector<EmailId> ids;
    ids.reserve(features.size());
    for (const auto& f : features) ids.push_back(f.id);
    return ids;
}

}  // namespace

DistanceMatrix pairwise_email_distances(const std::vector<EmailFeatures>& features, const DistanceSpec& spec,
                                        Execution exec) {
    spec.validate();
    if (!features.empty()) check_vocabularies(features);
    DistanceMatrix out(ids_of(features));
    const auto n = static_cast<std::ptrdiff_t>(features.size());

    if (exec == Execution::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            for (std::ptrdiff_t j = i + 1; j < n; ++j)
                out.set(i, j, email_distance(features[i], features[j], spec));
        return out;
    }

    // Rows write disjoint (i, j > i) cells and their mirrors, so no two
    // iterations touch the same element.
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        for (std::ptrdiff_t j = i + 1; j < n; ++j)
            out.set(i, j, email_distance(features[i], features[j], spec));
    return out;
}

DistanceMatrix pairwise_euclidean(const DenseMatrix& points, const std::vector<EmailId>& ids, Execution exec) {
    if (ids.size() != points.rows) throw ContractViolation("pairwise_euclidean: one id per point required");
    DistanceMatrix out(ids);
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
    if (exec == Execution::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            for (std::ptrdiff_t j = i + 1; j < n; ++j)
                out.set(i, j, std::sqrt(squared_euclidean(points.row(i), points.row(j))));
        return out;
    }
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        for (std::ptrdiff_t j = i + 1; j < n; ++j)
            out.set(i, j, std::sqrt(squared_euclidean(points.row(i), points.row(j))));
    return out;
}

Assignment assign_nearest(const DenseMatrix& points, const DenseMatrix& centroids, Execution exec) {
    if (points.cols != centroids.cols) throw ContractViolation("assign_nearest: dimension mismatch");
    Assignment a;
    a.labels.assign(points.rows, 0);
    a.squared_distance.assign(points.rows, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(points.rows);

    auto one = [&](std::ptrdiff_t i) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (std::size_t c = 0; c < centroids.rows; ++c) {
            double d = squared_euclidean(points.row(i), centroids.row(c));
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        a.labels[i] = best_c;
        a.squared_distance[i] = best;
    };

    if (exec == Execution::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
        return a;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
    return a;
}

DenseMatrix cluster_means(const DenseMatrix& points, const std::vector<int>& labels, std::size_t k,
                          std::vector<std::size_t>& sizes) {
    DenseMatrix means(k, points.cols);
    sizes.assign(k, 0);
    for (std::size_t i = 0; i < points.rows; ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        ++sizes[c];
        auto dst = means.row(c);
        auto src = points.row(i);
        for (std::size_t j = 0; j < points.cols; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;
        for (auto& v : means.row(c)) v /= static_cast<double>(sizes[c]);
    }
    return means;
}

}  // namespace mailproc::kernels
