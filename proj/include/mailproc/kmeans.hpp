#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mailproc/distance.hpp"
#include "mailproc/kernels.hpp"

namespace mailproc {

struct KMeansConfig {
    int k = 1;
    DenseMatrix initial_centroids;  // k rows
    int max_iterations = 100;
    double convergence_epsilon = 1e-6;

    void validate(std::size_t points, std::size_t dims) const;
};

// Optional replacement for the squared Euclidean assignment distance.
using VectorDistance = std::function<double(std::span<const double>, std::span<const double>)>;

struct KMeansResult {
    std::vector<int> labels;  // centroid index per point
    DenseMatrix centroids;
    int iterations = 0;
    bool converged = false;
    // Sum of squared distances to the assigned centroid after each assignment step.
    std::vector<double> objective;
};

/// Lloyd iterations from the given centroids. Stops when no assignment
/// changes, the largest centroid shift drops below epsilon, or after
/// max_iterations. An emptied cluster is reseeded with the point farthest from
/// its current centroid.
KMeansResult kmeans(const DenseMatrix& points, const KMeansConfig& cfg, const VectorDistance& dist = {},
                    kernels::Execution exec = kernels::Execution::parallel);

}  // namespace mailproc
