#pragma once

#include <vector>

#include "mailproc/distance.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP path and a plain
// serial path; the serial path is the reference the tests compare against and
// the baseline of the benchmark target. Both produce bit-identical results.

namespace mailproc::kernels {

enum class Execution { serial, parallel };

DistanceMatrix pairwise_email_distances(const std::vector<EmailFeatures>& features, const DistanceSpec& spec,
                                        Execution exec = Execution::parallel);

DistanceMatrix pairwise_euclidean(const DenseMatrix& points, const std::vector<EmailId>& ids,
                                  Execution exec = Execution::parallel);

struct Assignment {
    std::vector<int> labels;
    std::vector<double> squared_distance;
};

// Nearest centroid by squared Euclidean distance; ties go to the lower index.
Assignment assign_nearest(const DenseMatrix& points, const DenseMatrix& centroids,
                          Execution exec = Execution::parallel);

// Arithmetic mean of the points of each label; rows of empty clusters stay zero.
DenseMatrix cluster_means(const DenseMatrix& points, const std::vector<int>& labels, std::size_t k,
                          std::vector<std::size_t>& sizes);

}  // namespace mailproc::kernels
