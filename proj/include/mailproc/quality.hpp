#pragma once

#include <optional>
#include <vector>

#include "mailproc/distance.hpp"
#include "mailproc/hierarchical.hpp"

namespace mailproc {

struct QualityReport {
    // External metrics; only meaningful when a gold partition was given.
    std::optional<double> purity;
    std::optional<double> f_measure;
    std::optional<double> rand_index;
    // Internal metric; needs a distance matrix.
    std::optional<double> silhouette;
};

// (1/N) sum over predicted clusters of the largest overlap with a gold cluster.
double purity(const FlatClustering& pred, const FlatClustering& gold);
// Fraction of item pairs on which the two partitions agree.
double rand_index(const FlatClustering& pred, const FlatClustering& gold);
// Pairwise F1 of "same cluster" decisions. An empty positive set counts as perfect precision/recall.
double pairwise_f_measure(const FlatClustering& pred, const FlatClustering& gold);
// Mean silhouette; singletons score 0, a single cluster scores 0.
double silhouette(const FlatClustering& pred, const DistanceMatrix& d);

/// Throws ContractViolation when pred and gold cover different id sets.
QualityReport quality(const FlatClustering& pred, const std::optional<FlatClustering>& gold,
                      const DistanceMatrix* distances = nullptr);

/// Member with the smallest summed distance to the others; ties -> smallest id.
EmailId medoid(const std::vector<EmailId>& cluster, const DistanceMatrix& d);

}  // namespace mailproc
