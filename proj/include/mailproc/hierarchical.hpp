#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mailproc/distance.hpp"

namespace mailproc {

enum class Linkage { single, complete, average };
std::string_view to_string(Linkage l);
Linkage linkage_from_string(std::string_view s);

// Node numbering follows the usual convention: leaves are 0..n-1 in the order
// of `leaves`, the i-th merge creates node n+i.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
    bool operator==(const Merge&) const = default;
};

struct Dendrogram {
    std::vector<EmailId> leaves;
    std::vector<Merge> merges;
    Linkage linkage = Linkage::complete;
    bool operator==(const Dendrogram&) const = default;
};

/// Bottom-up clustering over a precomputed distance matrix. At each step the
/// two clusters at minimal linkage distance merge; among equal distances the
/// pair with the lexicographically smallest (min-id, min-id) wins, where a
/// cluster's id is its smallest member email id.
Dendrogram agglomerative(const DistanceMatrix& pairwise, Linkage linkage);

// Partition of a set of email ids. Cluster labels are dense in [0, k) and
// numbered in order of each cluster's smallest member id.
struct FlatClustering {
    std::vector<EmailId> ids;
    std::vector<int> labels;
    int k = 0;

    static FlatClustering from_groups(const std::vector<std::vector<EmailId>>& groups);
    std::vector<std::vector<EmailId>> groups() const;  // each sorted, ordered by label
    int label_of(EmailId id) const;
    // Same partition, irrespective of label numbering.
    bool same_partition(const FlatClustering& other) const;
};

struct CutK {
    int k;
    bool operator==(const CutK&) const = default;
};
struct CutHeight {
    double height;
    bool operator==(const CutHeight&) const = default;
};
using CutTarget = std::variant<CutK, CutHeight>;

/// cut at k undoes the last k-1 merges; cut at h keeps merges of height <= h.
FlatClustering cut(const Dendrogram& d, const CutTarget& target);

}  // namespace mailproc
