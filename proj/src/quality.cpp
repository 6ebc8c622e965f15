#include "mailproc/quality.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "mailproc/errors.hpp"

namespace mailproc {

namespace {

// Gold labels aligned to pred.ids.
std::vector<int> aligned_gold(const FlatClustering& pred, const FlatClustering& gold) {
    if (pred.ids.size() != gold.ids.size())
        throw ContractViolation("quality: predicted and gold clusterings cover different ids");
    std::map<EmailId, int> g;
    for (std::size_t i = 0; i < gold.ids.size(); ++i) g[gold.ids[i]] = gold.labels[i];
    std::vector<int> out;
    out.reserve(pred.ids.size());
    for (auto id : pred.ids) {
        auto it = g.find(id);
        if (it == g.end()) throw ContractViolation("quality: id " + std::to_string(id) + " missing from gold");
        out.push_back(it->second);
    }
    return out;
}

struct PairCounts {
    double same_both = 0, same_pred = 0, same_gold = 0, total = 0;
};

// Contingency-table pair counts: O(n + k*g) instead of enumerating pairs.
PairCounts pair_counts(const FlatClustering& pred, const std::vector<int>& gold) {
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    std::map<std::pair<int, int>, double> cell;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        cell[{pred.labels[i], gold[i]}] += 1;
        rows[pred.labels[i]] += 1;
        cols[gold[i]] += 1;
    }
    PairCounts pc;
    for (auto& [_, v] : cell) pc.same_both += c2(v);
    for (auto& [_, v] : rows) pc.same_pred += c2(v);
    for (auto& [_, v] : cols) pc.same_gold += c2(v);
    pc.total = c2(static_cast<double>(gold.size()));
    return pc;
}

}  // namespace

double purity(const FlatClustering& pred, const FlatClustering& gold) {
    auto g = aligned_gold(pred, gold);
    if (g.empty()) return 1.0;
    std::map<int, std::map<int, int>> overlap;
    for (std::size_t i = 0; i < g.size(); ++i) ++overlap[pred.labels[i]][g[i]];
    double hit = 0;
    for (auto& [_, row] : overlap) {
        int best = 0;
        for (auto& [__, n] : row) best = std::max(best, n);
        hit += best;
    }
    return hit / static_cast<double>(g.size());
}

double rand_index(const FlatClustering& pred, const FlatClustering& gold) {
    auto pc = pair_counts(pred, aligned_gold(pred, gold));
    if (pc.total == 0) return 1.0;
    double agree_diff = pc.total - pc.same_pred - pc.same_gold + pc.same_both;
    return (pc.same_both + agree_diff) / pc.total;
}

double pairwise_f_measure(const FlatClustering& pred, const FlatClustering& gold) {
    auto pc = pair_counts(pred, aligned_gold(pred, gold));
    double precision = pc.same_pred == 0 ? 1.0 : pc.same_both / pc.same_pred;
    double recall = pc.same_gold == 0 ? 1.0 : pc.same_both / pc.same_gold;
    if (precision + recall == 0) return 0.0;
    return 2 * precision * recall / (precision + recall);
}

double silhouette(const FlatClustering& pred, const DistanceMatrix& d) {
    const std::size_t n = pred.ids.size();
    if (n == 0 || pred.k < 2) return 0.0;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = d.index_of(pred.ids[i]);
    std::vector<std::size_t> size(static_cast<std::size_t>(pred.k), 0);
    for (int l : pred.labels) ++size[static_cast<std::size_t>(l)];

    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto own = static_cast<std::size_t>(pred.labels[i]);
        if (size[own] < 2) continue;
        std::vector<double> acc(size.size(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) acc[static_cast<std::size_t>(pred.labels[j])] += d(idx[i], idx[j]);
        double a = acc[own] / static_cast<double>(size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < size.size(); ++c)
            if (c != own && size[c] > 0) b = std::min(b, acc[c] / static_cast<double>(size[c]));
        double m = std::max(a, b);
        sum += m > 0 ? (b - a) / m : 0.0;
    }
    return sum / static_cast<double>(n);
}

QualityReport quality(const FlatClustering& pred, const std::optional<FlatClustering>& gold,
                      const DistanceMatrix* distances) {
    QualityReport r;
    if (gold) {
        r.purity = purity(pred, *gold);
        r.f_measure = pairwise_f_measure(pred, *gold);
        r.rand_index = rand_index(pred, *gold);
    }
    if (distances) r.silhouette = silhouette(pred, *distances);
    return r;
}

EmailId medoid(const std::vector<EmailId>& cluster, const DistanceMatrix& d) {
    if (cluster.empty()) throw ContractViolation("medoid: empty cluster");
    std::vector<std::size_t> idx;
    for (auto id : cluster) idx.push_back(d.index_of(id));
    EmailId best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < cluster.size(); ++j) s += d(idx[i], idx[j]);
        if (s < best_sum || (s == best_sum && cluster[i] < best)) {
            best_sum = s;
            best = cluster[i];
        }
    }
    return best;
}

}  // namespace mailproc
