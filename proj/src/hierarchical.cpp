#include "mailproc/hierarchical.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mailproc/errors.hpp"

namespace mailproc {

std::string_view to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "complete";
}

Linkage linkage_from_string(std::string_view s) {
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    throw ConfigError("unknown linkage '" + std::string(s) + "'", "linkage");
}

namespace {

// Working state of one run. Slots are leaf positions; a merged cluster lives
// in the slot of its smaller-key member and the other slot is retired.
class Agglomerator {
public:
    Agglomerator(const DistanceMatrix& d, Linkage linkage)
        : n_(d.size()), linkage_(linkage), link_(d.raw()), key_(d.ids()), size_(n_, 1), node_(n_),
          active_(n_, true), nn_(n_, kNone) {
        std::iota(node_.begin(), node_.end(), std::size_t{0});
        for (std::size_t a = 0; a < n_; ++a) refresh_nn(a);
    }

    std::vector<Merge> run() {
        std::vector<Merge> merges;
        merges.reserve(n_ ? n_ - 1 : 0);
        for (std::size_t step = 0; step + 1 < n_; ++step) {
            std::size_t best = kNone;
            for (std::size_t a = 0; a < n_; ++a)
                if (active_[a] && nn_[a] != kNone && (best == kNone || less(a, nn_[a], best, nn_[best]))) best = a;
            std::size_t a = best, b = nn_[best];
            if (key_[b] < key_[a]) std::swap(a, b);
            const double height = value(a, b);

            merges.push_back({node_[a], node_[b], height, size_[a] + size_[b]});
            absorb(a, b);
            node_[a] = n_ + step;
        }
        return merges;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    double& cell(std::size_t a, std::size_t b) { return link_[a * n_ + b]; }
    double cell(std::size_t a, std::size_t b) const { return link_[a * n_ + b]; }

    double value(std::size_t a, std::size_t b) const {
        if (linkage_ == Linkage::average)
            return cell(a, b) / (static_cast<double>(size_[a]) * static_cast<double>(size_[b]));
        return cell(a, b);
    }

    // Total order on candidate pairs: distance, then (smaller key, larger key).
    bool less(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        double v1 = value(a, b), v2 = value(c, d);
        if (v1 != v2) return v1 < v2;
        auto p1 = std::minmax(key_[a], key_[b]);
        auto p2 = std::minmax(key_[c], key_[d]);
        return p1 < p2;
    }

    void refresh_nn(std::size_t a) {
        nn_[a] = kNone;
        for (std::size_t b = 0; b < n_; ++b)
            if (b != a && active_[b] && (nn_[a] == kNone || less(a, b, a, nn_[a]))) nn_[a] = b;
    }

    // Merges slot b into slot a (Lance-Williams style update). Average linkage
    // keeps sums of member distances so the stored value is exact.
    void absorb(std::size_t a, std::size_t b) {
        active_[b] = false;
        for (std::size_t c = 0; c < n_; ++c) {
            if (!active_[c] || c == a) continue;
            double v;
            switch (linkage_) {
                case Linkage::single: v = std::min(cell(a, c), cell(b, c)); break;
                case Linkage::complete: v = std::max(cell(a, c), cell(b, c)); break;
                default: v = cell(a, c) + cell(b, c); break;
            }
            cell(a, c) = v;
            cell(c, a) = v;
        }
        size_[a] += size_[b];
        key_[a] = std::min(key_[a], key_[b]);

        refresh_nn(a);
        for (std::size_t c = 0; c < n_; ++c) {
            if (!active_[c] || c == a) continue;
            if (nn_[c] == a || nn_[c] == b) refresh_nn(c);
            else if (less(c, a, c, nn_[c])) nn_[c] = a;
        }
    }

    std::size_t n_;
    Linkage linkage_;
    std::vector<double> link_;
    std::vector<EmailId> key_;
    std::vector<std::size_t> size_;
    std::vector<std::size_t> node_;
    std::vector<bool> active_;
    std::vector<std::size_t> nn_;
};

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Relabels so that clusters are numbered by their smallest member id.
FlatClustering canonical(std::vector<EmailId> ids, const std::vector<std::size_t>& raw) {
    std::map<std::size_t, EmailId> smallest;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = smallest.find(raw[i]);
        if (it == smallest.end() || ids[i] < it->second) smallest[raw[i]] = ids[i];
    }
    std::vector<std::pair<EmailId, std::size_t>> order;
    for (auto [r, id] : smallest) order.emplace_back(id, r);
    std::sort(order.begin(), order.end());
    std::map<std::size_t, int> dense;
    for (std::size_t i = 0; i < order.size(); ++i) dense[order[i].second] = static_cast<int>(i);

    FlatClustering out;
    out.k = static_cast<int>(order.size());
    out.labels.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.labels.push_back(dense[raw[i]]);
    out.ids = std::move(ids);
    return out;
}

}  // namespace

Dendrogram agglomerative(const DistanceMatrix& pairwise, Linkage linkage) {
    if (pairwise.size() == 0) throw ContractViolation("agglomerative: no items to cluster");
    for (std::size_t i = 0; i < pairwise.size(); ++i) {
        if (pairwise(i, i) != 0.0) throw ContractViolation("agglomerative: non-zero diagonal");
        for (std::size_t j = 0; j < i; ++j)
            if (pairwise(i, j) != pairwise(j, i) || pairwise(i, j) < 0.0)
                throw ContractViolation("agglomerative: matrix must be symmetric and non-negative");
    }
    Dendrogram d;
    d.leaves = pairwise.ids();
    d.linkage = linkage;
    d.merges = Agglomerator(pairwise, linkage).run();
    return d;
}

FlatClustering FlatClustering::from_groups(const std::vector<std::vector<EmailId>>& groups) {
    std::vector<EmailId> ids;
    std::vector<std::size_t> raw;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (auto id : groups[g]) {
            ids.push_back(id);
            raw.push_back(g);
        }
    return canonical(std::move(ids), raw);
}

std::vector<std::vector<EmailId>> FlatClustering::groups() const {
    std::vector<std::vector<EmailId>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ids.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(ids[i]);
    for (auto& g : out) std::sort(g.begin(), g.end());
    return out;
}

int FlatClustering::label_of(EmailId id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return labels[i];
    throw NotFound("email " + std::to_string(id) + " not in clustering");
}

bool FlatClustering::same_partition(const FlatClustering& other) const {
    auto a = groups();
    auto b = other.groups();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

FlatClustering cut(const Dendrogram& d, const CutTarget& target) {
    const std::size_t n = d.leaves.size();
    std::size_t apply = 0;
    if (const auto* ck = std::get_if<CutK>(&target)) {
        if (ck->k < 1 || static_cast<std::size_t>(ck->k) > n)
            throw ContractViolation("cut: k=" + std::to_string(ck->k) + " outside [1, " + std::to_string(n) + "]");
        apply = n - static_cast<std::size_t>(ck->k);
    } else {
        double h = std::get<CutHeight>(target).height;
        if (!(h >= 0.0)) throw ContractViolation("cut: height must be >= 0");
        while (apply < d.merges.size() && d.merges[apply].height <= h) ++apply;
    }

    // Node -> representative leaf, then union leaves of each applied merge.
    std::vector<std::size_t> rep(n + d.merges.size());
    std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), std::size_t{0});
    DisjointSets sets(n);
    for (std::size_t i = 0; i < d.merges.size(); ++i) {
        rep[n + i] = rep[d.merges[i].left];
        if (i < apply) sets.unite(rep[d.merges[i].left], rep[d.merges[i].right]);
    }
    std::vector<std::size_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = sets.find(i);
    return canonical(d.leaves, raw);
}

}  // namespace mailproc
