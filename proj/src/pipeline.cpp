#include "mailproc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mailproc/errors.hpp"
#include "mailproc/kernels.hpp"

namespace mailproc {

std::string_view to_string(InstanceVariant v) {
    switch (v) {
        case InstanceVariant::body: return "body";
        case InstanceVariant::body_subject: return "body_subject";
        case InstanceVariant::body_subject_time: return "body_subject_time";
    }
    return "body_subject_time";
}

InstanceVariant instance_variant_from_string(std::string_view s) {
    if (s == "body" || s == "i") return InstanceVariant::body;
    if (s == "body_subject" || s == "ii") return InstanceVariant::body_subject;
    if (s == "body_subject_time" || s == "iii") return InstanceVariant::body_subject_time;
    throw ConfigError("unknown instance variant '" + std::string(s) + "'", "instance_variant");
}

DistanceSpec instance_spec(InstanceVariant v, const DistanceSpec& base) {
    DistanceSpec s = base;
    switch (v) {
        case InstanceVariant::body:
            s.w_subject = 0;
            s.w_time = 0;
            s.w_participants = 0;
            if (s.w_body <= 0) s.w_body = 1;
            break;
        case InstanceVariant::body_subject:
            s.w_time = 0;
            break;
        case InstanceVariant::body_subject_time:
            break;
    }
    return s;
}

Workspace Workspace::build(const Corpus& corpus, const TextModel& model) {
    if (corpus.emails.empty()) throw CorpusError("empty corpus");
    Workspace ws;
    ws.corpus = corpus;
    ws.model = model;
    ws.subject = transform(model, corpus.emails, Field::subject);
    ws.body = transform(model, corpus.emails, Field::body);
    ws.features = make_features(corpus.emails, ws.subject, ws.body);
    return ws;
}

std::vector<EmailFeatures> Workspace::features_of(const std::vector<EmailId>& ids) const {
    std::map<EmailId, const EmailFeatures*> index;
    for (const auto& f : features) index[f.id] = &f;
    std::vector<EmailFeatures> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        auto it = index.find(id);
        if (it == index.end()) throw NotFound("email " + std::to_string(id) + " not in workspace");
        out.push_back(*it->second);
    }
    return out;
}

namespace {

struct CutOutcome {
    FlatClustering flat;
    int k = 1;
    std::optional<double> silhouette;
};

CutOutcome apply_cut(const Dendrogram& d, const DistanceMatrix& m, const CutRule& rule) {
    const int n = static_cast<int>(d.leaves.size());
    CutOutcome out;
    if (rule.target) {
        out.flat = cut(d, *rule.target);
        out.k = out.flat.k;
        out.silhouette = silhouette(out.flat, m);
        return out;
    }
    const int hi = std::min(rule.max_auto_k, n - 1);
    if (hi < 2) {
        out.flat = cut(d, CutK{1});
        out.k = 1;
        return out;
    }
    double best = -2.0;
    for (int k = 2; k <= hi; ++k) {
        auto flat = cut(d, CutK{k});
        double s = silhouette(flat, m);
        if (s > best) {
            best = s;
            out.flat = std::move(flat);
            out.k = k;
        }
    }
    out.silhouette = best;
    return out;
}

std::vector<EmailId> sorted_ids(std::vector<EmailId> ids) {
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

TopicPhase cluster_topics(const Workspace& ws, const DistanceSpec& spec, const CutRule& cut_rule, Linkage linkage) {
    if (ws.corpus.emails.empty()) throw CorpusError("empty corpus");
    spec.validate("topic_distance");
    if (spec.w_time != 0.0)
        throw ConfigError("topic clustering uses subject and body only; w_time must be 0", "topic_distance.w_time");

    auto m = kernels::pairwise_email_distances(ws.features, spec);
    TopicPhase out;
    out.dendrogram = agglomerative(m, linkage);
    auto c = apply_cut(out.dendrogram, m, cut_rule);
    out.k = c.k;
    out.silhouette = c.silhouette;
    auto groups = c.flat.groups();
    for (std::size_t i = 0; i < groups.size(); ++i)
        out.clusters.push_back({static_cast<int>(i), groups[i], std::nullopt});
    return out;
}

InstancePhase discover_instances(const Workspace& ws, const TopicCluster& tc, const DistanceSpec& spec,
                                 const CutRule& cut_rule, int first_instance_id, Linkage linkage) {
    if (tc.email_ids.empty()) throw ContractViolation("discover_instances: empty topic cluster");
    spec.validate("instance_distance");

    auto m = kernels::pairwise_email_distances(ws.features_of(tc.email_ids), spec);
    InstancePhase out;
    out.dendrogram = agglomerative(m, linkage);
    auto c = apply_cut(out.dendrogram, m, cut_rule);
    out.k = c.k;
    out.silhouette = c.silhouette;

    auto earlier = [&](EmailId a, EmailId b) {
        const auto& ea = ws.corpus.by_id(a);
        const auto& eb = ws.corpus.by_id(b);
        return std::tie(ea.timestamp, ea.id) < std::tie(eb.timestamp, eb.id);
    };
    auto groups = c.flat.groups();
    for (auto& g : groups) std::sort(g.begin(), g.end(), earlier);
    std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) { return earlier(a.front(), b.front()); });
    for (std::size_t i = 0; i < groups.size(); ++i)
        out.instances.push_back({first_instance_id + static_cast<int>(i), tc.cluster_id, groups[i]});
    return out;
}

namespace {

int round_half_even(double x) {
    double f = std::floor(x);
    double frac = x - f;
    if (frac > 0.5) return static_cast<int>(f) + 1;
    if (frac < 0.5) return static_cast<int>(f);
    return static_cast<int>(f) % 2 == 0 ? static_cast<int>(f) : static_cast<int>(f) + 1;
}

}  // namespace

InstanceStats estimate_k(const std::vector<ProcessInstance>& instances) {
    if (instances.empty()) throw ContractViolation("estimate_k: no instances");
    InstanceStats s;
    int total = 0;
    for (const auto& inst : instances) {
        s.sizes.push_back(static_cast<int>(inst.email_ids.size()));
        total += s.sizes.back();
    }
    std::sort(s.sizes.begin(), s.sizes.end());
    s.average_size = static_cast<double>(total) / static_cast<double>(instances.size());
    s.k = std::clamp(round_half_even(s.average_size), 2, std::max(2, total));
    return s;
}

const ProcessInstance& select_seed_instance(const std::vector<ProcessInstance>& instances,
                                            const InstanceStats& stats, std::optional<int> override_id,
                                            const Corpus& corpus) {
    if (instances.empty()) throw ContractViolation("select_seed_instance: no instances");
    if (override_id) {
        for (const auto& inst : instances)
            if (inst.instance_id == *override_id) return inst;
        throw NotFound("seed instance " + std::to_string(*override_id) + " not found");
    }
    const int target = round_half_even(stats.average_size);
    const ProcessInstance* best = nullptr;
    auto start = [&](const ProcessInstance& p) {
        const auto& e = corpus.by_id(p.email_ids.front());
        return std::make_pair(e.timestamp, e.id);
    };
    for (const auto& inst : instances) {
        if (!best) {
            best = &inst;
            continue;
        }
        int d = std::abs(static_cast<int>(inst.email_ids.size()) - target);
        int bd = std::abs(static_cast<int>(best->email_ids.size()) - target);
        if (d < bd || (d == bd && start(inst) < start(*best))) best = &inst;
    }
    return *best;
}

ActivityProjector::ActivityProjector(const TextModel& model, const SynonymTable& synonyms, const DistanceSpec& spec) {
    spec.validate("activity_distance");
    if (spec.w_time != 0.0)
        throw ConfigError("activity clustering excludes the timestamp; w_time must be 0", "activity_distance.w_time");
    if (spec.w_participants != 0.0)
        throw ConfigError("activity clustering works in term space; w_participants must be 0",
                          "activity_distance.w_participants");
    if (spec.w_subject + spec.w_body <= 0.0)
        throw ConfigError("activity clustering needs a subject or body weight", "activity_distance.w_body");

    const SynonymTable identity;
    const SynonymTable& table = spec.use_synonyms ? synonyms : identity;
    auto build = [&](const FieldModel& fm, std::vector<std::uint32_t>& map, std::vector<std::string>& keys) {
        std::set<std::string> unique;
        for (const auto& t : fm.vocabulary) unique.insert(table.key_of(t));
        keys.assign(unique.begin(), unique.end());
        map.resize(fm.vocabulary.size());
        for (std::size_t j = 0; j < fm.vocabulary.size(); ++j) {
            auto it = std::lower_bound(keys.begin(), keys.end(), table.key_of(fm.vocabulary[j]));
            map[j] = static_cast<std::uint32_t>(it - keys.begin());
        }
    };
    build(model.subject, subject_map_, subject_keys_);
    build(model.body, body_map_, body_keys_);
    const double total = spec.w_subject + spec.w_body;
    subject_scale_ = std::sqrt(spec.w_subject / total);
    body_scale_ = std::sqrt(spec.w_body / total);
}

std::vector<double> ActivityProjector::project(const SparseRow& subject, const SparseRow& body) const {
    std::vector<double> v(dimension(), 0.0);
    auto fill = [&](const SparseRow& row, const std::vector<std::uint32_t>& map, std::size_t offset,
                    std::size_t width, double scale) {
        for (const auto& e : row) v[offset + map.at(e.term)] += e.weight;
        double norm = 0;
        for (std::size_t j = offset; j < offset + width; ++j) norm += v[j] * v[j];
        norm = std::sqrt(norm);
        if (norm == 0) return;
        for (std::size_t j = offset; j < offset + width; ++j) v[j] = v[j] / norm * scale;
    };
    fill(subject, subject_map_, 0, subject_keys_.size(), subject_scale_);
    fill(body, body_map_, subject_keys_.size(), body_keys_.size(), body_scale_);
    return v;
}

DenseMatrix ActivityProjector::project_all(const Workspace& ws, const std::vector<EmailId>& ids) const {
    DenseMatrix out(ids.size(), dimension());
    auto feats = ws.features_of(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto v = project(feats[i].subject, feats[i].body);
        std::copy(v.begin(), v.end(), out.row(i).begin());
    }
    return out;
}

std::vector<EmailId> seed_centroid_ids(const std::vector<EmailId>& seed, const std::vector<EmailId>& topic_ids,
                                       const DistanceMatrix& d, int k) {
    if (k < 1) throw ContractViolation("seed_centroid_ids: k must be >= 1");
    if (seed.empty()) throw ContractViolation("seed_centroid_ids: empty seed instance");
    const auto want = static_cast<std::size_t>(k);
    if (want == seed.size()) return seed;

    auto spread = [&](EmailId cand, const std::vector<EmailId>& chosen) {
        double m = std::numeric_limits<double>::infinity();
        for (auto c : chosen) m = std::min(m, d.between(cand, c));
        return m;
    };
    auto pick_from = [&](const std::vector<EmailId>& pool, std::vector<EmailId>& chosen) {
        EmailId best = 0;
        double best_d = -1;
        for (auto cand : pool) {
            if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
            double s = spread(cand, chosen);
            if (s > best_d) {
                best_d = s;
                best = cand;
            }
        }
        if (best_d < 0) throw ContractViolation("seed_centroid_ids: not enough emails for k=" + std::to_string(k));
        chosen.push_back(best);
    };

    std::vector<EmailId> chosen;
    if (want < seed.size()) {
        chosen.push_back(seed.front());
        while (chosen.size() < want) pick_from(seed, chosen);
        std::vector<EmailId> ordered;
        for (auto id : seed)
            if (std::find(chosen.begin(), chosen.end(), id) != chosen.end()) ordered.push_back(id);
        return ordered;
    }
    chosen = seed;
    while (chosen.size() < want) pick_from(topic_ids, chosen);
    return chosen;
}

ActivityPhase cluster_activities(const Workspace& ws, const TopicCluster& tc,
                                 const std::vector<ProcessInstance>& instances, const ProcessInstance& seed,
                                 const ActivityProjector& projector, const ActivityOptions& options,
                                 int first_activity_id, const std::optional<FlatClustering>& gold) {
    const auto ids = sorted_ids(tc.email_ids);
    for (auto id : seed.email_ids)
        if (!std::binary_search(ids.begin(), ids.end(), id))
            throw ContractViolation("cluster_activities: seed email " + std::to_string(id) +
                                    " is not in topic cluster " + std::to_string(tc.cluster_id));

    ActivityPhase out;
    out.stats = estimate_k(instances);
    out.seed_instance_id = seed.instance_id;

    const DenseMatrix points = projector.project_all(ws, ids);
    const DistanceMatrix dist = kernels::pairwise_euclidean(points, ids);
    const int n = static_cast<int>(ids.size());

    std::optional<FlatClustering> gold_here;
    if (gold) {
        std::vector<std::vector<EmailId>> g;
        for (const auto& grp : gold->groups()) {
            std::vector<EmailId> kept;
            for (auto id : grp)
                if (std::binary_search(ids.begin(), ids.end(), id)) kept.push_back(id);
            if (!kept.empty()) g.push_back(kept);
        }
        gold_here = FlatClustering::from_groups(g);
    }

    std::vector<int> ks;
    if (n < 2) {
        ks.push_back(1);
    } else {
        auto [lo, hi] = options.k_range.value_or(std::make_pair(out.stats.k - 2, out.stats.k + 2));
        for (int k = std::max(2, lo); k <= std::min(n, hi); ++k) ks.push_back(k);
        if (options.k) {
            if (*options.k < 1 || *options.k > n)
                throw ContractViolation("cluster_activities: k=" + std::to_string(*options.k) + " outside [1, " +
                                        std::to_string(n) + "]");
            if (std::find(ks.begin(), ks.end(), *options.k) == ks.end()) ks.push_back(*options.k);
            std::sort(ks.begin(), ks.end());
        }
        if (ks.empty()) ks.push_back(std::clamp(out.stats.k, 1, n));
    }

    std::map<int, KMeansResult> runs;
    for (int k : ks) {
        KMeansConfig cfg;
        cfg.k = k;
        cfg.max_iterations = options.max_iterations;
        cfg.convergence_epsilon = options.convergence_epsilon;
        cfg.initial_centroids = DenseMatrix(static_cast<std::size_t>(k), points.cols);
        auto centroid_ids = seed_centroid_ids(seed.email_ids, ids, dist, k);
        for (std::size_t c = 0; c < centroid_ids.size(); ++c) {
            auto src = points.row(static_cast<std::size_t>(
                std::lower_bound(ids.begin(), ids.end(), centroid_ids[c]) - ids.begin()));
            std::copy(src.begin(), src.end(), cfg.initial_centroids.row(c).begin());
        }
        auto r = kmeans(points, cfg);

        std::vector<std::vector<EmailId>> groups(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < ids.size(); ++i) groups[static_cast<std::size_t>(r.labels[i])].push_back(ids[i]);
        std::erase_if(groups, [](const auto& g) { return g.empty(); });

        KSweepEntry e;
        e.k = k;
        e.clusters = groups;
        e.iterations = r.iterations;
        e.quality = quality(FlatClustering::from_groups(groups), gold_here, &dist);
        out.sweep.push_back(std::move(e));
        runs.emplace(k, std::move(r));
    }

    if (options.k) {
        out.chosen_k = *options.k;
    } else {
        const KSweepEntry* best = nullptr;
        for (const auto& e : out.sweep) {
            if (!best) {
                best = &e;
                continue;
            }
            double s = e.quality.silhouette.value_or(0), bs = best->quality.silhouette.value_or(0);
            int d = std::abs(e.k - out.stats.k), bd = std::abs(best->k - out.stats.k);
            if (s > bs || (s == bs && d < bd)) best = &e;
        }
        out.chosen_k = best->k;
    }

    const auto& chosen = runs.at(out.chosen_k);
    int next_id = first_activity_id;
    for (std::size_t c = 0; c < static_cast<std::size_t>(out.chosen_k); ++c) {
        ActivityCluster ac;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (chosen.labels[i] == static_cast<int>(c)) ac.email_ids.push_back(ids[i]);
        if (ac.email_ids.empty()) continue;
        ac.activity_id = next_id++;
        ac.topic_cluster_id = tc.cluster_id;
        ac.medoid_id = medoid(ac.email_ids, dist);
        auto row = chosen.centroids.row(c);
        ac.centroid.assign(row.begin(), row.end());
        out.clusters.push_back(std::move(ac));
    }
    return out;
}

}  // namespace mailproc
