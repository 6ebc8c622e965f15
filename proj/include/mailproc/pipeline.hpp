#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mailproc/distance.hpp"
#include "mailproc/hierarchical.hpp"
#include "mailproc/kmeans.hpp"
#include "mailproc/quality.hpp"
#include "mailproc/synonyms.hpp"
#include "mailproc/textprep.hpp"

namespace mailproc {

// The three phases: topics (which process an email belongs to), instances
// (which execution of that process), activities (which task inside it).

struct TopicCluster {
    int cluster_id = 0;
    std::vector<EmailId> email_ids;  // sorted
    std::optional<std::string> label;
    bool operator==(const TopicCluster&) const = default;
};

struct ProcessInstance {
    int instance_id = 0;
    int topic_cluster_id = 0;
    std::vector<EmailId> email_ids;  // ordered by (timestamp, id)
    bool operator==(const ProcessInstance&) const = default;
};

struct InstanceStats {
    double average_size = 0.0;
    std::vector<int> sizes;
    int k = 2;  // round-half-to-even of the average, clamped to [2, total emails]
    bool operator==(const InstanceStats&) const = default;
};

struct ActivityCluster {
    int activity_id = 0;
    int topic_cluster_id = 0;
    std::vector<EmailId> email_ids;  // sorted
    EmailId medoid_id = 0;
    std::vector<double> centroid;
    bool operator==(const ActivityCluster&) const = default;
};

// Process-instance distance variants compared by the instance phase.
enum class InstanceVariant { body, body_subject, body_subject_time };
std::string_view to_string(InstanceVariant v);
InstanceVariant instance_variant_from_string(std::string_view s);
// Restricts `base` to the attributes of the variant.
DistanceSpec instance_spec(InstanceVariant v, const DistanceSpec& base);

// nullopt target = choose k in [2, min(max_auto_k, n-1)] by best silhouette.
struct CutRule {
    std::optional<CutTarget> target;
    int max_auto_k = 10;
};

// Corpus projected through a fitted text model. Not persisted; rebuilt from
// the corpus and model whenever a run is loaded.
struct Workspace {
    Corpus corpus;
    TextModel model;
    TermMatrix subject;
    TermMatrix body;
    std::vector<EmailFeatures> features;  // corpus order

    static Workspace build(const Corpus& corpus, const TextModel& model);
    std::vector<EmailFeatures> features_of(const std::vector<EmailId>& ids) const;
};

struct TopicPhase {
    std::vector<TopicCluster> clusters;
    Dendrogram dendrogram;
    int k = 0;
    std::optional<double> silhouette;
};

/// Complete-linkage (by default) clustering of the whole corpus on
/// subject+body distance. Throws ConfigError when spec carries a time weight.
TopicPhase cluster_topics(const Workspace& ws, const DistanceSpec& spec, const CutRule& cut_rule,
                          Linkage linkage = Linkage::complete);

struct InstancePhase {
    std::vector<ProcessInstance> instances;
    Dendrogram dendrogram;
    int k = 0;
    std::optional<double> silhouette;
    InstanceVariant variant = InstanceVariant::body_subject_time;
};

/// Sub-clusters one topic cluster into process instances numbered from
/// `first_instance_id` in order of their earliest email.
InstancePhase discover_instances(const Workspace& ws, const TopicCluster& tc, const DistanceSpec& spec,
                                 const CutRule& cut_rule, int first_instance_id,
                                 Linkage linkage = Linkage::complete);

InstanceStats estimate_k(const std::vector<ProcessInstance>& instances);

/// Instance whose size is closest to round(N); ties -> earliest first email.
const ProcessInstance& select_seed_instance(const std::vector<ProcessInstance>& instances,
                                            const InstanceStats& stats, std::optional<int> override_id,
                                            const Corpus& corpus);

// Maps an email's subject/body rows into the activity vector space:
// synonym-folded, re-normalized, scaled by sqrt(weight) and concatenated so
// squared Euclidean distance is w_s*|ds|^2 + w_b*|db|^2.
class ActivityProjector {
public:
    ActivityProjector(const TextModel& model, const SynonymTable& synonyms, const DistanceSpec& spec);

    std::size_t dimension() const { return subject_keys_.size() + body_keys_.size(); }
    std::vector<double> project(const SparseRow& subject, const SparseRow& body) const;
    DenseMatrix project_all(const Workspace& ws, const std::vector<EmailId>& ids) const;

private:
    std::vector<std::uint32_t> subject_map_, body_map_;
    std::vector<std::string> subject_keys_, body_keys_;
    double subject_scale_ = 0.0, body_scale_ = 0.0;
};

struct ActivityOptions {
    std::optional<int> k;                    // user-picked k
    std::optional<std::pair<int, int>> k_range;  // inclusive sweep; default round(N)-2 .. round(N)+2
    std::optional<int> seed_instance;
    int max_iterations = 100;
    double convergence_epsilon = 1e-6;
};

struct KSweepEntry {
    int k = 0;
    QualityReport quality;
    std::vector<std::vector<EmailId>> clusters;
    int iterations = 0;
};

struct ActivityPhase {
    std::vector<ActivityCluster> clusters;
    std::vector<KSweepEntry> sweep;
    int chosen_k = 0;
    int seed_instance_id = 0;
    InstanceStats stats;
};

/// Initial centroids for k clusters: the seed's emails, thinned or extended by
/// greedy farthest-point selection when k differs from the seed size.
std::vector<EmailId> seed_centroid_ids(const std::vector<EmailId>& seed, const std::vector<EmailId>& topic_ids,
                                       const DistanceMatrix& d, int k);

/// k-means over one topic cluster, seeded from `seed`, swept over k. Activity
/// ids are numbered from `first_activity_id`.
ActivityPhase cluster_activities(const Workspace& ws, const TopicCluster& tc,
                                 const std::vector<ProcessInstance>& instances, const ProcessInstance& seed,
                                 const ActivityProjector& projector, const ActivityOptions& options,
                                 int first_activity_id, const std::optional<FlatClustering>& gold = std::nullopt);

}  // namespace mailproc
