#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mailproc/config.hpp"
#include "mailproc/labeling.hpp"
#include "mailproc/pipeline.hpp"

namespace mailproc {

// How the current topic clusters came about.
enum class TopicSource { cut, assigned };
std::string_view to_string(TopicSource s);

// Complete state of one analysis: inputs, every phase result and the labels.
// Phase maps are keyed by topic cluster id.
struct Run {
    PipelineConfig config;
    Corpus corpus;
    TextModel model;
    SynonymTable synonyms;

    std::optional<TopicPhase> topics;
    TopicSource topic_source = TopicSource::cut;
    std::map<int, InstancePhase> instances;
    std::map<int, ActivityPhase> activities;
    LabelStore labels;

    int next_instance_id = 1;
    int next_activity_id = 1;

    std::string corpus_digest() const;
    const TopicCluster& topic(int id) const;
    const ActivityCluster& activity(int id) const;
    // Id of the activity cluster containing `email`, if any.
    std::optional<int> activity_of(EmailId email) const;
};

/// Fits the text model and loads the stopword and synonym files named by the
/// config (or the bundled defaults). Validates the corpus and the config.
Run create_run(Corpus corpus, PipelineConfig config);

Workspace make_workspace(const Run& run);
ActivityProjector make_projector(const Run& run);

/// Clusters the whole corpus into topics and drops every downstream result.
void run_topics(Run& run, const Workspace& ws, const CutRule& rule, Linkage linkage);
void run_topics(Run& run, const Workspace& ws);

/// Replaces the topic clusters by a user-supplied partition of the corpus.
void assign_topics(Run& run, const std::vector<std::vector<EmailId>>& groups);
// `email_id,topic` rows; group names are arbitrary strings.
std::vector<std::vector<EmailId>> read_partition_file(const std::filesystem::path& path);

/// Re-cuts the stored topic dendrogram. Downstream results are dropped.
void recut_topics(Run& run, const Workspace& ws, const CutTarget& target);

/// Instance discovery for one topic (or all when nullopt). Drops the
/// activities and labels of the affected topics.
void run_instances(Run& run, const Workspace& ws, std::optional<int> topic, const CutRule& rule,
                   InstanceVariant variant, Linkage linkage);
void run_instances(Run& run, const Workspace& ws, std::optional<int> topic = std::nullopt);
void recut_instances(Run& run, const Workspace& ws, int topic, const CutTarget& target);

/// Activity clustering for one topic (or all when nullopt). A seed override
/// applies to the topic that owns that instance.
void run_activities(Run& run, const Workspace& ws, std::optional<int> topic, const ActivityOptions& options);
void run_activities(Run& run, const Workspace& ws, std::optional<int> topic = std::nullopt);

// Current partitions, for quality reports.
FlatClustering topic_partition(const Run& run);
FlatClustering instance_partition(const Run& run, int topic);
FlatClustering activity_partition(const Run& run, int topic);

/// Gold partition restricted to the ids of `pred`. Throws ContractViolation
/// when a predicted id is absent from the gold file.
FlatClustering restrict_gold(const std::vector<std::vector<EmailId>>& gold, const FlatClustering& pred);

}  // namespace mailproc
