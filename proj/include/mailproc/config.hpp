#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include "mailproc/distance.hpp"
#include "mailproc/hierarchical.hpp"
#include "mailproc/pipeline.hpp"
#include "mailproc/textprep.hpp"

namespace mailproc {

// Everything tunable about a run. Stored as JSON; every key is optional and
// falls back to the defaults below, unknown keys are rejected.
struct PipelineConfig {
    // Cleansing flags. The word list itself comes from `stopwords_file`
    // (default: the bundled English list) plus `extra_stopwords`.
    bool remove_numbers = true;
    bool remove_punctuation = true;
    bool lowercase = true;
    int min_token_length = 2;
    bool stemming = false;
    std::optional<std::string> stopwords_file;
    std::vector<std::string> extra_stopwords;

    BoostConfig boost;

    DistanceSpec topic_distance = DistanceSpec::topic_default();
    DistanceSpec instance_distance = DistanceSpec::instance_default();
    DistanceSpec activity_distance = DistanceSpec::activity_default();

    Linkage topic_linkage = Linkage::complete;
    Linkage instance_linkage = Linkage::complete;
    InstanceVariant instance_variant = InstanceVariant::body_subject_time;

    std::optional<CutTarget> topic_cut;
    std::optional<CutTarget> instance_cut;
    int max_auto_k = 10;

    std::optional<int> activity_k;
    std::optional<std::pair<int, int>> k_sweep;
    std::optional<int> seed_instance;
    int max_iterations = 100;
    double convergence_epsilon = 1e-6;

    std::optional<std::string> synonyms_file;

    void validate() const;

    CleansingConfig cleansing() const;  // reads the stopword file
    CutRule topic_rule() const { return {topic_cut, max_auto_k}; }
    CutRule instance_rule() const { return {instance_cut, max_auto_k}; }
    ActivityOptions activity_options() const;
};

bool operator==(const PipelineConfig& a, const PipelineConfig& b);

/// Throws ConfigError naming the offending key (dotted path) on unknown keys,
/// wrong types or out-of-range values.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
// Full form with every key, pretty-printed, keys sorted.
std::string dump_config(const PipelineConfig& cfg);

}  // namespace mailproc
