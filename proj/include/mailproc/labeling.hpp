#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mailproc/ingest.hpp"

namespace mailproc {

struct Run;

enum class LabelSource { user, file };
std::string_view to_string(LabelSource s);
LabelSource label_source_from_string(std::string_view s);

struct LabelEntry {
    std::string label;
    LabelSource labeled_by = LabelSource::user;
    int topic_cluster_id = 0;
    std::vector<double> centroid;  // activity-space centroid at labeling time
    EmailId medoid_email_id = 0;
    bool operator==(const LabelEntry&) const = default;
};

// One line per label write. Sequence numbers instead of wall-clock times keep
// run files reproducible.
struct AuditEntry {
    std::uint64_t sequence = 0;
    std::string target;  // "activity" or "topic"
    int id = 0;
    std::optional<std::string> previous;
    std::string label;
    LabelSource source = LabelSource::user;
    bool operator==(const AuditEntry&) const = default;
};

struct LabelStore {
    std::map<int, LabelEntry> entries;  // by activity id
    std::map<int, std::string> topic_labels;
    std::vector<AuditEntry> audit;

    std::optional<std::string> label_of(int activity_id) const;
    bool operator==(const LabelStore&) const = default;
};

struct MedoidProposal {
    int activity_id = 0;
    int topic_cluster_id = 0;
    std::vector<EmailId> members;
    Email medoid;
    std::optional<std::string> current_label;
};

/// One proposal per activity cluster of the run, in activity id order.
/// Throws PhaseError when no activity clustering exists.
std::vector<MedoidProposal> propose_medoids(const Run& run);

/// Records `label` (trimmed) for an activity cluster; every email of the
/// cluster inherits it. Relabeling overwrites and appends to the audit log.
/// Throws InvalidLabel for blank labels and NotFound for unknown ids.
void assign_label(Run& run, int activity_id, const std::string& label, LabelSource source = LabelSource::user);
void assign_topic_label(Run& run, int topic_cluster_id, const std::string& label);

// Rows of `activity_id,label`, header optional.
std::vector<std::pair<int, std::string>> read_label_file(std::istream& in);
std::vector<std::pair<int, std::string>> read_label_file(const std::filesystem::path& path);
void apply_label_file(Run& run, const std::vector<std::pair<int, std::string>>& rows);

// Activity ids of `topic` (all topics when nullopt) that have no label yet.
std::vector<int> unlabeled_activities(const Run& run, std::optional<int> topic = std::nullopt);

struct ClassificationResult {
    EmailId email_id = 0;
    bool classifiable = false;
    int predicted_activity_id = 0;
    std::string predicted_label;
    double distance_to_centroid = 0.0;
    double confidence = 0.0;
};

// 1 - d1 / (d1 + d2); 1 when d1 = d2 = 0.
double classification_confidence(double nearest, double second);

/// Nearest labeled centroid in the activity vector space. The email is
/// vectorized with the run's text model; unknown terms are dropped. An email
/// that vectorizes to zero is reported as unclassifiable.
/// Throws PhaseError when the store has no labels.
ClassificationResult classify(const Run& run, const Email& email, std::optional<int> topic = std::nullopt);

}  // namespace mailproc
