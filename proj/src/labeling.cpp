#include "mailproc/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "mailproc/csv.hpp"
#include "mailproc/errors.hpp"
#include "mailproc/run.hpp"

namespace mailproc {

std::string_view to_string(LabelSource s) { return s == LabelSource::user ? "user" : "file"; }

LabelSource label_source_from_string(std::string_view s) {
    if (s == "user") return LabelSource::user;
    if (s == "file") return LabelSource::file;
    throw Error("unknown label source '" + std::string(s) + "'");
}

std::optional<std::string> LabelStore::label_of(int activity_id) const {
    auto it = entries.find(activity_id);
    if (it == entries.end()) return std::nullopt;
    return it->second.label;
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<MedoidProposal> propose_medoids(const Run& run) {
    if (run.activities.empty()) throw PhaseError("no activity clusters; run the activities phase first");
    std::vector<MedoidProposal> out;
    for (const auto& [topic, phase] : run.activities)
        for (const auto& a : phase.clusters)
            out.push_back({a.activity_id, topic, a.email_ids, run.corpus.by_id(a.medoid_id),
                           run.labels.label_of(a.activity_id)});
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.activity_id < y.activity_id; });
    return out;
}

void assign_label(Run& run, int activity_id, const std::string& label, LabelSource source) {
    const auto& cluster = run.activity(activity_id);
    auto clean = trim(label);
    if (clean.empty()) throw InvalidLabel("label must not be empty");

    auto& store = run.labels;
    if (auto it = store.entries.find(activity_id);
        it != store.entries.end() && it->second.label == clean && it->second.labeled_by == source)
        return;
    AuditEntry a;
    a.sequence = store.audit.size() + 1;
    a.target = "activity";
    a.id = activity_id;
    a.previous = store.label_of(activity_id);
    a.label = clean;
    a.source = source;
    store.audit.push_back(std::move(a));

    store.entries[activity_id] = {clean, source, cluster.topic_cluster_id, cluster.centroid, cluster.medoid_id};
}

void assign_topic_label(Run& run, int topic_cluster_id, const std::string& label) {
    run.topic(topic_cluster_id);
    auto clean = trim(label);
    if (clean.empty()) throw InvalidLabel("label must not be empty");
    auto& store = run.labels;
    if (auto it = store.topic_labels.find(topic_cluster_id); it != store.topic_labels.end() && it->second == clean)
        return;
    AuditEntry a;
    a.sequence = store.audit.size() + 1;
    a.target = "topic";
    a.id = topic_cluster_id;
    if (auto it = store.topic_labels.find(topic_cluster_id); it != store.topic_labels.end()) a.previous = it->second;
    a.label = clean;
    store.audit.push_back(std::move(a));
    store.topic_labels[topic_cluster_id] = clean;
}

std::vector<std::pair<int, std::string>> read_label_file(std::istream& in) {
    auto rows = csv::read_all(in);
    std::vector<std::pair<int, std::string>> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 2) throw RowError("row " + std::to_string(r + 1) + ": expected activity_id,label", r + 1);
        int id = 0;
        try {
            std::size_t used = 0;
            id = std::stoi(row[0], &used);
            if (used != row[0].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            if (r == 0) continue;  // header
            throw RowError("row " + std::to_string(r + 1) + ": bad activity id '" + row[0] + "'", r + 1);
        }
        out.emplace_back(id, row[1]);
    }
    return out;
}

std::vector<std::pair<int, std::string>> read_label_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open label file " + path.string());
    return read_label_file(in);
}

void apply_label_file(Run& run, const std::vector<std::pair<int, std::string>>& rows) {
    // Validate everything first so a bad row leaves the store untouched.
    for (const auto& [id, label] : rows) {
        run.activity(id);
        if (trim(label).empty()) throw InvalidLabel("label for activity " + std::to_string(id) + " is empty");
    }
    for (const auto& [id, label] : rows) assign_label(run, id, label, LabelSource::file);
}

std::vector<int> unlabeled_activities(const Run& run, std::optional<int> topic) {
    std::vector<int> out;
    for (const auto& [t, phase] : run.activities) {
        if (topic && t != *topic) continue;
        for (const auto& a : phase.clusters)
            if (!run.labels.entries.count(a.activity_id)) out.push_back(a.activity_id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double classification_confidence(double nearest, double second) {
    if (nearest + second == 0.0) return 1.0;
    return 1.0 - nearest / (nearest + second);
}

ClassificationResult classify(const Run& run, const Email& email, std::optional<int> topic) {
    std::vector<std::pair<int, const LabelEntry*>> candidates;
    for (const auto& [id, entry] : run.labels.entries)
        if (!topic || entry.topic_cluster_id == *topic) candidates.emplace_back(id, &entry);
    if (candidates.empty()) throw PhaseError("no labeled activity clusters to classify against");

    ClassificationResult r;
    r.email_id = email.id;
    const auto subject = transform(run.model, {email}, Field::subject);
    const auto body = transform(run.model, {email}, Field::body);
    if (subject.rows[0].empty() && body.rows[0].empty()) return r;

    const auto projector = make_projector(run);
    const auto v = projector.project(subject.rows[0], body.rows[0]);

    double d1 = std::numeric_limits<double>::infinity(), d2 = std::numeric_limits<double>::infinity();
    const std::pair<int, const LabelEntry*>* best = nullptr;
    for (const auto& c : candidates) {
        if (c.second->centroid.size() != v.size())
            throw ContractViolation("stored centroid of activity " + std::to_string(c.first) +
                                    " does not match the activity vector space");
        double d = std::sqrt(squared_euclidean(v, c.second->centroid));
        if (d < d1) {
            d2 = d1;
            d1 = d;
            best = &c;
        } else if (d < d2) {
            d2 = d;
        }
    }
    r.classifiable = true;
    r.predicted_activity_id = best->first;
    r.predicted_label = best->second->label;
    r.distance_to_centroid = d1;
    r.confidence = candidates.size() == 1 ? 1.0 : classification_confidence(d1, d2);
    return r;
}

}  // namespace mailproc
