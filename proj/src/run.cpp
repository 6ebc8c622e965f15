#include "mailproc/run.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mailproc/csv.hpp"
#include "mailproc/errors.hpp"

namespace mailproc {

std::string_view to_string(TopicSource s) { return s == TopicSource::cut ? "cut" : "assigned"; }

std::string Run::corpus_digest() const {
    std::ostringstream ss;
    write_csv(corpus, ss);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : ss.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const TopicCluster& Run::topic(int id) const {
    if (!topics) throw PhaseError("topics have not been computed");
    for (const auto& t : topics->clusters)
        if (t.cluster_id == id) return t;
    throw NotFound("topic cluster " + std::to_string(id) + " not found");
}

const ActivityCluster& Run::activity(int id) const {
    for (const auto& [_, phase] : activities)
        for (const auto& a : phase.clusters)
            if (a.activity_id == id) return a;
    throw NotFound("activity cluster " + std::to_string(id) + " not found");
}

std::optional<int> Run::activity_of(EmailId email) const {
    for (const auto& [_, phase] : activities)
        for (const auto& a : phase.clusters)
            if (std::binary_search(a.email_ids.begin(), a.email_ids.end(), email)) return a.activity_id;
    return std::nullopt;
}

Run create_run(Corpus corpus, PipelineConfig config) {
    config.validate();
    validate_corpus(corpus);
    if (corpus.emails.empty()) throw CorpusError("empty corpus");
    Run run;
    run.model = fit_text_model(corpus, config.cleansing(), config.boost);
    run.synonyms = load_synonyms(config.synonyms_file ? std::filesystem::path(*config.synonyms_file)
                                                      : default_synonyms_path());
    run.corpus = std::move(corpus);
    run.config = std::move(config);
    return run;
}

Workspace make_workspace(const Run& run) { return Workspace::build(run.corpus, run.model); }

ActivityProjector make_projector(const Run& run) {
    return ActivityProjector(run.model, run.synonyms, run.config.activity_distance);
}

namespace {

void drop_activity_labels(Run& run, int topic) {
    auto it = run.activities.find(topic);
    if (it == run.activities.end()) return;
    for (const auto& a : it->second.clusters) run.labels.entries.erase(a.activity_id);
    run.activities.erase(it);
}

void reset_downstream_of_topics(Run& run) {
    run.instances.clear();
    run.activities.clear();
    run.labels.entries.clear();
    run.labels.topic_labels.clear();
    run.next_instance_id = 1;
    run.next_activity_id = 1;
}

std::vector<int> selected_topics(const Run& run, std::optional<int> topic) {
    if (!run.topics) throw PhaseError("topics have not been computed; run the topics phase first");
    if (topic) {
        run.topic(*topic);
        return {*topic};
    }
    std::vector<int> out;
    for (const auto& t : run.topics->clusters) out.push_back(t.cluster_id);
    return out;
}

bool same_topics(const TopicPhase& a, const TopicPhase& b) {
    return a.clusters == b.clusters && a.dendrogram == b.dendrogram && a.k == b.k;
}

bool same_instances(const InstancePhase& a, const InstancePhase& b) {
    if (a.instances.size() != b.instances.size() || a.variant != b.variant || !(a.dendrogram == b.dendrogram))
        return false;
    for (std::size_t i = 0; i < a.instances.size(); ++i)
        if (a.instances[i].email_ids != b.instances[i].email_ids) return false;
    return true;
}

bool same_activities(const ActivityPhase& a, const ActivityPhase& b) {
    if (a.clusters.size() != b.clusters.size() || a.chosen_k != b.chosen_k ||
        a.seed_instance_id != b.seed_instance_id)
        return false;
    for (std::size_t i = 0; i < a.clusters.size(); ++i)
        if (a.clusters[i].email_ids != b.clusters[i].email_ids || a.clusters[i].centroid != b.clusters[i].centroid)
            return false;
    return true;
}

}  // namespace

void run_topics(Run& run, const Workspace& ws, const CutRule& rule, Linkage linkage) {
    auto phase = cluster_topics(ws, run.config.topic_distance, rule, linkage);
    // An unchanged result keeps downstream phases and labels.
    if (run.topics && run.topic_source == TopicSource::cut && same_topics(*run.topics, phase)) return;
    reset_downstream_of_topics(run);
    run.topics = std::move(phase);
    run.topic_source = TopicSource::cut;
}

void run_topics(Run& run, const Workspace& ws) {
    run_topics(run, ws, run.config.topic_rule(), run.config.topic_linkage);
}

void assign_topics(Run& run, const std::vector<std::vector<EmailId>>& groups) {
    std::set<EmailId> seen;
    for (const auto& g : groups) {
        if (g.empty()) throw ContractViolation("assign_topics: empty group");
        for (auto id : g) {
            if (!run.corpus.contains(id)) throw NotFound("email " + std::to_string(id) + " not in corpus");
            if (!seen.insert(id).second)
                throw ContractViolation("assign_topics: email " + std::to_string(id) + " assigned twice");
        }
    }
    if (seen.size() != run.corpus.emails.size()) {
        std::string missing;
        for (const auto& e : run.corpus.emails)
            if (!seen.count(e.id)) missing += (missing.empty() ? "" : ", ") + std::to_string(e.id);
        throw ContractViolation("assign_topics: emails without a topic: " + missing);
    }
    auto flat = FlatClustering::from_groups(groups);
    TopicPhase phase;
    auto canon = flat.groups();
    for (std::size_t i = 0; i < canon.size(); ++i) phase.clusters.push_back({static_cast<int>(i), canon[i], std::nullopt});
    phase.k = flat.k;
    if (run.topics && run.topic_source == TopicSource::assigned && same_topics(*run.topics, phase)) return;
    reset_downstream_of_topics(run);
    run.topics = std::move(phase);
    run.topic_source = TopicSource::assigned;
}

std::vector<std::vector<EmailId>> read_partition_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    auto rows = csv::read_all(in);
    std::map<std::string, std::vector<EmailId>> groups;
    std::vector<std::string> order;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 2) throw RowError(path.string() + ": row " + std::to_string(r + 1) + ": expected 2 fields", r + 1);
        EmailId id = 0;
        try {
            std::size_t used = 0;
            id = std::stoll(row[0], &used);
            if (used != row[0].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            if (r == 0) continue;  // header
            throw RowError(path.string() + ": row " + std::to_string(r + 1) + ": bad email id", r + 1);
        }
        if (!groups.count(row[1])) order.push_back(row[1]);
        groups[row[1]].push_back(id);
    }
    std::vector<std::vector<EmailId>> out;
    for (const auto& name : order) out.push_back(groups[name]);
    return out;
}

void recut_topics(Run& run, const Workspace& ws, const CutTarget& target) {
    if (!run.topics) throw PhaseError("topics have not been computed");
    if (run.topic_source == TopicSource::assigned)
        throw PhaseError("topic clusters were assigned by hand; there is no dendrogram to cut");
    run_topics(run, ws, CutRule{target, run.config.max_auto_k}, run.topics->dendrogram.linkage);
}

void run_instances(Run& run, const Workspace& ws, std::optional<int> topic, const CutRule& rule,
                   InstanceVariant variant, Linkage linkage) {
    const auto spec = instance_spec(variant, run.config.instance_distance);
    for (int t : selected_topics(run, topic)) {
        auto phase = discover_instances(ws, run.topic(t), spec, rule, run.next_instance_id, linkage);
        phase.variant = variant;
        if (auto old = run.instances.find(t); old != run.instances.end() && same_instances(old->second, phase))
            continue;
        run.next_instance_id += static_cast<int>(phase.instances.size());
        drop_activity_labels(run, t);
        run.instances[t] = std::move(phase);
    }
}

void run_instances(Run& run, const Workspace& ws, std::optional<int> topic) {
    run_instances(run, ws, topic, run.config.instance_rule(), run.config.instance_variant,
                  run.config.instance_linkage);
}

void recut_instances(Run& run, const Workspace& ws, int topic, const CutTarget& target) {
    auto it = run.instances.find(topic);
    if (it == run.instances.end())
        throw PhaseError("instances of topic " + std::to_string(topic) + " have not been computed");
    auto variant = it->second.variant;
    auto linkage = it->second.dendrogram.linkage;
    run_instances(run, ws, topic, CutRule{target, run.config.max_auto_k}, variant, linkage);
}

void run_activities(Run& run, const Workspace& ws, std::optional<int> topic, const ActivityOptions& options) {
    auto topics = selected_topics(run, topic);
    std::vector<int> missing;
    for (int t : topics)
        if (!run.instances.count(t)) missing.push_back(t);
    if (!missing.empty()) {
        std::string ids;
        for (int t : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(t);
        throw PhaseError("instances have not been computed for topic(s) " + ids);
    }

    std::optional<int> seed_topic;
    if (options.seed_instance) {
        for (int t : topics)
            for (const auto& inst : run.instances.at(t).instances)
                if (inst.instance_id == *options.seed_instance) seed_topic = t;
        if (!seed_topic) throw NotFound("seed instance " + std::to_string(*options.seed_instance) + " not found");
    }

    const auto projector = make_projector(run);
    for (int t : topics) {
        const auto& instances = run.instances.at(t).instances;
        auto stats = estimate_k(instances);
        std::optional<int> override_id = seed_topic == t ? options.seed_instance : std::nullopt;
        const auto& seed = select_seed_instance(instances, stats, override_id, run.corpus);
        auto phase = cluster_activities(ws, run.topic(t), instances, seed, projector, options, run.next_activity_id);
        if (auto old = run.activities.find(t); old != run.activities.end() && same_activities(old->second, phase))
            continue;
        run.next_activity_id += static_cast<int>(phase.clusters.size());
        drop_activity_labels(run, t);
        run.activities[t] = std::move(phase);
    }
}

void run_activities(Run& run, const Workspace& ws, std::optional<int> topic) {
    run_activities(run, ws, topic, run.config.activity_options());
}

FlatClustering topic_partition(const Run& run) {
    if (!run.topics) throw PhaseError("topics have not been computed");
    std::vector<std::vector<EmailId>> g;
    for (const auto& t : run.topics->clusters) g.push_back(t.email_ids);
    return FlatClustering::from_groups(g);
}

FlatClustering instance_partition(const Run& run, int topic) {
    auto it = run.instances.find(topic);
    if (it == run.instances.end())
        throw PhaseError("instances of topic " + std::to_string(topic) + " have not been computed");
    std::vector<std::vector<EmailId>> g;
    for (const auto& i : it->second.instances) g.push_back(i.email_ids);
    return FlatClustering::from_groups(g);
}

FlatClustering activity_partition(const Run& run, int topic) {
    auto it = run.activities.find(topic);
    if (it == run.activities.end())
        throw PhaseError("activities of topic " + std::to_string(topic) + " have not been computed");
    std::vector<std::vector<EmailId>> g;
    for (const auto& a : it->second.clusters) g.push_back(a.email_ids);
    return FlatClustering::from_groups(g);
}

FlatClustering restrict_gold(const std::vector<std::vector<EmailId>>& gold, const FlatClustering& pred) {
    std::set<EmailId> want(pred.ids.begin(), pred.ids.end());
    std::set<EmailId> have;
    std::vector<std::vector<EmailId>> kept;
    for (const auto& g : gold) {
        std::vector<EmailId> k;
        for (auto id : g)
            if (want.count(id)) {
                k.push_back(id);
                have.insert(id);
            }
        if (!k.empty()) kept.push_back(k);
    }
    for (auto id : want)
        if (!have.count(id)) throw ContractViolation("gold partition has no group for email " + std::to_string(id));
    return FlatClustering::from_groups(kept);
}

}  // namespace mailproc
