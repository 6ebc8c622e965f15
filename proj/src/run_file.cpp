#include "mailproc/run_file.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "mailproc/errors.hpp"

namespace mailproc {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}
std::optional<std::string> opt_string(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

json email_to_json(const Email& e) {
    return {{"id", e.id},
            {"sender", e.sender},
            {"receivers", e.receivers},
            {"subject", e.subject},
            {"body", e.body},
            {"timestamp", format_iso8601(e.timestamp)}};
}

Email email_from_json(const json& j) {
    Email e;
    e.id = j.at("id").get<EmailId>();
    e.sender = j.at("sender").get<std::string>();
    e.receivers = j.at("receivers").get<std::vector<std::string>>();
    e.subject = j.at("subject").get<std::string>();
    e.body = j.at("body").get<std::string>();
    auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
    if (!ts) throw Error("invalid run file: bad timestamp for email " + std::to_string(e.id));
    e.timestamp = *ts;
    return e;
}

json field_model_to_json(const FieldModel& f) { return {{"vocabulary", f.vocabulary}, {"idf", f.idf}}; }

FieldModel field_model_from_json(const json& j) {
    FieldModel f;
    f.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    f.idf = j.at("idf").get<std::vector<double>>();
    if (f.vocabulary.size() != f.idf.size()) throw Error("invalid run file: vocabulary and idf sizes differ");
    return f;
}

json text_model_to_json(const TextModel& m) {
    const auto& c = m.cleansing;
    return {{"cleansing",
             {{"stopwords", c.stopwords},
              {"remove_numbers", c.remove_numbers},
              {"remove_punctuation", c.remove_punctuation},
              {"lowercase", c.lowercase},
              {"min_token_length", c.min_token_length},
              {"stemming", c.stemming}}},
            {"subject_term_weight", m.boost.subject_term_weight},
            {"subject", field_model_to_json(m.subject)},
            {"body", field_model_to_json(m.body)},
            {"boost_terms", m.boost_terms}};
}

TextModel text_model_from_json(const json& j) {
    TextModel m;
    const auto& c = j.at("cleansing");
    m.cleansing.stopwords = c.at("stopwords").get<std::set<std::string>>();
    m.cleansing.remove_numbers = c.at("remove_numbers").get<bool>();
    m.cleansing.remove_punctuation = c.at("remove_punctuation").get<bool>();
    m.cleansing.lowercase = c.at("lowercase").get<bool>();
    m.cleansing.min_token_length = c.at("min_token_length").get<int>();
    m.cleansing.stemming = c.at("stemming").get<bool>();
    m.boost.subject_term_weight = j.at("subject_term_weight").get<double>();
    m.subject = field_model_from_json(j.at("subject"));
    m.body = field_model_from_json(j.at("body"));
    m.boost_terms = j.at("boost_terms").get<std::set<std::string>>();
    return m;
}

json dendrogram_to_json(const Dendrogram& d) {
    json merges = json::array();
    for (const auto& m : d.merges) merges.push_back({m.left, m.right, m.height, m.size});
    return {{"linkage", std::string(to_string(d.linkage))},
            {"leaves", d.leaves},
            {"merges", merges},
            {"tree", dendrogram_tree(d)}};
}

Dendrogram dendrogram_from_json(const json& j) {
    Dendrogram d;
    d.linkage = linkage_from_string(j.at("linkage").get<std::string>());
    d.leaves = j.at("leaves").get<std::vector<EmailId>>();
    for (const auto& m : j.at("merges")) {
        if (!m.is_array() || m.size() != 4) throw Error("invalid run file: malformed merge");
        d.merges.push_back({m[0].get<std::size_t>(), m[1].get<std::size_t>(), m[2].get<double>(), m[3].get<std::size_t>()});
    }
    return d;
}

json ids_json(const std::vector<EmailId>& ids) { return json(ids); }

json topics_to_json(const Run& run) {
    if (!run.topics) return nullptr;
    const auto& t = *run.topics;
    json clusters = json::array();
    for (const auto& c : t.clusters)
        clusters.push_back({{"id", c.cluster_id}, {"email_ids", ids_json(c.email_ids)}, {"label", opt(c.label)}});
    return {{"source", std::string(to_string(run.topic_source))},
            {"k", t.k},
            {"silhouette", opt(t.silhouette)},
            {"dendrogram", t.dendrogram.leaves.empty() ? json(nullptr) : dendrogram_to_json(t.dendrogram)},
            {"clusters", clusters}};
}

json instances_to_json(const InstancePhase& p) {
    json inst = json::array();
    for (const auto& i : p.instances) inst.push_back({{"id", i.instance_id}, {"email_ids", ids_json(i.email_ids)}});
    return {{"variant", std::string(to_string(p.variant))},
            {"k", p.k},
            {"silhouette", opt(p.silhouette)},
            {"dendrogram", dendrogram_to_json(p.dendrogram)},
            {"instances", inst}};
}

InstancePhase instances_from_json(const json& j, int topic) {
    InstancePhase p;
    p.variant = instance_variant_from_string(j.at("variant").get<std::string>());
    p.k = j.at("k").get<int>();
    p.silhouette = opt_double(j.at("silhouette"));
    p.dendrogram = dendrogram_from_json(j.at("dendrogram"));
    for (const auto& i : j.at("instances"))
        p.instances.push_back({i.at("id").get<int>(), topic, i.at("email_ids").get<std::vector<EmailId>>()});
    return p;
}

json activities_to_json(const ActivityPhase& p) {
    json sweep = json::array();
    for (const auto& e : p.sweep)
        sweep.push_back({{"k", e.k},
                         {"iterations", e.iterations},
                         {"clusters", e.clusters},
                         {"quality", quality_to_json(e.quality)}});
    json clusters = json::array();
    for (const auto& a : p.clusters)
        clusters.push_back({{"id", a.activity_id},
                            {"email_ids", ids_json(a.email_ids)},
                            {"medoid_id", a.medoid_id},
                            {"centroid", a.centroid}});
    return {{"chosen_k", p.chosen_k},
            {"seed_instance_id", p.seed_instance_id},
            {"stats", {{"average_size", p.stats.average_size}, {"sizes", p.stats.sizes}, {"k", p.stats.k}}},
            {"sweep", sweep},
            {"clusters", clusters}};
}

QualityReport quality_from_json(const json& j) {
    QualityReport q;
    q.purity = opt_double(j.at("purity"));
    q.f_measure = opt_double(j.at("f_measure"));
    q.rand_index = opt_double(j.at("rand_index"));
    q.silhouette = opt_double(j.at("silhouette"));
    return q;
}

ActivityPhase activities_from_json(const json& j, int topic) {
    ActivityPhase p;
    p.chosen_k = j.at("chosen_k").get<int>();
    p.seed_instance_id = j.at("seed_instance_id").get<int>();
    const auto& s = j.at("stats");
    p.stats.average_size = s.at("average_size").get<double>();
    p.stats.sizes = s.at("sizes").get<std::vector<int>>();
    p.stats.k = s.at("k").get<int>();
    for (const auto& e : j.at("sweep")) {
        KSweepEntry k;
        k.k = e.at("k").get<int>();
        k.iterations = e.at("iterations").get<int>();
        k.clusters = e.at("clusters").get<std::vector<std::vector<EmailId>>>();
        k.quality = quality_from_json(e.at("quality"));
        p.sweep.push_back(std::move(k));
    }
    for (const auto& a : j.at("clusters")) {
        ActivityCluster c;
        c.activity_id = a.at("id").get<int>();
        c.topic_cluster_id = topic;
        c.email_ids = a.at("email_ids").get<std::vector<EmailId>>();
        c.medoid_id = a.at("medoid_id").get<EmailId>();
        c.centroid = a.at("centroid").get<std::vector<double>>();
        p.clusters.push_back(std::move(c));
    }
    return p;
}

json labels_to_json(const LabelStore& s) {
    json entries = json::object();
    for (const auto& [id, e] : s.entries)
        entries[std::to_string(id)] = {{"label", e.label},
                                       {"labeled_by", std::string(to_string(e.labeled_by))},
                                       {"topic_cluster_id", e.topic_cluster_id},
                                       {"centroid", e.centroid},
                                       {"medoid_email_id", e.medoid_email_id}};
    json topics = json::object();
    for (const auto& [id, l] : s.topic_labels) topics[std::to_string(id)] = l;
    json audit = json::array();
    for (const auto& a : s.audit)
        audit.push_back({{"sequence", a.sequence},
                         {"target", a.target},
                         {"id", a.id},
                         {"previous", opt(a.previous)},
                         {"label", a.label},
                         {"source", std::string(to_string(a.source))}});
    return {{"entries", entries}, {"topic_labels", topics}, {"audit", audit}};
}

LabelStore labels_from_json(const json& j) {
    LabelStore s;
    for (const auto& [key, e] : j.at("entries").items()) {
        LabelEntry le;
        le.label = e.at("label").get<std::string>();
        le.labeled_by = label_source_from_string(e.at("labeled_by").get<std::string>());
        le.topic_cluster_id = e.at("topic_cluster_id").get<int>();
        le.centroid = e.at("centroid").get<std::vector<double>>();
        le.medoid_email_id = e.at("medoid_email_id").get<EmailId>();
        s.entries[std::stoi(key)] = std::move(le);
    }
    for (const auto& [key, l] : j.at("topic_labels").items()) s.topic_labels[std::stoi(key)] = l.get<std::string>();
    for (const auto& a : j.at("audit")) {
        AuditEntry e;
        e.sequence = a.at("sequence").get<std::uint64_t>();
        e.target = a.at("target").get<std::string>();
        e.id = a.at("id").get<int>();
        e.previous = opt_string(a.at("previous"));
        e.label = a.at("label").get<std::string>();
        e.source = label_source_from_string(a.at("source").get<std::string>());
        s.audit.push_back(std::move(e));
    }
    return s;
}

}  // namespace

json quality_to_json(const QualityReport& q) {
    return {{"purity", opt(q.purity)},
            {"f_measure", opt(q.f_measure)},
            {"rand_index", opt(q.rand_index)},
            {"silhouette", opt(q.silhouette)}};
}

json dendrogram_tree(const Dendrogram& d) {
    const std::size_t n = d.leaves.size();
    if (n == 0) return nullptr;
    std::vector<json> nodes;
    nodes.reserve(n + d.merges.size());
    for (std::size_t i = 0; i < n; ++i)
        nodes.push_back({{"node", i}, {"email_id", d.leaves[i]}, {"height", 0.0}, {"size", 1}});
    for (std::size_t i = 0; i < d.merges.size(); ++i) {
        const auto& m = d.merges[i];
        json node = {{"node", n + i}, {"height", m.height}, {"size", m.size}};
        node["children"] = json::array({std::move(nodes.at(m.left)), std::move(nodes.at(m.right))});
        nodes.push_back(std::move(node));
    }
    if (d.merges.size() + 1 == n) return std::move(nodes.back());
    // Partial tree (should not happen for a full dendrogram): list the roots.
    json roots = json::array();
    for (auto& node : nodes)
        if (!node.is_null() && !node.empty()) roots.push_back(std::move(node));
    return roots;
}

json run_to_json(const Run& run) {
    json j;
    j["format"] = "mailproc-run";
    j["version"] = kFormatVersion;
    j["config"] = json::parse(dump_config(run.config));

    json emails = json::array();
    for (const auto& e : run.corpus.emails) emails.push_back(email_to_json(e));
    j["corpus"] = {{"digest", run.corpus_digest()},
                   {"source", run.corpus.source_descriptor},
                   {"skipped_messages", run.corpus.skipped_messages},
                   {"emails", emails}};
    j["text_model"] = text_model_to_json(run.model);
    j["synonyms"] = run.synonyms.entries;
    j["topics"] = topics_to_json(run);

    json inst = json::object();
    for (const auto& [t, p] : run.instances) inst[std::to_string(t)] = instances_to_json(p);
    j["instances"] = inst;
    json act = json::object();
    for (const auto& [t, p] : run.activities) act[std::to_string(t)] = activities_to_json(p);
    j["activities"] = act;
    j["labels"] = labels_to_json(run.labels);
    j["next_instance_id"] = run.next_instance_id;
    j["next_activity_id"] = run.next_activity_id;
    return j;
}

Run run_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "mailproc-run") throw Error("not a run file");
        if (j.at("version").get<int>() != kFormatVersion)
            throw Error("unsupported run file version " + std::to_string(j.at("version").get<int>()));
        Run run;
        run.config = parse_config(j.at("config").dump());

        const auto& c = j.at("corpus");
        for (const auto& e : c.at("emails")) run.corpus.emails.push_back(email_from_json(e));
        run.corpus.source_descriptor = c.at("source").get<std::string>();
        run.corpus.skipped_messages = c.at("skipped_messages").get<std::size_t>();
        if (run.corpus_digest() != c.at("digest").get<std::string>())
            throw CorpusError("run file corpus does not match its digest");

        run.model = text_model_from_json(j.at("text_model"));
        run.synonyms.entries = j.at("synonyms").get<std::map<std::string, std::string>>();

        const auto& t = j.at("topics");
        if (!t.is_null()) {
            TopicPhase p;
            run.topic_source = t.at("source").get<std::string>() == "assigned" ? TopicSource::assigned : TopicSource::cut;
            p.k = t.at("k").get<int>();
            p.silhouette = opt_double(t.at("silhouette"));
            if (!t.at("dendrogram").is_null()) p.dendrogram = dendrogram_from_json(t.at("dendrogram"));
            for (const auto& cl : t.at("clusters"))
                p.clusters.push_back({cl.at("id").get<int>(), cl.at("email_ids").get<std::vector<EmailId>>(),
                                      opt_string(cl.at("label"))});
            run.topics = std::move(p);
        }
        for (const auto& [key, p] : j.at("instances").items()) {
            int topic = std::stoi(key);
            run.instances[topic] = instances_from_json(p, topic);
        }
        for (const auto& [key, p] : j.at("activities").items()) {
            int topic = std::stoi(key);
            run.activities[topic] = activities_from_json(p, topic);
        }
        run.labels = labels_from_json(j.at("labels"));
        run.next_instance_id = j.at("next_instance_id").get<int>();
        run.next_activity_id = j.at("next_activity_id").get<int>();
        return run;
    } catch (const json::exception& e) {
        throw Error(std::string("invalid run file: ") + e.what());
    }
}

std::string dump_run(const Run& run) { return run_to_json(run).dump(1) + "\n"; }

Run parse_run(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("invalid run file: ") + e.what());
    }
    return run_from_json(j);
}

void save_run(const Run& run, const std::filesystem::path& path) {
    const auto text = dump_run(run);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Run load_run(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PhaseError("no run file at " + path.string() + "; run `ingest` first");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run(ss.str());
}

}  // namespace mailproc
