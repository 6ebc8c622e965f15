#include "mailproc/service.hpp"

#include <mutex>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "mailproc/errors.hpp"
#include "mailproc/event_log.hpp"
#include "mailproc/run_file.hpp"

namespace mailproc {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& j) { return {status, "application/json", j.dump() + "\n"}; }

HttpResponse error_response(int status, const std::string& type, const std::string& message) {
    return json_response(status, {{"error", {{"type", type}, {"message", message}}}});
}

json email_json(const Email& e) {
    return {{"id", e.id},
            {"sender", e.sender},
            {"receivers", e.receivers},
            {"subject", e.subject},
            {"body", e.body},
            {"timestamp", format_iso8601(e.timestamp)}};
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

ActivityOptions rerun_options(const Run& run) {
    auto opts = run.config.activity_options();
    if (opts.seed_instance) {
        bool found = false;
        for (const auto& [_, p] : run.instances)
            for (const auto& i : p.instances) found = found || i.instance_id == *opts.seed_instance;
        if (!found) opts.seed_instance.reset();
    }
    return opts;
}

int parse_id(const std::string& s) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw NotFound("bad id '" + s + "'");
}

}  // namespace

std::string run_summary_json(const Run& run) {
    json j;
    j["corpus"] = {{"digest", run.corpus_digest()},
                   {"emails", run.corpus.emails.size()},
                   {"source", run.corpus.source_descriptor}};
    if (run.topics) {
        json clusters = json::array();
        for (const auto& t : run.topics->clusters) clusters.push_back({{"id", t.cluster_id}, {"size", t.email_ids.size()}});
        j["topics"] = {{"k", run.topics->k},
                       {"source", std::string(to_string(run.topic_source))},
                       {"silhouette", opt_json(run.topics->silhouette)},
                       {"clusters", clusters}};
    } else {
        j["topics"] = nullptr;
    }
    json inst = json::object();
    for (const auto& [t, p] : run.instances) inst[std::to_string(t)] = p.instances.size();
    j["instances"] = inst;
    json act = json::object();
    for (const auto& [t, p] : run.activities) act[std::to_string(t)] = p.clusters.size();
    j["activities"] = act;
    j["labels"] = {{"labeled", run.labels.entries.size()}, {"unlabeled", unlabeled_activities(run)}};
    return j.dump(2) + "\n";
}

Service::Service(Run run, std::filesystem::path run_path) : run_(std::move(run)), run_path_(std::move(run_path)) {}

Service::~Service() = default;

Run Service::snapshot() const {
    std::shared_lock lock(mutex_);
    return run_;
}

void Service::persist() {
    if (!run_path_.empty()) save_run(run_, run_path_);
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body,
                             const std::map<std::string, std::string>& query) {
    static const std::string prefix = "/api/v1";
    static const std::regex topic_re(R"(/topics/(-?\d+)/(dendrogram|instances|activities))");
    static const std::regex label_re(R"(/activities/([^/]+)/label)");
    static const std::regex export_re(R"(/export/([^/]+))");
    try {
        if (path.rfind(prefix, 0) != 0) throw NotFound("no route for " + path);
        const std::string rest = path.substr(prefix.size());
        std::smatch m;
        if (method == "GET") {
            if (rest == "/run") return get_run();
            if (rest == "/topics") return get_topics();
            if (rest == "/dendrogram") return get_dendrogram(std::nullopt);
            if (std::regex_match(rest, m, topic_re)) {
                int topic = parse_id(m[1]);
                if (m[2] == "dendrogram") return get_dendrogram(topic);
                if (m[2] == "instances") return get_instances(topic);
                return get_activities(topic);
            }
            if (std::regex_match(rest, m, export_re)) return get_export(m[1], query);
        } else if (method == "PUT") {
            if (std::regex_match(rest, m, label_re)) return put_label(parse_id(m[1]), body);
        } else if (method == "POST") {
            if (rest == "/recut") return post_recut(body);
            if (rest == "/classify") return post_classify(body);
        }
        throw NotFound("no route for " + method + " " + path);
    } catch (const NotFound& e) {
        return error_response(404, "NotFound", e.what());
    } catch (const InvalidLabel& e) {
        return error_response(422, "InvalidLabel", e.what());
    } catch (const ConfigError& e) {
        return error_response(422, "ConfigError", e.what());
    } catch (const ContractViolation& e) {
        return error_response(422, "ContractViolation", e.what());
    } catch (const json::exception& e) {
        return error_response(422, "BadRequest", e.what());
    } catch (const PhaseError& e) {
        return error_response(409, "PhaseError", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "Error", e.what());
    }
}

HttpResponse Service::get_run() const {
    std::shared_lock lock(mutex_);
    return {200, "application/json", run_summary_json(run_)};
}

HttpResponse Service::get_topics() const {
    std::shared_lock lock(mutex_);
    if (!run_.topics) throw PhaseError("topics have not been computed");
    json out = json::array();
    for (const auto& t : run_.topics->clusters) {
        std::optional<std::string> label = t.label;
        if (auto it = run_.labels.topic_labels.find(t.cluster_id); it != run_.labels.topic_labels.end())
            label = it->second;
        out.push_back({{"id", t.cluster_id},
                       {"email_ids", t.email_ids},
                       {"label", label ? json(*label) : json(nullptr)},
                       {"instances_computed", run_.instances.count(t.cluster_id) > 0},
                       {"activities_computed", run_.activities.count(t.cluster_id) > 0}});
    }
    return json_response(200, out);
}

HttpResponse Service::get_dendrogram(std::optional<int> topic) const {
    std::shared_lock lock(mutex_);
    if (!run_.topics) throw PhaseError("topics have not been computed");
    if (!topic) {
        if (run_.topic_source == TopicSource::assigned) throw PhaseError("topic clusters were assigned by hand");
        return json_response(200, {{"phase", "topics"},
                                   {"linkage", std::string(to_string(run_.topics->dendrogram.linkage))},
                                   {"k", run_.topics->k},
                                   {"tree", dendrogram_tree(run_.topics->dendrogram)}});
    }
    run_.topic(*topic);
    auto it = run_.instances.find(*topic);
    if (it == run_.instances.end())
        throw PhaseError("instances of topic " + std::to_string(*topic) + " have not been computed");
    return json_response(200, {{"phase", "instances"},
                               {"topic_id", *topic},
                               {"linkage", std::string(to_string(it->second.dendrogram.linkage))},
                               {"k", it->second.k},
                               {"tree", dendrogram_tree(it->second.dendrogram)}});
}

HttpResponse Service::get_instances(int topic) const {
    std::shared_lock lock(mutex_);
    run_.topic(topic);
    auto it = run_.instances.find(topic);
    if (it == run_.instances.end())
        throw PhaseError("instances of topic " + std::to_string(topic) + " have not been computed");
    json inst = json::array();
    for (const auto& i : it->second.instances) inst.push_back({{"id", i.instance_id}, {"email_ids", i.email_ids}});
    return json_response(200, {{"topic_id", topic},
                               {"variant", std::string(to_string(it->second.variant))},
                               {"k", it->second.k},
                               {"silhouette", opt_json(it->second.silhouette)},
                               {"instances", inst}});
}

HttpResponse Service::get_activities(int topic) const {
    std::shared_lock lock(mutex_);
    run_.topic(topic);
    auto it = run_.activities.find(topic);
    if (it == run_.activities.end())
        throw PhaseError("activities of topic " + std::to_string(topic) + " have not been computed");
    const auto& p = it->second;
    json clusters = json::array();
    for (const auto& a : p.clusters) {
        auto label = run_.labels.label_of(a.activity_id);
        clusters.push_back({{"id", a.activity_id},
                            {"email_ids", a.email_ids},
                            {"label", label ? json(*label) : json(nullptr)},
                            {"medoid", email_json(run_.corpus.by_id(a.medoid_id))}});
    }
    json sweep = json::array();
    for (const auto& e : p.sweep)
        sweep.push_back({{"k", e.k}, {"iterations", e.iterations}, {"quality", quality_to_json(e.quality)}});
    return json_response(200, {{"topic_id", topic},
                               {"chosen_k", p.chosen_k},
                               {"seed_instance_id", p.seed_instance_id},
                               {"average_instance_size", p.stats.average_size},
                               {"estimated_k", p.stats.k},
                               {"sweep", sweep},
                               {"clusters", clusters}});
}

HttpResponse Service::put_label(int activity_id, const std::string& body) {
    if (recuts_in_flight_ > 0) return error_response(409, "Conflict", "a recut is in progress; retry the label write");
    auto req = json::parse(body);
    if (!req.is_object() || !req.contains("label") || !req["label"].is_string())
        throw InvalidLabel("body must be {\"label\": string}");
    std::unique_lock lock(mutex_);
    if (recuts_in_flight_ > 0) return error_response(409, "Conflict", "a recut is in progress; retry the label write");
    assign_label(run_, activity_id, req["label"].get<std::string>(), LabelSource::user);
    persist();
    const auto& a = run_.activity(activity_id);
    return json_response(200, {{"activity_id", activity_id},
                               {"label", *run_.labels.label_of(activity_id)},
                               {"email_ids", a.email_ids}});
}

HttpResponse Service::post_recut(const std::string& body) {
    auto req = json::parse(body);
    if (!req.is_object()) throw ConfigError("body must be an object", "<body>");
    const auto phase = req.value("phase", std::string());
    std::optional<CutTarget> target;
    if (req.contains("k")) {
        if (!req["k"].is_number_integer() || req["k"].get<int>() < 1) throw ConfigError("k must be a positive integer", "k");
        target = CutK{req["k"].get<int>()};
    } else if (req.contains("height")) {
        if (!req["height"].is_number()) throw ConfigError("height must be a number", "height");
        target = CutHeight{req["height"].get<double>()};
    } else {
        throw ConfigError("recut needs k or height", "k");
    }
    const bool rerun = req.value("rerun", true);

    RecutScope scope(recuts_in_flight_);
    const auto generation = ++recut_generation_;
    Run work = snapshot();
    const auto ws = make_workspace(work);
    if (phase == "topics") {
        recut_topics(work, ws, *target);
        if (rerun) {
            run_instances(work, ws);
            run_activities(work, ws, std::nullopt, rerun_options(work));
        }
    } else if (phase == "instances") {
        if (!req.contains("topic") || !req["topic"].is_number_integer())
            throw ConfigError("instance recut needs an integer topic", "topic");
        int topic = req["topic"].get<int>();
        work.topic(topic);
        recut_instances(work, ws, topic, *target);
        if (rerun) run_activities(work, ws, topic, rerun_options(work));
    } else {
        throw ConfigError("phase must be \"topics\" or \"instances\"", "phase");
    }

    std::unique_lock lock(mutex_);
    if (generation != recut_generation_)
        return error_response(409, "Superseded", "a newer recut replaced this one");
    run_ = std::move(work);
    persist();
    return {200, "application/json", run_summary_json(run_)};
}

HttpResponse Service::post_classify(const std::string& body) const {
    auto req = json::parse(body);
    if (!req.is_object()) throw ConfigError("body must be an object", "<body>");
    Email e;
    e.id = req.value("id", EmailId{0});
    e.subject = req.value("subject", std::string());
    e.body = req.value("body", std::string());
    e.sender = req.value("sender", std::string());
    if (req.contains("receivers")) e.receivers = req["receivers"].get<std::vector<std::string>>();
    std::optional<int> topic;
    if (req.contains("topic") && !req["topic"].is_null()) topic = req["topic"].get<int>();

    std::shared_lock lock(mutex_);
    auto r = classify(run_, e, topic);
    json out = {{"email_id", r.email_id}, {"classifiable", r.classifiable}};
    if (r.classifiable) {
        out["predicted_activity_id"] = r.predicted_activity_id;
        out["predicted_label"] = r.predicted_label;
        out["distance_to_centroid"] = r.distance_to_centroid;
        out["confidence"] = r.confidence;
    } else {
        out["predicted_activity_id"] = nullptr;
        out["predicted_label"] = nullptr;
        out["distance_to_centroid"] = nullptr;
        out["confidence"] = nullptr;
    }
    return json_response(200, out);
}

HttpResponse Service::get_export(const std::string& format, const std::map<std::string, std::string>& query) const {
    if (format != "csv" && format != "xes" && format != "dot") throw NotFound("unknown export format '" + format + "'");
    std::shared_lock lock(mutex_);
    int topic = 0;
    if (auto it = query.find("topic"); it != query.end()) {
        topic = parse_id(it->second);
    } else if (run_.activities.size() == 1) {
        topic = run_.activities.begin()->first;
    } else {
        throw ConfigError("several topics have activities; pass ?topic=ID", "topic");
    }
    auto log = build_event_log(run_, topic);
    std::ostringstream out;
    if (format == "csv") {
        write_event_csv(log, out);
        return {200, "text/csv", out.str()};
    }
    if (format == "xes") {
        write_xes(log, out);
        return {200, "application/xml", out.str()};
    }
    return {200, "text/vnd.graphviz", to_dot(mine_dfg(log))};
}

void Service::mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir) {
    auto forward = [this](const char* method) {
        return [this, method](const httplib::Request& req, httplib::Response& res) {
            std::map<std::string, std::string> query;
            for (const auto& [k, v] : req.params) query.emplace(k, v);
            auto r = handle(method, req.path, req.body, query);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
    };
    server.Get(R"(/api/v1/.*)", forward("GET"));
    server.Put(R"(/api/v1/.*)", forward("PUT"));
    server.Post(R"(/api/v1/.*)", forward("POST"));
    if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace mailproc
