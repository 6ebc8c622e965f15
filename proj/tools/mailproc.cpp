// mailproc: drives the email-to-event-log pipeline one phase at a time.
// Every subcommand reads and rewrites the run file given by --run.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "mailproc/errors.hpp"
#include "mailproc/event_log.hpp"
#include "mailproc/run_file.hpp"
#include "mailproc/service.hpp"

using namespace mailproc;
using nlohmann::json;

namespace {

struct Options {
    std::string run_path = "run.json";

    std::string input;
    std::string input_format;
    std::string config_path;

    std::optional<int> k;
    std::optional<double> height;
    std::string linkage;
    std::string assign_file;

    std::optional<int> topic;
    std::string variant;

    std::optional<int> k_min, k_max, seed_instance;

    std::string labels_file;
    std::vector<std::string> set_labels;
    std::vector<std::string> topic_labels;

    std::string email_file;

    std::string format = "csv";
    std::string output;

    std::string phase = "topics";
    std::string gold_file;

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
};

std::optional<CutTarget> cut_target(const Options& o) {
    if (o.k && o.height) throw ConfigError("give either --k or --height", "k");
    if (o.k) {
        if (*o.k < 1) throw ConfigError("--k must be >= 1", "k");
        return CutK{*o.k};
    }
    if (o.height) return CutHeight{*o.height};
    return std::nullopt;
}

Linkage linkage_or(const std::string& s, Linkage dflt) {
    if (s.empty()) return dflt;
    try {
        return linkage_from_string(s);
    } catch (const Error&) {
        throw ConfigError("unknown linkage '" + s + "'", "linkage");
    }
}

std::pair<int, std::string> split_assignment(const std::string& s, const char* flag) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(std::string(flag) + " expects ID=LABEL", flag);
    try {
        return {std::stoi(s.substr(0, eq)), s.substr(eq + 1)};
    } catch (const std::exception&) {
        throw ConfigError(std::string(flag) + " expects an integer id", flag);
    }
}

void print_summary(const Run& run) { std::cout << run_summary_json(run); }

int cmd_ingest(const Options& o) {
    PipelineConfig cfg = o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
    std::string format = o.input_format;
    if (format.empty()) {
        auto ext = std::filesystem::path(o.input).extension().string();
        format = (ext == ".mbox" || ext == ".mbx") ? "mbox" : "csv";
    }
    Corpus corpus;
    if (format == "csv") corpus = parse_csv(std::filesystem::path(o.input));
    else if (format == "mbox") corpus = parse_mbox(std::filesystem::path(o.input));
    else throw ConfigError("unknown input format '" + format + "'", "format");
    auto run = create_run(std::move(corpus), std::move(cfg));
    save_run(run, o.run_path);
    print_summary(run);
    return 0;
}

int cmd_topics(const Options& o) {
    auto run = load_run(o.run_path);
    if (!o.assign_file.empty()) {
        if (o.k || o.height) throw ConfigError("--assign cannot be combined with a cut", "assign");
        assign_topics(run, read_partition_file(o.assign_file));
    } else {
        auto ws = make_workspace(run);
        CutRule rule = run.config.topic_rule();
        if (auto t = cut_target(o)) rule.target = t;
        run_topics(run, ws, rule, linkage_or(o.linkage, run.config.topic_linkage));
    }
    save_run(run, o.run_path);
    print_summary(run);
    return 0;
}

int cmd_instances(const Options& o) {
    auto run = load_run(o.run_path);
    auto ws = make_workspace(run);
    CutRule rule = run.config.instance_rule();
    if (auto t = cut_target(o)) rule.target = t;
    auto variant = o.variant.empty() ? run.config.instance_variant : instance_variant_from_string(o.variant);
    run_instances(run, ws, o.topic, rule, variant, linkage_or(o.linkage, run.config.instance_linkage));
    save_run(run, o.run_path);
    print_summary(run);
    return 0;
}

int cmd_activities(const Options& o) {
    auto run = load_run(o.run_path);
    auto ws = make_workspace(run);
    auto opts = run.config.activity_options();
    if (o.k) opts.k = o.k;
    if (o.k_min || o.k_max) {
        if (!o.k_min || !o.k_max) throw ConfigError("--k-min and --k-max go together", "k_sweep");
        if (*o.k_min < 1 || *o.k_min > *o.k_max) throw ConfigError("need 1 <= k-min <= k-max", "k_sweep");
        opts.k_range = std::make_pair(*o.k_min, *o.k_max);
    }
    if (o.seed_instance) opts.seed_instance = o.seed_instance;
    run_activities(run, ws, o.topic, opts);
    save_run(run, o.run_path);
    print_summary(run);
    return 0;
}

void interactive_labels(Run& run) {
    for (const auto& p : propose_medoids(run)) {
        if (p.current_label) continue;
        std::cout << "activity " << p.activity_id << " (topic " << p.topic_cluster_id << ", " << p.members.size()
                  << " emails)\n";
        std::cout << "  medoid " << p.medoid.id << " from " << p.medoid.sender << " at "
                  << format_timestamp(p.medoid.timestamp) << "\n";
        std::cout << "  subject: " << p.medoid.subject << "\n";
        std::cout << "  body: " << p.medoid.body << "\n";
        std::cout << "label (empty to skip): " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) break;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        assign_label(run, p.activity_id, line, LabelSource::user);
    }
}

int cmd_label(const Options& o) {
    auto run = load_run(o.run_path);
    if (run.activities.empty()) throw PhaseError("no activity clusters; run `activities` first");
    bool batch = false;
    if (!o.labels_file.empty()) {
        apply_label_file(run, read_label_file(std::filesystem::path(o.labels_file)));
        batch = true;
    }
    for (const auto& s : o.set_labels) {
        auto [id, label] = split_assignment(s, "set");
        assign_label(run, id, label, LabelSource::user);
        batch = true;
    }
    for (const auto& s : o.topic_labels) {
        auto [id, label] = split_assignment(s, "topic-label");
        assign_topic_label(run, id, label);
        batch = true;
    }
    if (!batch) interactive_labels(run);
    save_run(run, o.run_path);
    print_summary(run);
    return 0;
}

int cmd_classify(const Options& o) {
    auto run = load_run(o.run_path);
    if (run.labels.entries.empty()) throw PhaseError("no labeled activity clusters; run `label` first");
    auto emails = parse_csv(std::filesystem::path(o.email_file));
    json out = json::array();
    for (const auto& e : emails.emails) {
        auto r = classify(run, e, o.topic);
        json j = {{"email_id", r.email_id}, {"classifiable", r.classifiable}};
        if (r.classifiable) {
            j["predicted_activity_id"] = r.predicted_activity_id;
            j["predicted_label"] = r.predicted_label;
            j["distance_to_centroid"] = r.distance_to_centroid;
            j["confidence"] = r.confidence;
        }
        out.push_back(j);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int default_export_topic(const Run& run, std::optional<int> topic) {
    if (topic) return *topic;
    if (run.activities.empty()) throw PhaseError("no activity clusters; run `activities` first");
    if (run.activities.size() > 1) throw ConfigError("several topics have activities; pass --topic", "topic");
    return run.activities.begin()->first;
}

int cmd_export(const Options& o) {
    auto run = load_run(o.run_path);
    auto log = build_event_log(run, default_export_topic(run, o.topic));
    std::ostringstream out;
    if (o.format == "csv") write_event_csv(log, out);
    else if (o.format == "xes") write_xes(log, out);
    else if (o.format == "dot") out << to_dot(mine_dfg(log));
    else throw ConfigError("unknown export format '" + o.format + "'", "format");
    if (o.output.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(o.output, std::ios::binary);
        if (!f) throw Error("cannot write " + o.output);
        f << out.str();
    }
    return 0;
}

int cmd_report(const Options& o) {
    auto run = load_run(o.run_path);
    auto gold = read_partition_file(o.gold_file);
    FlatClustering pred;
    std::optional<DistanceMatrix> dist;
    if (o.phase == "topics") {
        pred = topic_partition(run);
    } else if (o.phase == "instances" || o.phase == "activities") {
        if (!o.topic) throw ConfigError("--topic is required for the " + o.phase + " report", "topic");
        pred = o.phase == "instances" ? instance_partition(run, *o.topic) : activity_partition(run, *o.topic);
    } else {
        throw ConfigError("unknown phase '" + o.phase + "'", "phase");
    }
    auto ws = make_workspace(run);
    const DistanceSpec spec = o.phase == "topics"      ? run.config.topic_distance
                              : o.phase == "instances" ? instance_spec(run.instances.at(*o.topic).variant,
                                                                       run.config.instance_distance)
                                                       : DistanceSpec{};
    if (o.phase != "activities") {
        dist = kernels::pairwise_email_distances(ws.features_of(pred.ids), spec);
    } else {
        auto projector = make_projector(run);
        dist = kernels::pairwise_euclidean(projector.project_all(ws, pred.ids), pred.ids);
    }
    auto q = quality(pred, restrict_gold(gold, pred), &*dist);
    json out = quality_to_json(q);
    out["phase"] = o.phase;
    out["k"] = pred.k;
    if (o.topic) out["topic"] = *o.topic;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_serve(const Options& o) {
    auto run = load_run(o.run_path);
    Service service(std::move(run), o.run_path);
    httplib::Server server;
    std::optional<std::filesystem::path> static_dir;
    if (!o.static_dir.empty()) static_dir = o.static_dir;
    service.mount(server, static_dir);
    std::cerr << "serving " << o.run_path << " on http://" << o.host << ":" << o.port << "/api/v1\n";
    if (!server.listen(o.host, o.port)) throw Error("cannot listen on " + o.host + ":" + std::to_string(o.port));
    return 0;
}

void report_error(const std::string& type, const std::string& message, const std::string& key = {}) {
    json err = {{"type", type}, {"message", message}};
    if (!key.empty()) err["key"] = key;
    std::cerr << json{{"error", err}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine process event logs from email corpora"};
    app.require_subcommand(1);
    Options o;

    auto add_run = [&](CLI::App* c) { c->add_option("--run", o.run_path, "run file")->capture_default_str(); };

    auto* ingest = app.add_subcommand("ingest", "parse a corpus and start a run file");
    add_run(ingest);
    ingest->add_option("--input", o.input, "CSV or mbox file")->required();
    ingest->add_option("--format", o.input_format, "csv or mbox (default: by extension)");
    ingest->add_option("--config", o.config_path, "pipeline config JSON");

    auto* topics = app.add_subcommand("topics", "cluster emails into process topics");
    add_run(topics);
    topics->add_option("--k", o.k, "number of topic clusters");
    topics->add_option("--height", o.height, "cut height");
    topics->add_option("--linkage", o.linkage, "single, complete or average");
    topics->add_option("--assign", o.assign_file, "CSV email_id,topic giving the topic partition directly");

    auto* instances = app.add_subcommand("instances", "split topics into process instances");
    add_run(instances);
    instances->add_option("--topic", o.topic, "only this topic cluster");
    instances->add_option("--k", o.k, "instances per topic");
    instances->add_option("--height", o.height, "cut height");
    instances->add_option("--variant", o.variant, "body, body_subject or body_subject_time");
    instances->add_option("--linkage", o.linkage, "single, complete or average");

    auto* activities = app.add_subcommand("activities", "k-means activity clustering");
    add_run(activities);
    activities->add_option("--topic", o.topic, "only this topic cluster");
    activities->add_option("--k", o.k, "use this k instead of the best silhouette");
    activities->add_option("--k-min", o.k_min, "lower end of the k sweep");
    activities->add_option("--k-max", o.k_max, "upper end of the k sweep");
    activities->add_option("--seed-instance", o.seed_instance, "instance whose emails seed the centroids");

    auto* label = app.add_subcommand("label", "name activity clusters (interactive without flags)");
    add_run(label);
    label->add_option("--labels-file", o.labels_file, "CSV activity_id,label");
    label->add_option("--set", o.set_labels, "ID=LABEL")->take_all();
    label->add_option("--topic-label", o.topic_labels, "ID=NAME")->take_all();

    auto* classify_cmd = app.add_subcommand("classify", "recommend activities for new emails");
    add_run(classify_cmd);
    classify_cmd->add_option("--email", o.email_file, "CSV of new emails")->required();
    classify_cmd->add_option("--topic", o.topic, "only centroids of this topic");

    auto* exp = app.add_subcommand("export", "write the event log of one topic");
    add_run(exp);
    exp->add_option("--format", o.format, "csv, xes or dot")->capture_default_str();
    exp->add_option("--topic", o.topic, "topic cluster (default: the only one with activities)");
    exp->add_option("--output", o.output, "file (default: stdout)");

    auto* report = app.add_subcommand("report", "quality of a phase against a gold partition");
    add_run(report);
    report->add_option("--phase", o.phase, "topics, instances or activities")->capture_default_str();
    report->add_option("--gold", o.gold_file, "CSV email_id,group")->required();
    report->add_option("--topic", o.topic, "topic cluster for instance/activity reports");

    auto* serve = app.add_subcommand("serve", "JSON API for the labeling UI");
    add_run(serve);
    serve->add_option("--host", o.host)->capture_default_str();
    serve->add_option("--port", o.port)->capture_default_str();
    serve->add_option("--static", o.static_dir, "directory served at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("UsageError", e.what());
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(o);
        if (*topics) return cmd_topics(o);
        if (*instances) return cmd_instances(o);
        if (*activities) return cmd_activities(o);
        if (*label) return cmd_label(o);
        if (*classify_cmd) return cmd_classify(o);
        if (*exp) return cmd_export(o);
        if (*report) return cmd_report(o);
        if (*serve) return cmd_serve(o);
    } catch (const ConfigError& e) {
        report_error("ConfigError", e.what(), e.key());
        return 2;
    } catch (const PhaseError& e) {
        report_error("PhaseError", e.what());
        return 3;
    } catch (const SchemaError& e) {
        report_error("SchemaError", e.what(), e.column());
        return 1;
    } catch (const RowError& e) {
        report_error("RowError", e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error("Error", e.what());
        return 1;
    }
    return 0;
}
