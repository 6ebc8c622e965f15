#include "mailproc/event_log.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mailproc/csv.hpp"
#include "mailproc/errors.hpp"
#include "mailproc/run.hpp"

namespace mailproc {

std::size_t EventLog::case_count() const {
    std::set<int> cases;
    for (const auto& r : records) cases.insert(r.case_id);
    return cases.size();
}

EventLog build_event_log(const Run& run, int topic) {
    const auto& tc = run.topic(topic);
    auto inst = run.instances.find(topic);
    if (inst == run.instances.end())
        throw PhaseError("instances of topic " + std::to_string(topic) + " have not been computed");
    if (!run.activities.count(topic))
        throw PhaseError("activities of topic " + std::to_string(topic) + " have not been computed");
    auto unlabeled = unlabeled_activities(run, topic);
    if (!unlabeled.empty()) {
        std::string ids;
        for (int id : unlabeled) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
        throw PhaseError("unlabeled activity clusters: " + ids);
    }

    std::map<EmailId, std::string> activity_of;
    for (const auto& a : run.activities.at(topic).clusters)
        for (auto id : a.email_ids) activity_of[id] = *run.labels.label_of(a.activity_id);

    EventLog log;
    log.topic_cluster_id = topic;
    if (auto it = run.labels.topic_labels.find(topic); it != run.labels.topic_labels.end()) log.topic_label = it->second;
    else if (tc.label) log.topic_label = tc.label;
    for (const auto& instance : inst->second.instances)
        for (auto id : instance.email_ids) {
            const auto& e = run.corpus.by_id(id);
            EventRecord r;
            r.case_id = instance.instance_id;
            r.activity = activity_of.at(id);
            r.timestamp = e.timestamp;
            r.resource = e.sender;
            r.email_id = id;
            r.receivers = e.receivers;
            log.records.push_back(std::move(r));
        }
    std::sort(log.records.begin(), log.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.case_id, a.timestamp, a.email_id) < std::tie(b.case_id, b.timestamp, b.email_id);
    });
    return log;
}

void write_event_csv(const EventLog& log, std::ostream& out) {
    csv::write_record(out, {"case_id", "activity", "timestamp", "resource", "lifecycle", "email_id"});
    for (const auto& r : log.records)
        csv::write_record(out, {std::to_string(r.case_id), r.activity, format_iso8601(r.timestamp), r.resource,
                                r.lifecycle, std::to_string(r.email_id)});
}

void write_event_csv(const EventLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_event_csv(log, out);
    if (!out) throw Error("write failed: " + path.string());
}

EventLog read_event_csv(std::istream& in) {
    auto rows = csv::read_all(in);
    const csv::Record header{"case_id", "activity", "timestamp", "resource", "lifecycle", "email_id"};
    if (rows.empty() || rows[0] != header) throw SchemaError("event log header must be case_id,activity,timestamp,resource,lifecycle,email_id", "case_id");
    EventLog log;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size()) throw RowError("row " + std::to_string(i) + ": expected 6 fields", i);
        EventRecord r;
        try {
            r.case_id = std::stoi(row[0]);
            r.email_id = std::stoll(row[5]);
        } catch (const std::exception&) {
            throw RowError("row " + std::to_string(i) + ": bad integer field", i);
        }
        auto ts = parse_timestamp(row[2]);
        if (!ts) throw RowError("row " + std::to_string(i) + ": unparseable timestamp", i);
        r.activity = row[1];
        r.timestamp = *ts;
        r.resource = row[3];
        r.lifecycle = row[4];
        log.records.push_back(std::move(r));
    }
    return log;
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            case '\t': out += "&#9;"; break;
            default: out += c;
        }
    }
    return out;
}

void attr(std::ostream& out, const char* indent, const char* type, std::string_view key, std::string_view value) {
    out << indent << '<' << type << " key=\"" << xml_escape(key) << "\" value=\"" << xml_escape(value) << "\"/>\n";
}

}  // namespace

void write_xes(const EventLog& log, std::ostream& out) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<log xes.version=\"1849-2016\" xmlns=\"http://www.xes-standard.org/\">\n";
    out << "  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n";
    out << "  <extension name=\"Time\" prefix=\"time\" uri=\"http://www.xes-standard.org/time.xesext\"/>\n";
    out << "  <extension name=\"Organizational\" prefix=\"org\" uri=\"http://www.xes-standard.org/org.xesext\"/>\n";
    out << "  <extension name=\"Lifecycle\" prefix=\"lifecycle\" uri=\"http://www.xes-standard.org/lifecycle.xesext\"/>\n";
    out << "  <extension name=\"Email\" prefix=\"email\" uri=\"urn:mailproc:email.xesext\"/>\n";
    out << "  <global scope=\"trace\">\n";
    attr(out, "    ", "string", "concept:name", "UNKNOWN");
    out << "  </global>\n";
    out << "  <global scope=\"event\">\n";
    attr(out, "    ", "string", "concept:name", "UNKNOWN");
    attr(out, "    ", "date", "time:timestamp", "1970-01-01T00:00:00.000+00:00");
    attr(out, "    ", "string", "org:resource", "UNKNOWN");
    attr(out, "    ", "string", "lifecycle:transition", "complete");
    out << "  </global>\n";
    out << "  <classifier name=\"Activity\" keys=\"concept:name\"/>\n";
    out << "  <classifier name=\"Activity and transition\" keys=\"concept:name lifecycle:transition\"/>\n";
    std::string name = "email process log";
    if (log.topic_cluster_id) name = "topic " + std::to_string(*log.topic_cluster_id);
    if (log.topic_label) name += ": " + *log.topic_label;
    attr(out, "  ", "string", "concept:name", name);
    attr(out, "  ", "string", "lifecycle:model", "standard");

    std::size_t i = 0;
    while (i < log.records.size()) {
        const int case_id = log.records[i].case_id;
        out << "  <trace>\n";
        attr(out, "    ", "string", "concept:name", std::to_string(case_id));
        for (; i < log.records.size() && log.records[i].case_id == case_id; ++i) {
            const auto& r = log.records[i];
            out << "    <event>\n";
            attr(out, "      ", "string", "concept:name", r.activity);
            attr(out, "      ", "date", "time:timestamp", format_xes_date(r.timestamp));
            attr(out, "      ", "string", "org:resource", r.resource);
            attr(out, "      ", "string", "lifecycle:transition", r.lifecycle);
            attr(out, "      ", "int", "email:id", std::to_string(r.email_id));
            std::string receivers;
            for (const auto& x : r.receivers) receivers += (receivers.empty() ? "" : ";") + x;
            attr(out, "      ", "string", "email:receivers", receivers);
            out << "    </event>\n";
        }
        out << "  </trace>\n";
    }
    out << "</log>\n";
}

void write_xes(const EventLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_xes(log, out);
    if (!out) throw Error("write failed: " + path.string());
}

DirectlyFollowsGraph mine_dfg(const EventLog& log) {
    DirectlyFollowsGraph g;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        ++g.activities[r.activity];
        bool first = i == 0 || log.records[i - 1].case_id != r.case_id;
        bool last = i + 1 == log.records.size() || log.records[i + 1].case_id != r.case_id;
        if (first) ++g.starts[r.activity];
        if (last) ++g.ends[r.activity];
        if (!first) ++g.edges[{log.records[i - 1].activity, r.activity}];
    }
    return g;
}

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string to_dot(const DirectlyFollowsGraph& g) {
    std::ostringstream out;
    out << "digraph dfg {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box];\n";
    out << "  \"__start\" [shape=circle, label=\"\"];\n";
    out << "  \"__end\" [shape=doublecircle, label=\"\"];\n";
    for (const auto& [a, n] : g.activities)
        out << "  " << dot_quote(a) << " [label=" << dot_quote(a + " (" + std::to_string(n) + ")") << "];\n";
    for (const auto& [a, n] : g.starts) out << "  \"__start\" -> " << dot_quote(a) << " [label=\"" << n << "\"];\n";
    for (const auto& [e, n] : g.edges)
        out << "  " << dot_quote(e.first) << " -> " << dot_quote(e.second) << " [label=\"" << n << "\"];\n";
    for (const auto& [a, n] : g.ends) out << "  " << dot_quote(a) << " -> \"__end\" [label=\"" << n << "\"];\n";
    out << "}\n";
    return out.str();
}

}  // namespace mailproc
