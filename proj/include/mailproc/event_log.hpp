#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mailproc/ingest.hpp"

namespace mailproc {

struct Run;

struct EventRecord {
    int case_id = 0;
    std::string activity;
    Timestamp timestamp{};
    std::string resource;  // sender
    std::string lifecycle = "complete";
    EmailId email_id = 0;
    std::vector<std::string> receivers;  // XES only; not part of the CSV form
    bool operator==(const EventRecord&) const = default;
};

struct EventLog {
    std::optional<int> topic_cluster_id;
    std::optional<std::string> topic_label;
    std::vector<EventRecord> records;  // sorted by (case_id, timestamp, email_id)

    std::size_t case_count() const;
};

/// One event per email of the topic's instances; the activity is the label
/// of the email's activity cluster. Throws PhaseError listing unlabeled
/// activity ids, or when the topic has no instances/activities.
EventLog build_event_log(const Run& run, int topic);

// Header `case_id,activity,timestamp,resource,lifecycle,email_id`; ISO-8601 UTC timestamps.
void write_event_csv(const EventLog& log, std::ostream& out);
void write_event_csv(const EventLog& log, const std::filesystem::path& path);
EventLog read_event_csv(std::istream& in);

// IEEE 1849-2016 XES, one trace per case.
void write_xes(const EventLog& log, std::ostream& out);
void write_xes(const EventLog& log, const std::filesystem::path& path);

struct DirectlyFollowsGraph {
    std::map<std::string, int> activities;                       // occurrences
    std::map<std::pair<std::string, std::string>, int> edges;    // a directly followed by b
    std::map<std::string, int> starts;
    std::map<std::string, int> ends;
};

DirectlyFollowsGraph mine_dfg(const EventLog& log);
std::string to_dot(const DirectlyFollowsGraph& g);

}  // namespace mailproc
