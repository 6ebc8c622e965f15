#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "mailproc/run.hpp"

namespace httplib {
class Server;
}

namespace mailproc {

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

// JSON API over one run file, versioned under /api/v1. Reads run
// concurrently; mutations are serialized and persisted before they are
// acknowledged. A recut computes on a snapshot and is discarded if a newer
// recut started meanwhile; label writes arriving during a recut get 409.
class Service {
public:
    Service(Run run, std::filesystem::path run_path);
    ~Service();

    /// Transport-independent dispatch; the HTTP server forwards here.
    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body,
                        const std::map<std::string, std::string>& query = {});

    // Marks a recut as in flight for the lifetime of the object.
    class RecutScope {
    public:
        explicit RecutScope(std::atomic<int>& counter) : counter_(counter) { ++counter_; }
        ~RecutScope() { --counter_; }
        RecutScope(const RecutScope&) = delete;
        RecutScope& operator=(const RecutScope&) = delete;

    private:
        std::atomic<int>& counter_;
    };
    RecutScope hold_recut() { return RecutScope(recuts_in_flight_); }

    // Registers the routes (and the optional static UI directory) on `server`.
    void mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir = std::nullopt);

    Run snapshot() const;

private:
    HttpResponse get_run() const;
    HttpResponse get_topics() const;
    HttpResponse get_dendrogram(std::optional<int> topic) const;
    HttpResponse get_instances(int topic) const;
    HttpResponse get_activities(int topic) const;
    HttpResponse put_label(int activity_id, const std::string& body);
    HttpResponse post_recut(const std::string& body);
    HttpResponse post_classify(const std::string& body) const;
    HttpResponse get_export(const std::string& format, const std::map<std::string, std::string>& query) const;

    void persist();

    mutable std::shared_mutex mutex_;
    Run run_;
    std::filesystem::path run_path_;
    std::atomic<int> recuts_in_flight_{0};
    std::atomic<std::uint64_t> recut_generation_{0};
};

// Shared by the CLI and the service: summary of a run as JSON text.
std::string run_summary_json(const Run& run);

}  // namespace mailproc
