#pragma once

// Strict JSON field access shared by the config and run-file readers.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mailproc/distance.hpp"
#include "mailproc/errors.hpp"
#include "mailproc/hierarchical.hpp"

namespace mailproc::jsonio {

using nlohmann::json;

std::string join_key(const std::string& path, const std::string& key);

// Walks one JSON object, remembering which keys were read so that leftovers
// can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path);

    bool has(const std::string& key) const;
    const json& raw(const std::string& key);
    std::string path_of(const std::string& key) const { return join_key(path_, key); }

    void read(const std::string& key, bool& out);
    void read(const std::string& key, int& out);
    void read(const std::string& key, long long& out);
    void read(const std::string& key, double& out);
    void read(const std::string& key, std::string& out);
    void read(const std::string& key, std::vector<std::string>& out);
    void read(const std::string& key, std::optional<int>& out);
    void read(const std::string& key, std::optional<std::string>& out);

    // Throws ConfigError on the first key that was never read.
    void finish() const;

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json distance_to_json(const DistanceSpec& s);
DistanceSpec distance_from_json(const json& j, const std::string& path, DistanceSpec defaults);

json cut_to_json(const std::optional<CutTarget>& c);
std::optional<CutTarget> cut_from_json(const json& j, const std::string& path);

}  // namespace mailproc::jsonio
