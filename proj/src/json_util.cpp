#include "json_util.hpp"

#include <limits>

namespace mailproc::jsonio {

std::string join_key(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

ObjectReader::ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

const json& ObjectReader::raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
}

namespace {

[[noreturn]] void wrong_type(const std::string& key, const char* expected) {
    throw ConfigError(std::string("expected ") + expected, key);
}

}  // namespace

void ObjectReader::read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_boolean()) wrong_type(path_of(key), "a boolean");
    out = v.get<bool>();
}

void ObjectReader::read(const std::string& key, int& out) {
    long long v = out;
    read(key, v);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("integer out of range", path_of(key));
    out = static_cast<int>(v);
}

void ObjectReader::read(const std::string& key, long long& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_number_integer()) wrong_type(path_of(key), "an integer");
    out = v.get<long long>();
}

void ObjectReader::read(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_number()) wrong_type(path_of(key), "a number");
    out = v.get<double>();
}

void ObjectReader::read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_string()) wrong_type(path_of(key), "a string");
    out = v.get<std::string>();
}

void ObjectReader::read(const std::string& key, std::vector<std::string>& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_array()) wrong_type(path_of(key), "an array of strings");
    out.clear();
    for (const auto& e : v) {
        if (!e.is_string()) wrong_type(path_of(key), "an array of strings");
        out.push_back(e.get<std::string>());
    }
}

void ObjectReader::read(const std::string& key, std::optional<int>& out) {
    if (!has(key)) return;
    if (raw(key).is_null()) {
        out.reset();
        return;
    }
    int v = 0;
    read(key, v);
    out = v;
}

void ObjectReader::read(const std::string& key, std::optional<std::string>& out) {
    if (!has(key)) return;
    if (raw(key).is_null()) {
        out.reset();
        return;
    }
    std::string v;
    read(key, v);
    out = v;
}

void ObjectReader::finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
        if (!seen_.count(it.key())) throw ConfigError("unknown key", path_of(it.key()));
}

json distance_to_json(const DistanceSpec& s) {
    return {{"w_subject", s.w_subject},
            {"w_body", s.w_body},
            {"w_time", s.w_time},
            {"w_participants", s.w_participants},
            {"t_max_seconds", static_cast<long long>(s.t_max.count())},
            {"use_synonyms", s.use_synonyms}};
}

DistanceSpec distance_from_json(const json& j, const std::string& path, DistanceSpec s) {
    ObjectReader r(j, path);
    r.read("w_subject", s.w_subject);
    r.read("w_body", s.w_body);
    r.read("w_time", s.w_time);
    r.read("w_participants", s.w_participants);
    long long t = s.t_max.count();
    r.read("t_max_seconds", t);
    s.t_max = std::chrono::seconds(t);
    r.read("use_synonyms", s.use_synonyms);
    r.finish();
    s.validate(path);
    return s;
}

json cut_to_json(const std::optional<CutTarget>& c) {
    if (!c) return nullptr;
    if (auto k = std::get_if<CutK>(&*c)) return {{"k", k->k}};
    return {{"height", std::get<CutHeight>(*c).height}};
}

std::optional<CutTarget> cut_from_json(const json& j, const std::string& path) {
    if (j.is_null()) return std::nullopt;
    ObjectReader r(j, path);
    if (r.has("k") && r.has("height")) throw ConfigError("give either k or height, not both", path);
    if (r.has("k")) {
        int k = 0;
        r.read("k", k);
        r.finish();
        if (k < 1) throw ConfigError("k must be >= 1", r.path_of("k"));
        return CutK{k};
    }
    if (r.has("height")) {
        double h = 0;
        r.read("height", h);
        r.finish();
        if (!(h >= 0)) throw ConfigError("height must be >= 0", r.path_of("height"));
        return CutHeight{h};
    }
    r.finish();
    throw ConfigError("cut needs k or height", path);
}

}  // namespace mailproc::jsonio
