#include "mailproc/config.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "mailproc/errors.hpp"

namespace mailproc {

using jsonio::json;
using jsonio::ObjectReader;

void PipelineConfig::validate() const {
    if (min_token_length < 1) throw ConfigError("min_token_length must be >= 1", "cleansing.min_token_length");
    boost.validate();
    topic_distance.validate("topics.distance");
    if (topic_distance.w_time != 0.0)
        throw ConfigError("topic clustering uses subject and body only; w_time must be 0", "topics.distance.w_time");
    instance_distance.validate("instances.distance");
    activity_distance.validate("activities.distance");
    if (activity_distance.w_time != 0.0)
        throw ConfigError("activity clustering excludes the timestamp; w_time must be 0",
                          "activities.distance.w_time");
    if (activity_distance.w_participants != 0.0)
        throw ConfigError("activity clustering works in term space; w_participants must be 0",
                          "activities.distance.w_participants");
    if (max_auto_k < 2) throw ConfigError("max_auto_k must be >= 2", "max_auto_k");
    if (activity_k && *activity_k < 1) throw ConfigError("k must be >= 1", "activities.k");
    if (k_sweep && (k_sweep->first < 1 || k_sweep->first > k_sweep->second))
        throw ConfigError("k_sweep must be [lo, hi] with 1 <= lo <= hi", "activities.k_sweep");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1", "activities.max_iterations");
    if (!(convergence_epsilon >= 0)) throw ConfigError("convergence_epsilon must be >= 0", "activities.convergence_epsilon");
}

CleansingConfig PipelineConfig::cleansing() const {
    CleansingConfig c;
    c.remove_numbers = remove_numbers;
    c.remove_punctuation = remove_punctuation;
    c.lowercase = lowercase;
    c.min_token_length = min_token_length;
    c.stemming = stemming;
    c.stopwords = load_stopwords(stopwords_file ? std::filesystem::path(*stopwords_file) : default_stopwords_path());
    for (const auto& w : extra_stopwords) c.stopwords.insert(w);
    return c;
}

ActivityOptions PipelineConfig::activity_options() const {
    ActivityOptions o;
    o.k = activity_k;
    o.k_range = k_sweep;
    o.seed_instance = seed_instance;
    o.max_iterations = max_iterations;
    o.convergence_epsilon = convergence_epsilon;
    return o;
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) { return dump_config(a) == dump_config(b); }

namespace {

json to_json(const PipelineConfig& c) {
    json j;
    j["cleansing"] = {{"remove_numbers", c.remove_numbers},
                      {"remove_punctuation", c.remove_punctuation},
                      {"lowercase", c.lowercase},
                      {"min_token_length", c.min_token_length},
                      {"stemming", c.stemming},
                      {"stopwords_file", c.stopwords_file ? json(*c.stopwords_file) : json(nullptr)},
                      {"extra_stopwords", c.extra_stopwords}};
    j["boost"] = {{"subject_term_weight", c.boost.subject_term_weight}};
    j["topics"] = {{"distance", jsonio::distance_to_json(c.topic_distance)},
                   {"linkage", std::string(to_string(c.topic_linkage))},
                   {"cut", jsonio::cut_to_json(c.topic_cut)}};
    j["instances"] = {{"distance", jsonio::distance_to_json(c.instance_distance)},
                      {"linkage", std::string(to_string(c.instance_linkage))},
                      {"variant", std::string(to_string(c.instance_variant))},
                      {"cut", jsonio::cut_to_json(c.instance_cut)}};
    j["activities"] = {{"distance", jsonio::distance_to_json(c.activity_distance)},
                       {"k", c.activity_k ? json(*c.activity_k) : json(nullptr)},
                       {"k_sweep", c.k_sweep ? json::array({c.k_sweep->first, c.k_sweep->second}) : json(nullptr)},
                       {"seed_instance", c.seed_instance ? json(*c.seed_instance) : json(nullptr)},
                       {"max_iterations", c.max_iterations},
                       {"convergence_epsilon", c.convergence_epsilon}};
    j["max_auto_k"] = c.max_auto_k;
    j["synonyms_file"] = c.synonyms_file ? json(*c.synonyms_file) : json(nullptr);
    return j;
}

Linkage read_linkage(ObjectReader& r, Linkage dflt) {
    if (!r.has("linkage")) return dflt;
    std::string s;
    r.read("linkage", s);
    try {
        return linkage_from_string(s);
    } catch (const Error&) {
        throw ConfigError("unknown linkage '" + s + "'", r.path_of("linkage"));
    }
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), "<root>");
    }
    PipelineConfig c;
    ObjectReader root(j, "");
    if (root.has("cleansing")) {
        ObjectReader r(root.raw("cleansing"), "cleansing");
        r.read("remove_numbers", c.remove_numbers);
        r.read("remove_punctuation", c.remove_punctuation);
        r.read("lowercase", c.lowercase);
        r.read("min_token_length", c.min_token_length);
        r.read("stemming", c.stemming);
        r.read("stopwords_file", c.stopwords_file);
        r.read("extra_stopwords", c.extra_stopwords);
        r.finish();
    }
    if (root.has("boost")) {
        ObjectReader r(root.raw("boost"), "boost");
        r.read("subject_term_weight", c.boost.subject_term_weight);
        r.finish();
    }
    if (root.has("topics")) {
        ObjectReader r(root.raw("topics"), "topics");
        if (r.has("distance")) c.topic_distance = jsonio::distance_from_json(r.raw("distance"), "topics.distance", c.topic_distance);
        c.topic_linkage = read_linkage(r, c.topic_linkage);
        if (r.has("cut")) c.topic_cut = jsonio::cut_from_json(r.raw("cut"), "topics.cut");
        r.finish();
    }
    if (root.has("instances")) {
        ObjectReader r(root.raw("instances"), "instances");
        if (r.has("distance"))
            c.instance_distance = jsonio::distance_from_json(r.raw("distance"), "instances.distance", c.instance_distance);
        c.instance_linkage = read_linkage(r, c.instance_linkage);
        if (r.has("variant")) {
            std::string v;
            r.read("variant", v);
            try {
                c.instance_variant = instance_variant_from_string(v);
            } catch (const ConfigError&) {
                throw ConfigError("unknown instance variant '" + v + "'", "instances.variant");
            }
        }
        if (r.has("cut")) c.instance_cut = jsonio::cut_from_json(r.raw("cut"), "instances.cut");
        r.finish();
    }
    if (root.has("activities")) {
        ObjectReader r(root.raw("activities"), "activities");
        if (r.has("distance"))
            c.activity_distance =
                jsonio::distance_from_json(r.raw("distance"), "activities.distance", c.activity_distance);
        r.read("k", c.activity_k);
        if (r.has("k_sweep")) {
            const auto& v = r.raw("k_sweep");
            if (v.is_null()) {
                c.k_sweep.reset();
            } else {
                if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
                    throw ConfigError("expected [lo, hi]", "activities.k_sweep");
                c.k_sweep = std::make_pair(v[0].get<int>(), v[1].get<int>());
            }
        }
        r.read("seed_instance", c.seed_instance);
        r.read("max_iterations", c.max_iterations);
        r.read("convergence_epsilon", c.convergence_epsilon);
        r.finish();
    }
    root.read("max_auto_k", c.max_auto_k);
    root.read("synonyms_file", c.synonyms_file);
    root.finish();
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string(), "<file>");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const PipelineConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace mailproc
