#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mailproc/ingest.hpp"
#include "mailproc/labeling.hpp"
#include "mailproc/run.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(MAILPROC_DATA_DIR) / "fixtures" / name;
}

inline std::filesystem::path test_data(const std::string& name) {
    return std::filesystem::path(MAILPROC_TEST_DATA) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline mailproc::Corpus table1() { return mailproc::parse_csv(fixture("table1.csv")); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("mailproc-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Topics assigned from the fixture, mission instances cut at 2 and meeting at
// 4, mission activities at k=4 seeded from instance (20..23), labels loaded.
// Topic 0 is the mission topic (it holds email 1).
inline mailproc::Run labeled_run() {
    using namespace mailproc;
    Run run = create_run(table1(), PipelineConfig{});
    auto ws = make_workspace(run);
    assign_topics(run, read_partition_file(fixture("table1_topics.csv")));
    const int mission = run.topics->clusters[0].cluster_id;
    const int meeting = run.topics->clusters[1].cluster_id;
    run_instances(run, ws, mission, CutRule{CutK{2}, 10}, InstanceVariant::body_subject_time, Linkage::complete);
    run_instances(run, ws, meeting, CutRule{CutK{4}, 10}, InstanceVariant::body_subject_time, Linkage::complete);
    int seed = 0;
    for (const auto& inst : run.instances.at(mission).instances)
        if (inst.email_ids.front() == 20) seed = inst.instance_id;
    ActivityOptions opt;
    opt.k = 4;
    opt.seed_instance = seed;
    run_activities(run, ws, mission, opt);
    apply_label_file(run, read_label_file(fixture("table1_labels.csv")));
    return run;
}

}  // namespace testing
