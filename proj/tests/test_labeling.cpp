#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mailproc/errors.hpp"
#include "mailproc/labeling.hpp"
#include "mailproc/run.hpp"
#include "support.hpp"

using namespace mailproc;

namespace {

// The same run as testing::labeled_run, stopped before labels are applied.
Run unlabeled_run() {
    Run run = testing::labeled_run();
    run.labels = LabelStore{};
    return run;
}

}  // namespace

TEST_CASE("label file parsing") {
    std::istringstream with_header("activity_id,label\n1,submit demand\n2,\"request, information\"\n");
    auto rows = read_label_file(with_header);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::pair<int, std::string>{1, "submit demand"});
    CHECK(rows[1].second == "request, information");

    std::istringstream bare("3,respond\n");
    CHECK(read_label_file(bare).size() == 1);

    std::istringstream bad("activity_id,label\nx,oops\n");
    CHECK_THROWS_AS(read_label_file(bad), RowError);
    std::istringstream wide("1,a,b\n");
    CHECK_THROWS_AS(read_label_file(wide), RowError);
}

TEST_CASE("medoid proposals cover every activity cluster") {
    auto run = unlabeled_run();
    auto props = propose_medoids(run);
    REQUIRE(props.size() == 4);
    for (std::size_t i = 0; i < props.size(); ++i) {
        CHECK(props[i].activity_id == static_cast<int>(i) + 1);
        CHECK(!props[i].current_label);
        CHECK(std::find(props[i].members.begin(), props[i].members.end(), props[i].medoid.id) != props[i].members.end());
    }
    Run empty = create_run(testing::table1(), PipelineConfig{});
    CHECK_THROWS_AS(propose_medoids(empty), PhaseError);
}

TEST_CASE("assigning labels: trimming, overwrite, audit trail and errors") {
    auto run = unlabeled_run();
    CHECK(unlabeled_activities(run) == std::vector<int>{1, 2, 3, 4});

    assign_label(run, 1, "  submit demand ");
    CHECK(run.labels.label_of(1) == "submit demand");
    CHECK(run.labels.audit.size() == 1);
    CHECK(!run.labels.audit[0].previous);

    assign_label(run, 1, "submit demand");
    CHECK(run.labels.audit.size() == 1);

    assign_label(run, 1, "submit request");
    REQUIRE(run.labels.audit.size() == 2);
    CHECK(run.labels.audit[1].previous == "submit demand");
    CHECK(run.labels.audit[1].sequence == 2);
    CHECK(run.labels.entries.at(1).centroid == run.activity(1).centroid);
    CHECK(run.labels.entries.at(1).medoid_email_id == run.activity(1).medoid_id);

    CHECK_THROWS_AS(assign_label(run, 1, "   "), InvalidLabel);
    CHECK_THROWS_AS(assign_label(run, 99, "x"), NotFound);
    CHECK(unlabeled_activities(run) == std::vector<int>{2, 3, 4});

    assign_topic_label(run, 0, "mission");
    CHECK(run.labels.topic_labels.at(0) == "mission");
    CHECK(run.labels.audit.back().target == "topic");
    CHECK_THROWS_AS(assign_topic_label(run, 42, "x"), NotFound);
}

TEST_CASE("bulk label application validates before writing") {
    auto run = unlabeled_run();
    CHECK_THROWS_AS(apply_label_file(run, {{1, "a"}, {77, "b"}}), NotFound);
    CHECK(run.labels.entries.empty());
    CHECK_THROWS_AS(apply_label_file(run, {{1, "a"}, {2, " "}}), InvalidLabel);
    CHECK(run.labels.entries.empty());
    apply_label_file(run, read_label_file(testing::fixture("table1_labels.csv")));
    CHECK(unlabeled_activities(run).empty());
    CHECK(run.labels.entries.at(4).labeled_by == LabelSource::file);
}

TEST_CASE("classification confidence") {
    CHECK(classification_confidence(0, 0) == 1.0);
    CHECK(classification_confidence(0, 2) == 1.0);
    CHECK(classification_confidence(1, 1) == 0.5);
    CHECK(classification_confidence(1, 3) == doctest::Approx(0.75));
}

TEST_CASE("classify needs labels") {
    auto run = unlabeled_run();
    CHECK_THROWS_AS(classify(run, run.corpus.by_id(1)), PhaseError);
}

TEST_CASE("labeled corpus emails classify to their own cluster") {
    auto run = testing::labeled_run();
    for (const auto& phase : run.activities)
        for (const auto& ac : phase.second.clusters)
            for (auto id : ac.email_ids) {
                auto r = classify(run, run.corpus.by_id(id));
                REQUIRE(r.classifiable);
                CHECK(r.predicted_activity_id == ac.activity_id);
                CHECK(r.confidence >= 0.5);
                CHECK(r.confidence <= 1.0);
            }
}

TEST_CASE("leave-one-out: email 22 goes to the nearest remaining centroid") {
    auto run = testing::labeled_run();
    const int respond = *run.activity_of(22);
    REQUIRE(run.labels.label_of(respond) == "respond information");

    // Centroid of the cluster without 22, i.e. of its remaining members.
    const auto& members = run.activity(respond).email_ids;
    std::vector<EmailId> rest;
    for (auto id : members)
        if (id != 22) rest.push_back(id);
    REQUIRE(!rest.empty());
    auto ws = make_workspace(run);
    const auto projector = make_projector(run);
    auto pts = projector.project_all(ws, rest);
    std::vector<double> centroid(pts.cols, 0.0);
    for (std::size_t i = 0; i < pts.rows; ++i)
        for (std::size_t j = 0; j < pts.cols; ++j) centroid[j] += pts.row(i)[j] / static_cast<double>(pts.rows);
    run.labels.entries.at(respond).centroid = centroid;

    // Oracle: Euclidean distance from the projected email to every labeled centroid.
    auto v = projector.project_all(ws, {22});
    std::string nearest;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, entry] : run.labels.entries) {
        double s = 0;
        for (std::size_t j = 0; j < entry.centroid.size(); ++j) s += std::pow(v.row(0)[j] - entry.centroid[j], 2);
        if (std::sqrt(s) < best) {
            best = std::sqrt(s);
            nearest = entry.label;
        }
    }

    auto held_out = run.corpus.by_id(22);
    held_out.id = 1022;
    auto r = classify(run, held_out);
    REQUIRE(r.classifiable);
    CHECK(r.predicted_label == nearest);
    CHECK(r.distance_to_centroid == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.email_id == 1022);
}

TEST_CASE("classify drops unknown terms and reports empty emails as unclassifiable") {
    auto run = testing::labeled_run();
    Email e;
    e.id = 500;
    e.sender = "x@y.org";
    e.receivers = {"z@y.org"};
    e.subject = "qwertyuiop";
    e.body = "zxcvbnm asdfghjkl";
    auto r = classify(run, e);
    CHECK(!r.classifiable);

    e.body = "zxcvbnm mission";
    auto r2 = classify(run, e);
    CHECK(r2.classifiable);

    auto only_mission = classify(run, run.corpus.by_id(2), 0);
    CHECK(only_mission.classifiable);
    CHECK_THROWS_AS(classify(run, run.corpus.by_id(2), 1), PhaseError);
}
