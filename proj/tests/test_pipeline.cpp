#include <doctest.h>

#include <cmath>
#include <random>

#include "mailproc/errors.hpp"
#include "mailproc/kernels.hpp"
#include "mailproc/pipeline.hpp"
#include "support.hpp"

using namespace mailproc;

namespace {

ProcessInstance inst(int id, std::vector<EmailId> ids) { return {id, 0, std::move(ids)}; }

Corpus numbered_corpus(int n) {
    Corpus c;
    for (int i = 1; i <= n; ++i) {
        Email e;
        e.id = i;
        e.sender = "a@x.org";
        e.receivers = {"b@x.org"};
        e.timestamp = Timestamp{std::chrono::seconds{1'500'000'000 + 60 * i}};
        c.emails.push_back(e);
    }
    return c;
}

Workspace fixture_workspace() {
    auto c = testing::table1();
    return Workspace::build(c, fit_text_model(c, default_cleansing(), BoostConfig{}));
}

}  // namespace

TEST_CASE("estimate_k rounds the average instance size half to even") {
    CHECK(estimate_k({inst(1, {1, 2, 3, 4, 5}), inst(2, {6, 7, 8, 9})}).k == 4);  // 4.5
    CHECK(estimate_k({inst(1, {1, 2}), inst(2, {3, 4, 5})}).k == 2);              // 2.5
    CHECK(estimate_k({inst(1, {1, 2, 3}), inst(2, {4, 5, 6, 7})}).k == 4);        // 3.5
    auto s = estimate_k({inst(1, {1}), inst(2, {2})});
    CHECK(s.k == 2);
    CHECK(s.average_size == 1.0);
    CHECK(estimate_k({inst(1, {1, 2, 3, 4, 5, 6}), inst(2, {7})}).sizes == std::vector<int>{1, 6});
    CHECK_THROWS_AS(estimate_k({}), ContractViolation);
}

TEST_CASE("seed instance: size closest to the estimate, ties to the earliest start") {
    auto c = numbered_corpus(12);
    std::vector<ProcessInstance> v{inst(1, {5, 6}), inst(2, {1, 2, 3}), inst(3, {4, 7, 8, 9}), inst(4, {10, 11, 12})};
    auto stats = estimate_k(v);  // average 3
    CHECK(select_seed_instance(v, stats, std::nullopt, c).instance_id == 2);
    CHECK(select_seed_instance(v, stats, 3, c).instance_id == 3);
    CHECK_THROWS_AS(select_seed_instance(v, stats, 9, c), NotFound);
}

TEST_CASE("seed centroid ids: kept, thinned or extended by farthest point") {
    // Points on a line at their id.
    std::vector<EmailId> ids{1, 2, 3, 4, 5, 6, 10};
    DistanceMatrix d(ids);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) d.set(i, j, std::abs(double(ids[i] - ids[j])));
    std::vector<EmailId> seed{2, 3, 5};
    CHECK(seed_centroid_ids(seed, ids, d, 3) == seed);
    CHECK(seed_centroid_ids(seed, ids, d, 2) == std::vector<EmailId>{2, 5});
    CHECK(seed_centroid_ids(seed, ids, d, 1) == std::vector<EmailId>{2});
    CHECK(seed_centroid_ids(seed, ids, d, 4) == std::vector<EmailId>{2, 3, 5, 10});
    CHECK(seed_centroid_ids(seed, ids, d, 5) == std::vector<EmailId>{2, 3, 5, 10, 1});
    CHECK_THROWS_AS(seed_centroid_ids(seed, ids, d, 8), ContractViolation);
    CHECK_THROWS_AS(seed_centroid_ids({}, ids, d, 1), ContractViolation);
}

TEST_CASE("fold_synonyms merges columns by synset and renormalizes") {
    TermMatrix m;
    m.vocabulary = {"ask", "demand", "request", "zebra"};
    m.doc_ids = {1};
    m.rows = {{{0, 0.5}, {1, 0.5}, {2, 0.5}, {3, 0.5}}};
    SynonymTable t;
    t.entries = {{"demand", "request.n.01"}, {"request", "request.n.01"}};
    auto f = fold_synonyms(m, t);
    CHECK(f.vocabulary == std::vector<std::string>{"ask", "request.n.01", "zebra"});
    // (0.5, 1.0, 0.5) / sqrt(1.5)
    CHECK(std::abs(f.at(0, "request.n.01") - 1.0 / std::sqrt(1.5)) < 1e-12);
    CHECK(std::abs(f.at(0, "ask") - 0.5 / std::sqrt(1.5)) < 1e-12);
    CHECK(t.key_of("other") == "other");
}

TEST_CASE("bundled synonym table loads") {
    auto t = load_synonyms(default_synonyms_path());
    CHECK(t.key_of("demand") == t.key_of("request"));
    CHECK(t.key_of("enclosed") == t.key_of("attached"));
}

TEST_CASE("instance distance variants") {
    auto base = DistanceSpec::instance_default();
    auto i = instance_spec(InstanceVariant::body, base);
    CHECK(i.w_subject == 0);
    CHECK(i.w_time == 0);
    CHECK(i.w_body > 0);
    auto ii = instance_spec(InstanceVariant::body_subject, base);
    CHECK(ii.w_time == 0);
    CHECK(ii.w_subject == base.w_subject);
    CHECK(instance_spec(InstanceVariant::body_subject_time, base) == base);
    for (auto v : {InstanceVariant::body, InstanceVariant::body_subject, InstanceVariant::body_subject_time})
        CHECK(instance_variant_from_string(to_string(v)) == v);
    CHECK_THROWS(instance_variant_from_string("nope"));
}

TEST_CASE("activity projection: squared distance is the weighted sum of field distances") {
    auto ws = fixture_workspace();
    SynonymTable none;
    DistanceSpec spec;
    spec.w_subject = 0.3;
    spec.w_body = 0.7;
    ActivityProjector p(ws.model, none, spec);
    std::vector<EmailId> ids;
    for (const auto& e : ws.corpus.emails) ids.push_back(e.id);
    auto pts = p.project_all(ws, ids);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < ids.size(); ++j) {
            double ds = euclidean(ws.features[i].subject, ws.features[j].subject);
            double db = euclidean(ws.features[i].body, ws.features[j].body);
            double expect = 0.3 * ds * ds + 0.7 * db * db;
            CHECK(std::abs(squared_euclidean(pts.row(i), pts.row(j)) - expect) < 1e-12);
        }
}

TEST_CASE("activity projector rejects time and participant weights") {
    auto ws = fixture_workspace();
    DistanceSpec spec = DistanceSpec::activity_default();
    spec.w_time = 0.1;
    CHECK_THROWS_AS(ActivityProjector(ws.model, SynonymTable{}, spec), ConfigError);
    spec = DistanceSpec::activity_default();
    spec.w_participants = 0.1;
    CHECK_THROWS_AS(ActivityProjector(ws.model, SynonymTable{}, spec), ConfigError);
}

TEST_CASE("topic phase on the fixture separates meetings from missions at k=2") {
    auto ws = fixture_workspace();
    auto t = cluster_topics(ws, DistanceSpec::topic_default(), CutRule{CutK{2}, 10});
    REQUIRE(t.clusters.size() == 2);
    CHECK(t.k == 2);
    CHECK(t.clusters[0].email_ids == std::vector<EmailId>{1, 2, 3, 4, 20, 21, 22, 23});
    CHECK(t.clusters[1].email_ids.front() == 5);
    CHECK(t.clusters[1].email_ids.size() == 12);

    DistanceSpec timed = DistanceSpec::topic_default();
    timed.w_time = 0.1;
    CHECK_THROWS_AS(cluster_topics(ws, timed, CutRule{}), ConfigError);

    auto autocut = cluster_topics(ws, DistanceSpec::topic_default(), CutRule{std::nullopt, 10});
    CHECK(autocut.k >= 2);
    CHECK(autocut.k <= 10);
    CHECK(autocut.silhouette);
}

TEST_CASE("instances are numbered from the first id in order of their earliest email") {
    auto ws = fixture_workspace();
    TopicCluster mission{0, {1, 2, 3, 4, 16, 20, 21, 22, 23}, std::nullopt};
    auto p = discover_instances(ws, mission, DistanceSpec::instance_default(), CutRule{CutK{2}, 10}, 7);
    REQUIRE(p.instances.size() == 2);
    CHECK(p.instances[0].instance_id == 7);
    CHECK(p.instances[1].instance_id == 8);
    CHECK(p.instances[0].email_ids == std::vector<EmailId>{1, 2, 3, 4, 16});
    CHECK(p.instances[1].email_ids == std::vector<EmailId>{20, 21, 22, 23});

    TopicCluster pair{1, {5, 6}, std::nullopt};
    auto tiny = discover_instances(ws, pair, DistanceSpec::instance_default(), CutRule{std::nullopt, 10}, 1);
    CHECK(tiny.k == 1);
    CHECK(tiny.instances.size() == 1);
}

TEST_CASE("activity phase with an explicit k and seed") {
    auto ws = fixture_workspace();
    auto synonyms = load_synonyms(default_synonyms_path());
    TopicCluster mission{0, {1, 2, 3, 4, 16, 20, 21, 22, 23}, std::nullopt};
    std::vector<ProcessInstance> instances{{1, 0, {1, 2, 3, 4, 16}}, {2, 0, {20, 21, 22, 23}}};
    ActivityProjector proj(ws.model, synonyms, DistanceSpec::activity_default());
    ActivityOptions opt;
    opt.k = 4;
    auto a = cluster_activities(ws, mission, instances, instances[1], proj, opt, 1);
    CHECK(a.chosen_k == 4);
    CHECK(a.stats.k == 4);
    CHECK(a.seed_instance_id == 2);
    REQUIRE(a.clusters.size() == 4);
    CHECK(a.clusters[0].email_ids == std::vector<EmailId>{1, 20});
    CHECK(a.clusters[1].email_ids == std::vector<EmailId>{2, 21});
    CHECK(a.clusters[2].email_ids == std::vector<EmailId>{3, 22});
    CHECK(a.clusters[3].email_ids == std::vector<EmailId>{4, 16, 23});
    for (const auto& c : a.clusters) {
        CHECK(std::find(c.email_ids.begin(), c.email_ids.end(), c.medoid_id) != c.email_ids.end());
        CHECK(c.centroid.size() == proj.dimension());
    }
    // Default sweep is estimate +- 2, clipped to [2, n].
    std::vector<int> swept;
    for (const auto& e : a.sweep) swept.push_back(e.k);
    CHECK(swept == std::vector<int>{2, 3, 4, 5, 6});

    ProcessInstance stranger{9, 1, {5}};
    CHECK_THROWS_AS(cluster_activities(ws, mission, instances, stranger, proj, opt, 1), ContractViolation);
    opt.k = 40;
    CHECK_THROWS_AS(cluster_activities(ws, mission, instances, instances[1], proj, opt, 1), ContractViolation);
}
