// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "mailproc/event_log.hpp"
#include "mailproc/kmeans.hpp"
#include "mailproc/quality.hpp"
#include "mailproc/run.hpp"
#include "mailproc/run_file.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "xes_check.hpp"

using namespace mailproc;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::vector<std::vector<EmailId>> gold(const std::string& name) {
    return read_partition_file(testing::fixture(name));
}

FlatClustering restrict_to(const FlatClustering& f, const std::set<EmailId>& keep) {
    std::map<int, std::vector<EmailId>> g;
    for (std::size_t i = 0; i < f.ids.size(); ++i)
        if (keep.count(f.ids[i])) g[f.labels[i]].push_back(f.ids[i]);
    std::vector<std::vector<EmailId>> groups;
    for (auto& [_, v] : g) groups.push_back(v);
    return FlatClustering::from_groups(groups);
}

int topic_of(const Run& run, EmailId id) {
    for (const auto& t : run.topics->clusters)
        if (std::find(t.email_ids.begin(), t.email_ids.end(), id) != t.email_ids.end()) return t.cluster_id;
    return -1;
}

// Criterion 1: default config, topic cut at k=2.
Outcome topic_phase() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    Run run = create_run(parse_csv(testing::fixture("table1.csv")), PipelineConfig{});
    auto ws = make_workspace(run);
    run_topics(run, ws, CutRule{CutK{2}, run.config.max_auto_k}, run.config.topic_linkage);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto pred = topic_partition(run);
    const double rand20 = rand_index(pred, restrict_gold(gold("table1_topics.csv"), pred));
    std::set<EmailId> table_rows;
    for (auto id : pred.ids)
        if (id != 11 && id != 12) table_rows.insert(id);
    auto pred18 = restrict_to(pred, table_rows);
    const double rand18 = rand_index(pred18, restrict_gold(gold("table1_topics.csv"), pred18));
    o.require(rand20 >= 0.9, "Rand >= 0.9");
    o.require(secs < 5.0, "runtime < 5 s");
    o.note("Rand(20 emails)=" + fmt(rand20) + " Rand(18 table rows)=" + fmt(rand18) + " runtime=" + fmt(secs) + "s");
    return o;
}

Run assigned_run() {
    Run run = create_run(testing::table1(), PipelineConfig{});
    assign_topics(run, gold("table1_topics.csv"));
    return run;
}

// Criterion 2: instance variants on the mission (k=2) and meeting (k=4) topics.
Outcome instance_phase() {
    Outcome o;
    const auto g = gold("table1_instances.csv");
    double rand_iii[2] = {0, 0}, rand_i[2] = {0, 0};
    bool exact[2] = {false, false};
    for (auto variant : {InstanceVariant::body_subject_time, InstanceVariant::body}) {
        Run run = assigned_run();
        auto ws = make_workspace(run);
        const int topics[2] = {topic_of(run, 1), topic_of(run, 5)};
        const int ks[2] = {2, 4};
        for (int i = 0; i < 2; ++i) {
            run_instances(run, ws, topics[i], CutRule{CutK{ks[i]}, 10}, variant, run.config.instance_linkage);
            auto pred = instance_partition(run, topics[i]);
            auto gp = restrict_gold(g, pred);
            double r = rand_index(pred, gp);
            if (variant == InstanceVariant::body_subject_time) {
                rand_iii[i] = r;
                exact[i] = pred.same_partition(gp);
            } else {
                rand_i[i] = r;
            }
        }
    }
    const char* names[2] = {"mission", "meeting"};
    for (int i = 0; i < 2; ++i) {
        o.require(rand_iii[i] >= 0.9, std::string(names[i]) + " Rand(iii) >= 0.9");
        o.require(rand_iii[i] >= rand_i[i], std::string(names[i]) + " Rand(iii) >= Rand(i)");
        o.note(std::string(names[i]) + ": Rand(iii)=" + fmt(rand_iii[i]) + " Rand(i)=" + fmt(rand_i[i]) +
               (exact[i] ? " exact" : " not exact"));
    }
    return o;
}

// Criterion 3: k=4 from the seed instance (20..23) on the mission topic.
Outcome activity_phase() {
    Outcome o;
    Run run = assigned_run();
    auto ws = make_workspace(run);
    const int mission = topic_of(run, 1);
    run_instances(run, ws, mission, CutRule{CutK{2}, 10}, InstanceVariant::body_subject_time, Linkage::complete);
    int seed = 0;
    for (const auto& inst : run.instances.at(mission).instances)
        if (inst.email_ids == std::vector<EmailId>{20, 21, 22, 23}) seed = inst.instance_id;
    o.require(seed != 0, "seed instance (20,21,22,23) exists");
    if (seed == 0) return o;

    ActivityOptions opt;
    opt.k = 4;
    opt.seed_instance = seed;
    run_activities(run, ws, mission, opt);
    auto pred = activity_partition(run, mission);
    auto gp = restrict_gold(gold("table1_activities.csv"), pred);
    const double p = purity(pred, gp);
    const int est = run.activities.at(mission).stats.k;
    o.require(p >= 0.8, "purity >= 0.8");
    o.require(est == 4, "estimate_k == 4");
    o.note("purity=" + fmt(p) + " estimate_k=" + std::to_string(est) +
           (pred.same_partition(gp) ? " exact" : " not exact"));
    return o;
}

// Criterion 4: labels from file, export, DFG and XES structure.
Outcome end_to_end() {
    Outcome o;
    Run run = testing::labeled_run();
    const int mission = topic_of(run, 1);
    auto log = build_event_log(run, mission);

    std::ostringstream csv;
    write_event_csv(log, csv);
    std::istringstream csv_in(csv.str());
    auto from_csv = read_event_csv(csv_in);
    std::set<int> cases;
    bool complete = true;
    for (const auto& r : from_csv.records) {
        cases.insert(r.case_id);
        complete = complete && r.lifecycle == "complete";
    }
    o.require(cases.size() == 2, "CSV has 2 cases");
    o.require(from_csv.records.size() == 9, "CSV has 9 events");
    o.require(complete, "CSV lifecycle all complete");

    std::ostringstream xes;
    write_xes(log, xes);
    auto errors = testing::check_xes(xes.str());
    o.require(errors.empty(), "XES structure" + (errors.empty() ? std::string() : " (" + errors.front() + ")"));
    boost::property_tree::ptree doc;
    std::istringstream xin(xes.str());
    boost::property_tree::read_xml(xin, doc);
    int traces = 0, events = 0, completes = 0;
    for (const auto& [name, trace] : doc.get_child("log")) {
        if (name != "trace") continue;
        ++traces;
        for (const auto& [ename, event] : trace) {
            if (ename != "event") continue;
            ++events;
            for (const auto& [tag, a] : event)
                if (a.get<std::string>("<xmlattr>.key", "") == "lifecycle:transition" &&
                    a.get<std::string>("<xmlattr>.value", "") == "complete")
                    ++completes;
        }
    }
    o.require(traces == 2 && events == 9 && completes == 9, "XES has 2 traces, 9 complete events");

    auto g = mine_dfg(log);
    using E = std::pair<std::string, std::string>;
    const std::string s = "submit demand", q = "request information", r = "respond information",
                      a = "accept demand or refuse demand";
    std::set<E> edges;
    int self_loops = 0;
    for (const auto& [e, n] : g.edges) {
        edges.insert(e);
        if (e.first == e.second) self_loops += n;
    }
    const std::set<E> expect{{s, q}, {q, r}, {r, a}, {a, a}};
    o.require(edges == expect, "DFG edges are the chain plus the accept self-loop");
    o.require(self_loops == 1 && g.edges.count({a, a}), "one accept self-loop");
    o.note("cases=" + std::to_string(cases.size()) + " events=" + std::to_string(log.records.size()) +
           " dfg_edges=" + std::to_string(g.edges.size()));
    return o;
}

// Criterion 5: agglomerative engine against the brute-force reference.
Outcome agglomerative_reference() {
    Outcome o;
    std::mt19937 rng(5005);
    int checked = 0;
    for (Linkage linkage : {Linkage::single, Linkage::complete, Linkage::average})
        for (int round = 0; round < 200; ++round) {
            const std::size_t n = 1 + rng() % 8;
            auto d = testing::random_matrix(rng, n);
            auto dend = agglomerative(d, linkage);
            auto ref = testing::brute_force_agglomerative(d, linkage);
            bool same = true;
            for (std::size_t k = 1; k <= n; ++k)
                same = same && testing::sorted_groups(cut(dend, CutK{static_cast<int>(k)})) == ref.partitions[n - k];
            o.require(same, std::string(to_string(linkage)) + " instance " + std::to_string(round));
            ++checked;
        }
    o.note(std::to_string(checked) + " instances");
    return o;
}

std::vector<EmailFeatures> random_features(std::mt19937& rng, int n) {
    static const std::vector<std::string> words = {"budget", "meeting", "mission", "travel", "report", "review",
                                                   "invoice", "agenda", "room", "summer", "school", "paper"};
    Corpus c;
    for (int i = 0; i < n; ++i) {
        Email e;
        e.id = i + 1;
        e.sender = "u" + std::to_string(rng() % 4) + "@x.org";
        e.receivers = {"u" + std::to_string(rng() % 4) + "@x.org"};
        for (unsigned k = rng() % 3; k > 0; --k) e.subject += words[rng() % words.size()] + " ";
        for (unsigned k = rng() % 8; k > 0; --k) e.body += words[rng() % words.size()] + " ";
        e.timestamp = Timestamp{std::chrono::seconds{1'450'000'000 + static_cast<long long>(rng() % 5'000'000)}};
        c.emails.push_back(e);
    }
    CleansingConfig cfg;
    auto s = tfidf_normalize(build_term_matrix(c, Field::subject, cfg));
    auto b = apply_subject_boost(tfidf_normalize(build_term_matrix(c, Field::body, cfg)), c, BoostConfig{}, cfg);
    return make_features(c.emails, s, b);
}

// Criterion 6: distance axioms, complete-linkage monotonicity, k-means objective.
Outcome properties() {
    Outcome o;
    std::mt19937 rng(6006);
    std::uniform_real_distribution<double> u(0, 1);
    auto f = random_features(rng, 60);
    int bad_axioms = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto& a = f[rng() % f.size()];
        const auto& b = f[rng() % f.size()];
        DistanceSpec spec;
        spec.w_subject = u(rng);
        spec.w_body = u(rng);
        spec.w_time = rng() % 2 ? u(rng) : 0.0;
        spec.w_participants = rng() % 2 ? u(rng) : 0.0;
        spec.t_max = std::chrono::seconds{1 + static_cast<long long>(rng() % 3'000'000)};
        double ab = email_distance(a, b, spec), ba = email_distance(b, a, spec);
        if (ab != ba || ab < 0 || ab > 1 || email_distance(a, a, spec) != 0.0) ++bad_axioms;
    }
    o.require(bad_axioms == 0, "distance axioms (" + std::to_string(bad_axioms) + " violations)");

    int non_monotone = 0;
    for (int round = 0; round < 200; ++round) {
        auto dend = agglomerative(testing::random_metric(rng, 2 + rng() % 20), Linkage::complete);
        for (std::size_t m = 1; m < dend.merges.size(); ++m)
            if (dend.merges[m].height < dend.merges[m - 1].height) ++non_monotone;
    }
    o.require(non_monotone == 0, "complete-linkage heights monotone");

    int increases = 0;
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 5 + rng() % 60, dims = 1 + rng() % 6;
        DenseMatrix pts(n, dims);
        for (auto& x : pts.data) x = u(rng);
        KMeansConfig cfg;
        cfg.k = 1 + static_cast<int>(rng() % std::min<std::size_t>(n, 8));
        cfg.initial_centroids = DenseMatrix(static_cast<std::size_t>(cfg.k), dims);
        for (auto& x : cfg.initial_centroids.data) x = u(rng);
        auto r = kmeans(pts, cfg);
        for (std::size_t i = 1; i < r.objective.size(); ++i)
            if (r.objective[i] > r.objective[i - 1] * (1 + 1e-12) + 1e-15) ++increases;
    }
    o.require(increases == 0, "k-means objective non-increasing");
    o.note("1000 pairs, 200 metrics, 100 k-means runs");
    return o;
}

// Criterion 7: hand-computed TF-IDF and the pair-counting oracle.
Outcome tfidf_and_metrics() {
    Outcome o;
    const double ln2 = std::log(2.0);
    auto mail = [](EmailId id, std::string subject, std::string body) {
        Email e;
        e.id = id;
        e.sender = "a@x.org";
        e.receivers = {"b@x.org"};
        e.subject = std::move(subject);
        e.body = std::move(body);
        return e;
    };
    CleansingConfig cfg;
    Corpus c;
    c.emails = {mail(1, "cherry", "apple apple cherry"), mail(2, "other", "banana")};
    auto counts = build_term_matrix(c, Field::body, cfg);
    auto w = tfidf_weight(counts);
    auto n = tfidf_normalize(counts);
    auto b = apply_subject_boost(n, c, BoostConfig{}, cfg);
    auto near = [](double x, double y) { return std::abs(x - y) < 1e-9; };
    o.require(near(w.at(0, "apple"), 2 * ln2) && near(w.at(0, "cherry"), ln2) && near(w.at(1, "banana"), ln2),
              "raw tf-idf");
    o.require(near(n.at(0, "apple"), 2 / std::sqrt(5.0)) && near(n.at(0, "cherry"), 1 / std::sqrt(5.0)) &&
                  near(n.at(1, "banana"), 1.0),
              "normalized tf-idf");
    o.require(near(b.at(0, "apple"), 1 / std::sqrt(2.0)) && near(b.at(0, "cherry"), 1 / std::sqrt(2.0)),
              "subject boost");
    Corpus c2;
    c2.emails = {mail(1, "", "apple banana banana banana"), mail(2, "", "banana cherry cherry")};
    auto w2 = tfidf_weight(build_term_matrix(c2, Field::body, cfg));
    o.require(w2.at(0, "banana") == 0.0 && near(w2.at(1, "cherry"), 2 * ln2), "shared term gets zero weight");

    std::mt19937 rng(7007);
    int mismatches = 0;
    for (int round = 0; round < 100; ++round) {
        const std::size_t m = 1 + rng() % 40;
        std::vector<int> p(m), g(m);
        const unsigned kp = 1 + rng() % 6, kg = 1 + rng() % 6;
        for (std::size_t i = 0; i < m; ++i) {
            p[i] = static_cast<int>(rng() % kp);
            g[i] = static_cast<int>(rng() % kg);
        }
        std::vector<EmailId> ids;
        for (std::size_t i = 0; i < m; ++i) ids.push_back(static_cast<EmailId>(2 * i + 1));
        auto pred = testing::labeling(ids, p), gold = testing::labeling(ids, g);
        auto orc = testing::pair_oracle(p, g);
        if (std::abs(rand_index(pred, gold) - orc.rand) > 1e-12 ||
            std::abs(pairwise_f_measure(pred, gold) - orc.f) > 1e-12 ||
            std::abs(purity(pred, gold) - testing::purity_oracle(p, g)) > 1e-12)
            ++mismatches;
    }
    o.require(mismatches == 0, "metrics vs pair-counting oracle (" + std::to_string(mismatches) + " mismatches)");
    o.note("100 random labelings");
    return o;
}

// Criterion 8: byte-identical write-read-write round trips.
Outcome round_trips() {
    Outcome o;
    auto corpus = testing::table1();
    std::ostringstream c1;
    write_csv(corpus, c1);
    std::istringstream cin1(c1.str());
    std::ostringstream c2;
    write_csv(parse_csv(cin1), c2);
    o.require(c1.str() == c2.str(), "corpus CSV");

    Run run = testing::labeled_run();
    const auto r1 = dump_run(run);
    o.require(dump_run(parse_run(r1)) == r1, "run JSON");

    auto log = build_event_log(run, topic_of(run, 1));
    std::ostringstream e1;
    write_event_csv(log, e1);
    std::istringstream ein(e1.str());
    std::ostringstream e2;
    write_event_csv(read_event_csv(ein), e2);
    o.require(e1.str() == e2.str(), "event-log CSV");
    o.note("corpus " + std::to_string(c1.str().size()) + " B, run " + std::to_string(r1.size()) + " B, events " +
           std::to_string(e1.str().size()) + " B");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 topic phase", topic_phase},
        {"2 instance phase", instance_phase},
        {"3 activity phase", activity_phase},
        {"4 end-to-end export", end_to_end},
        {"5 agglomerative vs brute force", agglomerative_reference},
        {"6 distance, linkage and k-means properties", properties},
        {"7 tf-idf and quality oracles", tfidf_and_metrics},
        {"8 round trips", round_trips},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
