#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mailproc/errors.hpp"
#include "mailproc/textprep.hpp"
#include "support.hpp"

using namespace mailproc;

namespace {

Email mail(EmailId id, std::string subject, std::string body) {
    Email e;
    e.id = id;
    e.sender = "a@x.org";
    e.receivers = {"b@x.org"};
    e.subject = std::move(subject);
    e.body = std::move(body);
    return e;
}

Corpus two_docs(std::string s1, std::string b1, std::string s2, std::string b2) {
    Corpus c;
    c.emails = {mail(1, std::move(s1), std::move(b1)), mail(2, std::move(s2), std::move(b2))};
    return c;
}

CleansingConfig no_stopwords() { return CleansingConfig{}; }

const double kLn2 = 0.69314718055994530942;

}  // namespace

TEST_CASE("cleanse lowercases, splits on punctuation and digits, drops short tokens") {
    auto cfg = no_stopwords();
    CHECK(cleanse("Hello, World! x 2016-06 room42b", cfg) == std::vector<std::string>{"hello", "world", "room"});
    cfg.remove_numbers = false;
    CHECK(cleanse("room42b 2016", cfg) == std::vector<std::string>{"room42b", "2016"});
    cfg.lowercase = false;
    CHECK(cleanse("Room", cfg) == std::vector<std::string>{"Room"});
}

TEST_CASE("cleanse removes stopwords, including contractions") {
    auto cfg = default_cleansing();
    CHECK(!cfg.stopwords.empty());
    auto toks = cleanse("I don't think the meeting is TODAY.", cfg);
    CHECK(std::find(toks.begin(), toks.end(), "the") == toks.end());
    CHECK(std::find(toks.begin(), toks.end(), "don") == toks.end());
    CHECK(std::find(toks.begin(), toks.end(), "meeting") != toks.end());
}

TEST_CASE("cleanse with stemming strips plurals") {
    auto cfg = no_stopwords();
    cfg.stemming = true;
    CHECK(cleanse("meetings studies classes bus", cfg) == std::vector<std::string>{"meeting", "study", "classe", "bus"});
}

TEST_CASE("cleanse min length counts code points") {
    auto cfg = no_stopwords();
    cfg.min_token_length = 2;
    CHECK(cleanse("\xc3\xa9 \xc3\xa9t", cfg) == std::vector<std::string>{"\xc3\xa9t"});
    cfg.min_token_length = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("term matrix counts and sorted vocabulary") {
    auto c = two_docs("", "apple apple banana", "", "banana cherry");
    auto m = build_term_matrix(c, Field::body, no_stopwords());
    CHECK(m.vocabulary == std::vector<std::string>{"apple", "banana", "cherry"});
    CHECK(m.at(0, "apple") == 2.0);
    CHECK(m.at(0, "banana") == 1.0);
    CHECK(m.at(0, "cherry") == 0.0);
    CHECK(m.at(1, "cherry") == 1.0);
    CHECK(m.row_of(2) == 1);
    CHECK_THROWS_AS(m.row_of(3), NotFound);
}

TEST_CASE("tf-idf on two documents matches hand computation") {
    // d1 = apple x2, cherry; d2 = banana. Every term occurs in one document, idf = ln 2.
    auto c = two_docs("", "apple apple cherry", "", "banana");
    auto counts = build_term_matrix(c, Field::body, no_stopwords());
    auto idf = inverse_document_frequency(counts);
    for (double v : idf) CHECK(v == doctest::Approx(kLn2).epsilon(1e-12));

    auto w = tfidf_weight(counts);
    CHECK(std::abs(w.at(0, "apple") - 2 * kLn2) < 1e-9);
    CHECK(std::abs(w.at(0, "cherry") - kLn2) < 1e-9);
    CHECK(std::abs(w.at(1, "banana") - kLn2) < 1e-9);

    auto n = tfidf_normalize(counts);
    CHECK(std::abs(n.at(0, "apple") - 2 / std::sqrt(5.0)) < 1e-9);
    CHECK(std::abs(n.at(0, "cherry") - 1 / std::sqrt(5.0)) < 1e-9);
    CHECK(std::abs(n.at(1, "banana") - 1.0) < 1e-9);
}

TEST_CASE("a term in every document gets zero weight and is dropped") {
    // d1 = apple, banana x3; d2 = banana, cherry x2.
    auto c = two_docs("", "apple banana banana banana", "", "banana cherry cherry");
    auto w = tfidf_weight(build_term_matrix(c, Field::body, no_stopwords()));
    CHECK(w.rows[0].size() == 1);
    CHECK(w.at(0, "banana") == 0.0);
    CHECK(std::abs(w.at(1, "cherry") - 2 * kLn2) < 1e-9);
    auto n = normalize_rows(w);
    CHECK(std::abs(n.at(0, "apple") - 1.0) < 1e-9);
    CHECK(std::abs(n.at(1, "cherry") - 1.0) < 1e-9);
}

TEST_CASE("subject boost doubles subject terms before normalizing") {
    // Body d1 = apple x2, cherry; cherry appears in a subject.
    // Boosted: apple 2 ln2, cherry 2 ln2 -> both 1/sqrt(2).
    auto c = two_docs("cherry", "apple apple cherry", "other", "banana");
    auto cfg = no_stopwords();
    auto body = tfidf_normalize(build_term_matrix(c, Field::body, cfg));
    auto boosted = apply_subject_boost(body, c, BoostConfig{}, cfg);
    CHECK(std::abs(boosted.at(0, "apple") - 1 / std::sqrt(2.0)) < 1e-9);
    CHECK(std::abs(boosted.at(0, "cherry") - 1 / std::sqrt(2.0)) < 1e-9);
    CHECK(std::abs(boosted.at(1, "banana") - 1.0) < 1e-9);

    // Weight 3: apple 2, cherry 3 (times ln2) -> 2/sqrt(13), 3/sqrt(13).
    auto b3 = apply_subject_boost(body, c, BoostConfig{3.0}, cfg);
    CHECK(std::abs(b3.at(0, "apple") - 2 / std::sqrt(13.0)) < 1e-9);
    CHECK(std::abs(b3.at(0, "cherry") - 3 / std::sqrt(13.0)) < 1e-9);

    CHECK_THROWS_AS(BoostConfig{0.5}.validate(), ConfigError);
}

TEST_CASE("transform with the fitted model reproduces the corpus rows") {
    auto c = testing::table1();
    auto cfg = default_cleansing();
    auto model = fit_text_model(c, cfg, BoostConfig{});
    auto subject = tfidf_normalize(build_term_matrix(c, Field::subject, cfg));
    auto body = apply_subject_boost(tfidf_normalize(build_term_matrix(c, Field::body, cfg)), c, BoostConfig{}, cfg);
    auto ts = transform(model, c.emails, Field::subject);
    auto tb = transform(model, c.emails, Field::body);
    REQUIRE(ts.rows.size() == subject.rows.size());
    for (std::size_t i = 0; i < ts.rows.size(); ++i) {
        CHECK(euclidean(ts.rows[i], subject.rows[i]) < 1e-12);
        CHECK(euclidean(tb.rows[i], body.rows[i]) < 1e-12);
    }
}

TEST_CASE("transform drops unknown terms") {
    auto c = two_docs("plan", "apple apple cherry", "plan", "banana");
    auto model = fit_text_model(c, no_stopwords(), BoostConfig{});
    auto m = transform(model, {mail(9, "zzz", "kiwi mango")}, Field::body);
    CHECK(m.rows[0].empty());
    auto m2 = transform(model, {mail(9, "zzz", "kiwi apple")}, Field::body);
    REQUIRE(m2.rows[0].size() == 1);
    CHECK(std::abs(m2.rows[0][0].weight - 1.0) < 1e-12);
}

TEST_CASE("normalized rows have unit or zero norm") {
    auto c = testing::table1();
    auto cfg = default_cleansing();
    for (Field f : {Field::subject, Field::body}) {
        auto m = tfidf_normalize(build_term_matrix(c, f, cfg));
        for (const auto& row : m.rows) {
            double n = l2_norm(row);
            CHECK((n == 0.0 || std::abs(n - 1.0) < 1e-12));
        }
    }
}

TEST_CASE("sparse dot and euclidean agree with dense computation") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> a(12, 0.0), b(12, 0.0);
        SparseRow ra, rb;
        for (std::uint32_t j = 0; j < 12; ++j) {
            if (rng() % 2) {
                a[j] = u(rng);
                ra.push_back({j, a[j]});
            }
            if (rng() % 2) {
                b[j] = u(rng);
                rb.push_back({j, b[j]});
            }
        }
        double d = 0, s = 0;
        for (int j = 0; j < 12; ++j) {
            d += a[j] * b[j];
            s += (a[j] - b[j]) * (a[j] - b[j]);
        }
        CHECK(std::abs(dot(ra, rb) - d) < 1e-12);
        CHECK(std::abs(euclidean(ra, rb) - std::sqrt(s)) < 1e-12);
    }
}

TEST_CASE("vocabulary fingerprint separates vocabularies") {
    CHECK(vocabulary_fingerprint({"ab", "c"}) != vocabulary_fingerprint({"a", "bc"}));
    CHECK(vocabulary_fingerprint({"ab", "c"}) == vocabulary_fingerprint({"ab", "c"}));
}

TEST_CASE("triplet dump lists nonzeros") {
    auto c = two_docs("", "apple", "", "banana");
    auto m = build_term_matrix(c, Field::body, no_stopwords());
    std::ostringstream out;
    write_triplets(m, out);
    CHECK(out.str() == "doc_id,term,weight\n1,apple,1\n2,banana,1\n");
}
