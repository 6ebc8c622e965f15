#include "mailproc/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "mailproc/csv.hpp"
#include "mailproc/errors.hpp"

namespace mailproc {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](unsigned char c) { return (c & 0xC0) != 0x80; }));
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Harman's S-stemmer.
std::string s_stem(std::string w) {
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() && std::string_view(w).ends_with(suf); };
    if (ends("ies") && !ends("eies") && !ends("aies")) {
        w.resize(w.size() - 3);
        w += 'y';
    } else if (ends("es") && !ends("aes") && !ends("ees") && !ends("oes")) {
        w.pop_back();
    } else if (ends("s") && !ends("us") && !ends("ss")) {
        w.pop_back();
    }
    return w;
}

}  // namespace

void CleansingConfig::validate() const {
    if (min_token_length < 1) throw ConfigError("min_token_length must be >= 1", "cleansing.min_token_length");
}

void BoostConfig::validate() const {
    if (!(subject_term_weight >= 1.0))
        throw ConfigError("subject_term_weight must be >= 1", "boost.subject_term_weight");
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stopword list " + path.string());
    std::set<std::string> words;
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && is_space(static_cast<unsigned char>(line.back()))) line.pop_back();
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == '#') continue;
        words.insert(ascii_lower(line.substr(b)));
    }
    return words;
}

std::filesystem::path default_stopwords_path() {
    return std::filesystem::path(MAILPROC_DATA_DIR) / "stopwords_en.txt";
}

CleansingConfig default_cleansing() {
    CleansingConfig cfg;
    cfg.stopwords = load_stopwords(default_stopwords_path());
    return cfg;
}

std::vector<std::string> cleanse(std::string_view text, const CleansingConfig& cfg) {
    std::vector<std::string> tokens;
    auto keep = [&](std::string token) {
        if (token.empty()) return;
        if (cfg.stopwords.count(ascii_lower(token))) return;
        if (cfg.stemming) token = s_stem(std::move(token));
        if (utf8_length(token) < static_cast<std::size_t>(cfg.min_token_length)) return;
        tokens.push_back(std::move(token));
    };

    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) break;
        std::string word(text.substr(start, i - start));
        if (cfg.lowercase) word = ascii_lower(word);

        // Whole-word stopword check first so contractions like "don't" match the list.
        auto b = word.find_first_not_of("\"'()[]{}<>.,;:!?*");
        auto e = word.find_last_not_of("\"'()[]{}<>.,;:!?*");
        if (b == std::string::npos) {
            if (!cfg.remove_punctuation) keep(word);
            continue;
        }
        if (cfg.stopwords.count(ascii_lower(std::string_view(word).substr(b, e - b + 1)))) continue;

        std::string cur;
        for (char ch : word) {
            auto c = static_cast<unsigned char>(ch);
            bool split = (cfg.remove_punctuation && is_ascii_punct(c)) || (cfg.remove_numbers && is_digit(c));
            if (split) {
                keep(std::move(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        keep(std::move(cur));
    }
    return tokens;
}

std::string_view to_string(Field f) { return f == Field::subject ? "subject" : "body"; }

double l2_norm(const SparseRow& row) {
    double s = 0;
    for (const auto& e : row) s += e.weight * e.weight;
    return std::sqrt(s);
}

double dot(const SparseRow& a, const SparseRow& b) {
    double s = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->term < ib->term) ++ia;
        else if (ib->term < ia->term) ++ib;
        else {
            s += ia->weight * ib->weight;
            ++ia;
            ++ib;
        }
    }
    return s;
}

double euclidean(const SparseRow& a, const SparseRow& b) {
    double s = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        double d;
        if (ib == b.end() || (ia != a.end() && ia->term < ib->term)) d = (ia++)->weight;
        else if (ia == a.end() || ib->term < ia->term) d = (ib++)->weight;
        else d = (ia++)->weight - (ib++)->weight;
        s += d * d;
    }
    return std::sqrt(s);
}

std::optional<std::uint32_t> TermMatrix::term_index(std::string_view term) const {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
    if (it == vocabulary.end() || *it != term) return std::nullopt;
    return static_cast<std::uint32_t>(it - vocabulary.begin());
}

double TermMatrix::at(std::size_t row, std::string_view term) const {
    auto j = term_index(term);
    if (!j) return 0.0;
    for (const auto& e : rows.at(row))
        if (e.term == *j) return e.weight;
    return 0.0;
}

std::size_t TermMatrix::row_of(EmailId id) const {
    auto it = std::find(doc_ids.begin(), doc_ids.end(), id);
    if (it == doc_ids.end()) throw NotFound("email " + std::to_string(id) + " not in term matrix");
    return static_cast<std::size_t>(it - doc_ids.begin());
}

std::uint64_t vocabulary_fingerprint(const std::vector<std::string>& vocabulary) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& t : vocabulary) {
        for (unsigned char c : t) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xFF;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t TermMatrix::vocabulary_fingerprint() const { return mailproc::vocabulary_fingerprint(vocabulary); }

TermMatrix build_term_matrix(const Corpus& corpus, Field field, const CleansingConfig& cfg) {
    cfg.validate();
    if (corpus.emails.empty()) throw CorpusError("empty corpus");
    const auto n = static_cast<std::ptrdiff_t>(corpus.emails.size());

    std::vector<std::map<std::string, int>> counts(corpus.emails.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& e = corpus.emails[static_cast<std::size_t>(i)];
        for (auto& tok : cleanse(field == Field::subject ? e.subject : e.body, cfg))
            ++counts[static_cast<std::size_t>(i)][std::move(tok)];
    }

    TermMatrix m;
    m.field = field;
    std::set<std::string> vocab;
    for (const auto& c : counts)
        for (const auto& [term, _] : c) vocab.insert(term);
    m.vocabulary.assign(vocab.begin(), vocab.end());
    m.rows.resize(corpus.emails.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        m.doc_ids.push_back(corpus.emails[i].id);
        for (const auto& [term, k] : counts[i])
            m.rows[i].push_back({*m.term_index(term), static_cast<double>(k)});
    }
    return m;
}

std::vector<double> inverse_document_frequency(const TermMatrix& counts) {
    std::vector<std::size_t> df(counts.vocabulary.size(), 0);
    for (const auto& row : counts.rows)
        for (const auto& e : row)
            if (e.weight > 0) ++df[e.term];
    const double docs = static_cast<double>(counts.rows.size());
    std::vector<double> idf(df.size(), 0.0);
    for (std::size_t j = 0; j < df.size(); ++j)
        idf[j] = df[j] ? std::log(docs / static_cast<double>(df[j])) : 0.0;
    return idf;
}

TermMatrix tfidf_weight(const TermMatrix& counts) {
    auto idf = inverse_document_frequency(counts);
    TermMatrix out = counts;
    for (auto& row : out.rows) {
        SparseRow next;
        for (const auto& e : row) {
            double w = e.weight * idf[e.term];
            if (w != 0.0) next.push_back({e.term, w});
        }
        row = std::move(next);
    }
    return out;
}

TermMatrix normalize_rows(const TermMatrix& m) {
    TermMatrix out = m;
    for (auto& row : out.rows) {
        double norm = l2_norm(row);
        if (norm == 0.0) continue;
        for (auto& e : row) e.weight /= norm;
    }
    return out;
}

TermMatrix tfidf_normalize(const TermMatrix& counts) { return normalize_rows(tfidf_weight(counts)); }

std::set<std::string> subject_terms(const Corpus& corpus, const CleansingConfig& cfg) {
    std::set<std::string> terms;
    for (const auto& e : corpus.emails)
        for (auto& t : cleanse(e.subject, cfg)) terms.insert(std::move(t));
    return terms;
}

TermMatrix apply_subject_boost(const TermMatrix& body, const Corpus& corpus, const BoostConfig& boost,
                               const CleansingConfig& cfg) {
    boost.validate();
    auto terms = subject_terms(corpus, cfg);
    std::vector<bool> boosted(body.vocabulary.size(), false);
    for (std::size_t j = 0; j < body.vocabulary.size(); ++j) boosted[j] = terms.count(body.vocabulary[j]) > 0;

    TermMatrix out = body;
    for (auto& row : out.rows)
        for (auto& e : row)
            if (boosted[e.term]) e.weight *= boost.subject_term_weight;
    return normalize_rows(out);
}

void write_triplets(const TermMatrix& m, std::ostream& out) {
    csv::write_record(out, {"doc_id", "term", "weight"});
    char buf[32];
    for (std::size_t i = 0; i < m.rows.size(); ++i)
        for (const auto& e : m.rows[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", e.weight);
            csv::write_record(out, {std::to_string(m.doc_ids[i]), m.vocabulary[e.term], buf});
        }
}

TextModel fit_text_model(const Corpus& corpus, const CleansingConfig& cfg, const BoostConfig& boost) {
    boost.validate();
    TextModel model;
    model.cleansing = cfg;
    model.boost = boost;
    for (Field f : {Field::subject, Field::body}) {
        auto counts = build_term_matrix(corpus, f, cfg);
        auto& fm = f == Field::subject ? model.subject : model.body;
        fm.vocabulary = counts.vocabulary;
        fm.idf = inverse_document_frequency(counts);
    }
    model.boost_terms = subject_terms(corpus, cfg);
    return model;
}

TermMatrix transform(const TextModel& model, const std::vector<Email>& emails, Field field) {
    const auto& fm = field == Field::subject ? model.subject : model.body;
    TermMatrix m;
    m.field = field;
    m.vocabulary = fm.vocabulary;
    m.rows.resize(emails.size());
    for (std::size_t i = 0; i < emails.size(); ++i) {
        m.doc_ids.push_back(emails[i].id);
        std::map<std::uint32_t, double> counts;
        for (const auto& tok : cleanse(field == Field::subject ? emails[i].subject : emails[i].body, model.cleansing))
            if (auto j = m.term_index(tok)) counts[*j] += 1.0;
        for (auto [j, c] : counts) {
            double w = c * fm.idf[j];
            if (field == Field::body && model.boost_terms.count(fm.vocabulary[j])) w *= model.boost.subject_term_weight;
            if (w != 0.0) m.rows[i].push_back({j, w});
        }
    }
    return normalize_rows(m);
}

}  // namespace mailproc
