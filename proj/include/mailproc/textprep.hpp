#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mailproc/ingest.hpp"

namespace mailproc {

struct CleansingConfig {
    std::set<std::string> stopwords;
    bool remove_numbers = true;
    bool remove_punctuation = true;
    bool lowercase = true;
    int min_token_length = 2;
    // Plural-stripping stemmer. Off by default so vocabularies match the raw words.
    bool stemming = false;

    void validate() const;
};

// One-token-per-line UTF-8 file; blank lines and lines starting with '#' ignored.
std::set<std::string> load_stopwords(const std::filesystem::path& path);
std::filesystem::path default_stopwords_path();
CleansingConfig default_cleansing();

std::vector<std::string> cleanse(std::string_view text, const CleansingConfig& cfg);

enum class Field { subject, body };
std::string_view to_string(Field f);

struct SparseEntry {
    std::uint32_t term;
    double weight;
    bool operator==(const SparseEntry&) const = default;
};
// Entries sorted by term index, no explicit zeros.
using SparseRow = std::vector<SparseEntry>;

double l2_norm(const SparseRow& row);
double dot(const SparseRow& a, const SparseRow& b);
// Euclidean distance between two sparse rows over the same vocabulary.
double euclidean(const SparseRow& a, const SparseRow& b);

// Document x term matrix. Vocabulary is sorted lexicographically.
struct TermMatrix {
    std::vector<EmailId> doc_ids;
    std::vector<std::string> vocabulary;
    std::vector<SparseRow> rows;
    Field field = Field::body;

    std::optional<std::uint32_t> term_index(std::string_view term) const;
    double at(std::size_t row, std::string_view term) const;
    std::size_t row_of(EmailId id) const;
    // FNV-1a over the vocabulary; two matrices are comparable iff equal.
    std::uint64_t vocabulary_fingerprint() const;
};

std::uint64_t vocabulary_fingerprint(const std::vector<std::string>& vocabulary);

/// Raw occurrence counts of cleansed tokens. Documents are tokenized in parallel.
TermMatrix build_term_matrix(const Corpus& corpus, Field field, const CleansingConfig& cfg);

// ln(D / df_j) per term.
std::vector<double> inverse_document_frequency(const TermMatrix& counts);
// count x idf, without row normalization. Zero products are dropped.
TermMatrix tfidf_weight(const TermMatrix& counts);
// Scales nonzero rows to unit L2 norm.
TermMatrix normalize_rows(const TermMatrix& m);
TermMatrix tfidf_normalize(const TermMatrix& counts);

struct BoostConfig {
    double subject_term_weight = 2.0;
    void validate() const;
};

// Union of the cleansed subject tokens of every email.
std::set<std::string> subject_terms(const Corpus& corpus, const CleansingConfig& cfg);

/// Multiplies body columns whose term occurs in any subject by the boost
/// weight, then re-normalizes rows.
TermMatrix apply_subject_boost(const TermMatrix& body, const Corpus& corpus, const BoostConfig& boost,
                               const CleansingConfig& cfg);

// Debug dump: header `doc_id,term,weight`, one line per nonzero.
void write_triplets(const TermMatrix& m, std::ostream& out);

// What is needed to vectorize an unseen email exactly like the corpus was.
struct FieldModel {
    std::vector<std::string> vocabulary;
    std::vector<double> idf;
};

struct TextModel {
    CleansingConfig cleansing;
    BoostConfig boost;
    FieldModel subject;
    FieldModel body;
    std::set<std::string> boost_terms;
};

TextModel fit_text_model(const Corpus& corpus, const CleansingConfig& cfg, const BoostConfig& boost);

/// Normalized TF-IDF rows for `emails` against the model vocabulary.
/// Out-of-vocabulary tokens are dropped; body rows carry the subject boost.
TermMatrix transform(const TextModel& model, const std::vector<Email>& emails, Field field);

}  // namespace mailproc
