#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mailproc/ingest.hpp"
#include "mailproc/textprep.hpp"

namespace mailproc {

// Weights of the composite email distance. Weights need not sum to 1; they are
// normalized before use.
struct DistanceSpec {
    double w_subject = 0.3;
    double w_body = 0.7;
    double w_time = 0.0;
    double w_participants = 0.0;
    std::chrono::seconds t_max = std::chrono::hours(24 * 14);
    bool use_synonyms = false;

    void validate(const std::string& key_prefix = "distance") const;
    DistanceSpec normalized() const;

    static DistanceSpec topic_default();
    static DistanceSpec instance_default();
    static DistanceSpec activity_default();

    bool operator==(const DistanceSpec&) const = default;
};

// Per-email inputs of email_distance: unit-normalized subject and body rows,
// tagged with the vocabulary they index into.
struct EmailFeatures {
    EmailId id = 0;
    SparseRow subject;
    SparseRow body;
    std::uint64_t subject_vocabulary = 0;
    std::uint64_t body_vocabulary = 0;
    Timestamp timestamp{};
    std::vector<std::string> participants;  // sorted, sender plus receivers
};

std::vector<EmailFeatures> make_features(const std::vector<Email>& emails, const TermMatrix& subject,
                                         const TermMatrix& body);

/// Euclidean distance of two unit (or zero) rows mapped into [0,1]:
/// two zero rows -> 0, one zero row -> 1, otherwise |a-b| / sqrt(2) capped at 1.
double unit_row_distance(const SparseRow& a, const SparseRow& b);

/// Weighted sum of subject, body, time and participant distances, in [0,1].
/// Throws ContractViolation when the two emails index different vocabularies.
double email_distance(const EmailFeatures& a, const EmailFeatures& b, const DistanceSpec& spec);

// Dense symmetric matrix with the email id of every row.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::vector<EmailId> ids);

    std::size_t size() const { return ids_.size(); }
    const std::vector<EmailId>& ids() const { return ids_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * ids_.size() + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        data_[i * ids_.size() + j] = v;
        data_[j * ids_.size() + i] = v;
    }
    std::size_t index_of(EmailId id) const;
    double between(EmailId a, EmailId b) const { return (*this)(index_of(a), index_of(b)); }
    DistanceMatrix subset(const std::vector<EmailId>& ids) const;
    DistanceMatrix scaled(double factor) const;
    const std::vector<double>& raw() const { return data_; }

    // Debug dump: header row of ids, then one row per email.
    void write_csv(std::ostream& out) const;

private:
    std::vector<EmailId> ids_;
    std::vector<double> data_;
};

// Row-major dense matrix, used for k-means points and centroids.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    bool operator==(const DenseMatrix&) const = default;
};

double squared_euclidean(std::span<const double> a, std::span<const double> b);

}  // namespace mailproc
