#include "mailproc/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mailproc/csv.hpp"
#include "mailproc/errors.hpp"

namespace mailproc {

void DistanceSpec::validate(const std::string& key_prefix) const {
    auto check = [&](double w, const char* name) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError(std::string(name) + " must be a non-negative number", key_prefix + "." + name);
    };
    check(w_subject, "w_subject");
    check(w_body, "w_body");
    check(w_time, "w_time");
    check(w_participants, "w_participants");
    if (w_subject + w_body + w_time + w_participants <= 0.0)
        throw ConfigError("at least one distance weight must be positive", key_prefix + ".w_body");
    if (t_max.count() <= 0) throw ConfigError("t_max must be positive", key_prefix + ".t_max_seconds");
}

DistanceSpec DistanceSpec::normalized() const {
    validate();
    DistanceSpec out = *this;
    double total = w_subject + w_body + w_time + w_participants;
    out.w_subject /= total;
    out.w_body /= total;
    out.w_time /= total;
    out.w_participants /= total;
    return out;
}

DistanceSpec DistanceSpec::topic_default() { return DistanceSpec{}; }

DistanceSpec DistanceSpec::instance_default() {
    DistanceSpec s;
    s.w_subject = 0.2;
    s.w_body = 0.4;
    s.w_time = 0.4;
    return s;
}

DistanceSpec DistanceSpec::activity_default() {
    DistanceSpec s;
    s.use_synonyms = true;
    return s;
}

std::vector<EmailFeatures> make_features(const std::vector<Email>& emails, const TermMatrix& subject,
                                         const TermMatrix& body) {
    const auto sv = subject.vocabulary_fingerprint();
    const auto bv = body.vocabulary_fingerprint();
    std::vector<EmailFeatures> out;
    out.reserve(emails.size());
    for (const auto& e : emails) {
        EmailFeatures f;
        f.id = e.id;
        f.subject = subject.rows.at(subject.row_of(e.id));
        f.body = body.rows.at(body.row_of(e.id));
        f.subject_vocabulary = sv;
        f.body_vocabulary = bv;
        f.timestamp = e.timestamp;
        f.participants = e.receivers;
        f.participants.push_back(e.sender);
        std::sort(f.participants.begin(), f.participants.end());
        f.participants.erase(std::unique(f.participants.begin(), f.participants.end()), f.participants.end());
        out.push_back(std::move(f));
    }
    return out;
}

double unit_row_distance(const SparseRow& a, const SparseRow& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return 1.0;
    return std::min(1.0, euclidean(a, b) / std::sqrt(2.0));
}

double email_distance(const EmailFeatures& a, const EmailFeatures& b, const DistanceSpec& spec) {
    if (a.subject_vocabulary != b.subject_vocabulary || a.body_vocabulary != b.body_vocabulary)
        throw ContractViolation("email_distance: emails " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                                " use different vocabularies");
    const DistanceSpec w = spec.normalized();
    double d = 0.0;
    if (w.w_subject > 0) d += w.w_subject * unit_row_distance(a.subject, b.subject);
    if (w.w_body > 0) d += w.w_body * unit_row_distance(a.body, b.body);
    if (w.w_time > 0) {
        double dt = std::abs(static_cast<double>((a.timestamp - b.timestamp).count()));
        d += w.w_time * std::min(1.0, dt / static_cast<double>(w.t_max.count()));
    }
    if (w.w_participants > 0) {
        std::vector<std::string> common;
        std::set_intersection(a.participants.begin(), a.participants.end(), b.participants.begin(),
                              b.participants.end(), std::back_inserter(common));
        d += w.w_participants * (common.empty() ? 1.0 : 0.0);
    }
    return std::clamp(d, 0.0, 1.0);
}

DistanceMatrix::DistanceMatrix(std::vector<EmailId> ids) : ids_(std::move(ids)), data_(ids_.size() * ids_.size(), 0.0) {}

std::size_t DistanceMatrix::index_of(EmailId id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw NotFound("email " + std::to_string(id) + " not in distance matrix");
    return static_cast<std::size_t>(it - ids_.begin());
}

DistanceMatrix DistanceMatrix::subset(const std::vector<EmailId>& ids) const {
    DistanceMatrix out(ids);
    std::vector<std::size_t> idx;
    idx.reserve(ids.size());
    for (auto id : ids) idx.push_back(index_of(id));
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) out.set(i, j, (*this)(idx[i], idx[j]));
    return out;
}

DistanceMatrix DistanceMatrix::scaled(double factor) const {
    DistanceMatrix out = *this;
    for (auto& v : out.data_) v *= factor;
    return out;
}

void DistanceMatrix::write_csv(std::ostream& out) const {
    csv::Record header{"id"};
    for (auto id : ids_) header.push_back(std::to_string(id));
    csv::write_record(out, header);
    char buf[32];
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        csv::Record row{std::to_string(ids_[i])};
        for (std::size_t j = 0; j < ids_.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", (*this)(i, j));
            row.emplace_back(buf);
        }
        csv::write_record(out, row);
    }
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace mailproc
