#include "mailproc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mailproc/csv.hpp"
#include "mailproc/errors.hpp"

namespace mailproc {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_receivers(std::string_view field, char delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= field.size()) {
        auto next = field.find(delimiter, start);
        if (next == std::string_view::npos) next = field.size();
        auto part = trim(field.substr(start, next - start));
        if (!part.empty()) out.push_back(std::move(part));
        start = next + 1;
    }
    return out;
}

}  // namespace

const Email& Corpus::by_id(EmailId id) const {
    auto it = std::find_if(emails.begin(), emails.end(), [id](const Email& e) { return e.id == id; });
    if (it == emails.end()) throw NotFound("no email with id " + std::to_string(id));
    return *it;
}

bool Corpus::contains(EmailId id) const {
    return std::any_of(emails.begin(), emails.end(), [id](const Email& e) { return e.id == id; });
}

bool plausible_address(std::string_view address) {
    auto at = address.find('@');
    if (at == std::string_view::npos || address.find('@', at + 1) != std::string_view::npos) return false;
    if (at == 0 || at + 1 == address.size()) return false;
    return address.find_first_of(" \t\r\n<>") == std::string_view::npos;
}

void validate_corpus(const Corpus& corpus) {
    if (corpus.emails.empty()) throw CorpusError("empty corpus");
    std::map<EmailId, int> seen;
    for (const auto& e : corpus.emails) {
        if (e.id <= 0) throw CorpusError("email id must be positive, got " + std::to_string(e.id));
        ++seen[e.id];
    }
    std::vector<EmailId> dups;
    for (auto [id, n] : seen)
        if (n > 1) dups.push_back(id);
    if (!dups.empty()) {
        std::string msg = "duplicate email ids:";
        for (auto id : dups) msg += " " + std::to_string(id);
        throw CorpusError(msg);
    }
    for (const auto& e : corpus.emails) {
        if (!plausible_address(e.sender))
            throw CorpusError("email " + std::to_string(e.id) + ": implausible sender '" + e.sender + "'");
        if (e.receivers.empty()) throw CorpusError("email " + std::to_string(e.id) + ": no receivers");
        if (!in_supported_range(e.timestamp))
            throw CorpusError("email " + std::to_string(e.id) + ": timestamp out of range");
    }
}

Corpus parse_csv(std::istream& in, const CsvSchema& schema, std::string source) {
    auto records = csv::read_all(in);
    if (records.empty()) throw SchemaError("missing header row", schema.id_column);

    const auto& header = records.front();
    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return i;
        throw SchemaError("missing column '" + name + "'", name);
    };
    const std::size_t c_id = column(schema.id_column);
    const std::size_t c_sender = column(schema.sender_column);
    const std::size_t c_receiver = column(schema.receiver_column);
    const std::size_t c_subject = column(schema.subject_column);
    const std::size_t c_ts = column(schema.timestamp_column);
    const std::size_t c_body = column(schema.body_column);
    const std::size_t needed = std::max({c_id, c_sender, c_receiver, c_subject, c_ts, c_body}) + 1;

    Corpus corpus;
    corpus.source_descriptor = std::move(source);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() == 1 && trim(rec[0]).empty()) continue;
        if (rec.size() < needed)
            throw RowError("row " + std::to_string(r) + ": expected at least " + std::to_string(needed) +
                               " fields, got " + std::to_string(rec.size()),
                           r);
        Email e;
        auto id_text = trim(rec[c_id]);
        auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), e.id);
        if (ec != std::errc{} || ptr != id_text.data() + id_text.size() || id_text.empty())
            throw RowError("row " + std::to_string(r) + ": bad email id '" + id_text + "'", r);
        e.sender = trim(rec[c_sender]);
        e.receivers = split_receivers(rec[c_receiver], schema.receiver_delimiter);
        e.subject = rec[c_subject];
        e.body = rec[c_body];
        auto ts = parse_timestamp(rec[c_ts]);
        if (!ts) throw RowError("row " + std::to_string(r) + ": unparseable timestamp '" + rec[c_ts] + "'", r);
        e.timestamp = *ts;
        corpus.emails.push_back(std::move(e));
    }
    validate_corpus(corpus);
    return corpus;
}

Corpus parse_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_csv(in, schema, path.string());
}

void write_csv(const Corpus& corpus, std::ostream& out, const CsvSchema& schema) {
    csv::write_record(out, {schema.id_column, schema.sender_column, schema.receiver_column, schema.subject_column,
                            schema.timestamp_column, schema.body_column});
    for (const auto& e : corpus.emails) {
        std::string receivers;
        for (std::size_t i = 0; i < e.receivers.size(); ++i) {
            if (i) receivers += schema.receiver_delimiter;
            receivers += e.receivers[i];
        }
        csv::write_record(out, {std::to_string(e.id), e.sender, receivers, e.subject, format_timestamp(e.timestamp),
                                e.body});
    }
}

void write_csv(const Corpus& corpus, const std::filesystem::path& path, const CsvSchema& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(corpus, out, schema);
}

}  // namespace mailproc
