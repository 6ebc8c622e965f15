#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mailproc/timeutil.hpp"

namespace mailproc {

using EmailId = std::int64_t;

// One message. Threading headers are never carried.
struct Email {
    EmailId id = 0;
    std::string sender;
    std::vector<std::string> receivers;
    std::string subject;
    std::string body;
    Timestamp timestamp{};

    bool operator==(const Email&) const = default;
};

struct Corpus {
    std::vector<Email> emails;
    std::string source_descriptor;
    // Messages skipped by a lenient reader (mbox only).
    std::size_t skipped_messages = 0;

    const Email& by_id(EmailId id) const;
    bool contains(EmailId id) const;
};

// Header names for each logical column.
struct CsvSchema {
    std::string id_column = "EmailID";
    std::string sender_column = "Sender";
    std::string receiver_column = "Receiver";
    std::string subject_column = "Subject";
    std::string timestamp_column = "Timestamp";
    std::string body_column = "Body";
    char receiver_delimiter = ';';
};

bool plausible_address(std::string_view address);

/// Checks ids are positive and unique, senders plausible, receivers present and
/// timestamps in range. Throws CorpusError listing every duplicate id.
void validate_corpus(const Corpus& corpus);

Corpus parse_csv(std::istream& in, const CsvSchema& schema = {}, std::string source = "<stream>");
Corpus parse_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Emits the header row plus one row per email, in corpus order.
void write_csv(const Corpus& corpus, std::ostream& out, const CsvSchema& schema = {});
void write_csv(const Corpus& corpus, const std::filesystem::path& path, const CsvSchema& schema = {});

/// RFC 4155 mbox reader. Ids are assigned 1..n in message order; malformed
/// messages are skipped and counted in Corpus::skipped_messages. An mbox that
/// yields no message throws CorpusError("empty corpus").
Corpus parse_mbox(std::istream& in, std::string source = "<stream>");
Corpus parse_mbox(const std::filesystem::path& path);

}  // namespace mailproc
