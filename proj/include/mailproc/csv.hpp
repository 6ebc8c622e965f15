#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mailproc::csv {

using Record = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and line
// breaks. Accepts LF or CRLF record terminators. A trailing empty line is not a record.
std::vector<Record> read_all(std::istream& in);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

// Writes one record terminated by "\n".
void write_record(std::ostream& out, const Record& fields);

}  // namespace mailproc::csv
