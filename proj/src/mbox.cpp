#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "mailproc/errors.hpp"
#include "mailproc/ingest.hpp"

// mbox (RFC 4155) reading. Only the headers needed for an Email are kept;
// In-Reply-To, References and every other threading hint are dropped here.

namespace mailproc {

namespace {

struct RawMessage {
    std::vector<std::string> lines;
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

using Headers = std::vector<std::pair<std::string, std::string>>;

std::optional<std::string> header(const Headers& h, std::string_view name) {
    for (const auto& [k, v] : h)
        if (k == name) return v;
    return std::nullopt;
}

// Returns nullopt when the header block never terminates (truncated message)
// or contains a line that is neither a field nor a continuation.
std::optional<std::pair<Headers, std::size_t>> parse_headers(const std::vector<std::string>& lines,
                                                             std::size_t first) {
    Headers headers;
    for (std::size_t i = first; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty()) return std::make_pair(std::move(headers), i + 1);
        if (line[0] == ' ' || line[0] == '\t') {
            if (headers.empty()) return std::nullopt;
            headers.back().second += " " + trim(line);
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos || colon == 0) return std::nullopt;
        if (line.substr(0, colon).find_first_of(" \t") != std::string::npos) return std::nullopt;
        headers.emplace_back(lower(trim(line.substr(0, colon))), trim(line.substr(colon + 1)));
    }
    return std::nullopt;
}

std::vector<std::string> split_addresses(std::string_view value) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    int angle = 0;
    auto flush = [&] {
        auto item = trim(cur);
        cur.clear();
        if (item.empty()) return;
        auto lt = item.find('<');
        auto gt = item.find('>', lt == std::string::npos ? 0 : lt);
        if (lt != std::string::npos && gt != std::string::npos) item = trim(item.substr(lt + 1, gt - lt - 1));
        if (!item.empty()) out.push_back(item);
    };
    for (char c : value) {
        if (c == '"') quoted = !quoted;
        if (!quoted && c == '<') ++angle;
        if (!quoted && c == '>') --angle;
        if (c == ',' && !quoted && angle == 0) {
            flush();
            continue;
        }
        cur += c;
    }
    flush();
    return out;
}

std::string decode_quoted_printable(std::string_view in) {
    std::string out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == '=' && i + 1 < in.size() && in[i + 1] == '\n') {
            ++i;
        } else if (in[i] == '=' && i + 2 < in.size() && std::isxdigit(static_cast<unsigned char>(in[i + 1])) &&
                   std::isxdigit(static_cast<unsigned char>(in[i + 2]))) {
            out += static_cast<char>(std::stoi(std::string(in.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            out += in[i];
        }
    }
    return out;
}

std::string decode_base64(std::string_view in) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    int bits = 0, acc = 0;
    for (char c : in) {
        int v = value(c);
        if (v < 0) continue;
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out += static_cast<char>((acc >> bits) & 0xFF);
        }
    }
    return out;
}

std::string strip_tags(std::string_view html) {
    std::string out;
    bool in_tag = false;
    for (char c : html) {
        if (c == '<') in_tag = true;
        else if (c == '>' && in_tag) {
            in_tag = false;
            out += ' ';
        } else if (!in_tag) out += c;
    }
    return out;
}

std::string param(std::string_view content_type, std::string_view name) {
    auto lc = lower(content_type);
    auto pos = lc.find(std::string(name) + "=");
    if (pos == std::string::npos) return {};
    auto v = std::string(content_type.substr(pos + name.size() + 1));
    if (!v.empty() && v[0] == '"') {
        auto end = v.find('"', 1);
        return v.substr(1, end == std::string::npos ? std::string::npos : end - 1);
    }
    auto end = v.find_first_of("; \t");
    return v.substr(0, end);
}

std::string decode_body(const Headers& headers, std::string body) {
    auto ctype = header(headers, "content-type").value_or("text/plain");
    auto encoding = lower(header(headers, "content-transfer-encoding").value_or(""));
    auto lctype = lower(ctype);

    if (lctype.starts_with("multipart/")) {
        auto boundary = param(ctype, "boundary");
        if (boundary.empty()) return body;
        std::vector<std::string> lines;
        std::istringstream ss(body);
        for (std::string l; std::getline(ss, l);) lines.push_back(l);
        const std::string delim = "--" + boundary;
        std::optional<std::string> fallback;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i] != delim) continue;
            auto parsed = parse_headers(lines, i + 1);
            if (!parsed) break;
            std::string part;
            std::size_t j = parsed->second;
            for (; j < lines.size() && !lines[j].starts_with(delim); ++j) part += lines[j] + "\n";
            auto decoded = decode_body(parsed->first, part);
            auto pt = lower(header(parsed->first, "content-type").value_or("text/plain"));
            if (pt.starts_with("text/plain")) return decoded;
            if (!fallback && (pt.starts_with("text/") || pt.starts_with("multipart/"))) fallback = decoded;
            i = j - 1;
        }
        return fallback.value_or(std::string{});
    }

    if (encoding == "quoted-printable") body = decode_quoted_printable(body);
    else if (encoding == "base64") body = decode_base64(body);
    if (lctype.starts_with("text/html")) body = strip_tags(body);
    return body;
}

std::optional<Email> to_email(const RawMessage& msg) {
    auto parsed = parse_headers(msg.lines, 0);
    if (!parsed) return std::nullopt;
    const auto& [headers, body_start] = *parsed;

    auto from = header(headers, "from");
    auto date = header(headers, "date");
    if (!from || !date) return std::nullopt;
    auto senders = split_addresses(*from);
    if (senders.size() != 1 || !plausible_address(senders[0])) return std::nullopt;
    auto ts = parse_rfc2822_date(*date);
    if (!ts) return std::nullopt;

    std::vector<std::string> receivers;
    for (const char* key : {"to", "cc"})
        for (const auto& [k, v] : headers)
            if (k == key)
                for (auto& a : split_addresses(v)) receivers.push_back(std::move(a));
    if (receivers.empty()) return std::nullopt;

    std::string body;
    for (std::size_t i = body_start; i < msg.lines.size(); ++i) {
        std::string_view line = msg.lines[i];
        // mboxrd unescaping: ">From " -> "From ", ">>From " -> ">From ".
        auto gt = line.find_first_not_of('>');
        if (gt != std::string_view::npos && gt > 0 && line.substr(gt).starts_with("From ")) line.remove_prefix(1);
        body += line;
        body += '\n';
    }
    while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();

    Email e;
    e.sender = senders[0];
    e.receivers = std::move(receivers);
    e.subject = header(headers, "subject").value_or("");
    e.body = trim(decode_body(headers, body));
    e.timestamp = *ts;
    return e;
}

}  // namespace

Corpus parse_mbox(std::istream& in, std::string source) {
    std::vector<RawMessage> messages;
    bool previous_blank = true;
    bool in_headers = false;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // A separator inside an unterminated header block means the previous
        // message was cut off mid-header.
        if (line.starts_with("From ") && (previous_blank || in_headers)) {
            messages.emplace_back();
            in_headers = true;
        } else if (!messages.empty()) {
            messages.back().lines.push_back(line);
            if (line.empty()) in_headers = false;
        }
        previous_blank = line.empty();
    }

    Corpus corpus;
    corpus.source_descriptor = std::move(source);
    for (const auto& m : messages) {
        auto e = to_email(m);
        if (!e) {
            ++corpus.skipped_messages;
            continue;
        }
        e->id = static_cast<EmailId>(corpus.emails.size()) + 1;
        corpus.emails.push_back(std::move(*e));
    }
    validate_corpus(corpus);
    return corpus;
}

Corpus parse_mbox(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_mbox(in, path.string());
}

}  // namespace mailproc
