#include "mailproc/synonyms.hpp"

#include <fstream>
#include <set>

#include "mailproc/errors.hpp"

namespace mailproc {

const std::string& SynonymTable::key_of(const std::string& term) const {
    auto it = entries.find(term);
    return it == entries.end() ? term : it->second;
}

SynonymTable load_synonyms(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synonym table " + path.string());
    SynonymTable t;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected term<TAB>synset_key");
        t.entries[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return t;
}

std::filesystem::path default_synonyms_path() { return std::filesystem::path(MAILPROC_DATA_DIR) / "synonyms.tsv"; }

TermMatrix fold_synonyms(const TermMatrix& m, const SynonymTable& table) {
    std::set<std::string> keys;
    for (const auto& term : m.vocabulary) keys.insert(table.key_of(term));

    TermMatrix out;
    out.field = m.field;
    out.doc_ids = m.doc_ids;
    out.vocabulary.assign(keys.begin(), keys.end());
    std::vector<std::uint32_t> column(m.vocabulary.size());
    for (std::size_t j = 0; j < m.vocabulary.size(); ++j) column[j] = *out.term_index(table.key_of(m.vocabulary[j]));

    out.rows.resize(m.rows.size());
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        std::map<std::uint32_t, double> acc;
        for (const auto& e : m.rows[i]) acc[column[e.term]] += e.weight;
        for (auto [j, w] : acc)
            if (w != 0.0) out.rows[i].push_back({j, w});
    }
    return normalize_rows(out);
}

}  // namespace mailproc
