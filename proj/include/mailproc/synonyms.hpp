#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "mailproc/textprep.hpp"

namespace mailproc {

// term -> synset key. Terms absent from the table stand for themselves.
struct SynonymTable {
    std::map<std::string, std::string> entries;

    const std::string& key_of(const std::string& term) const;
    bool operator==(const SynonymTable&) const = default;
};

// `term<TAB>synset_key` per line; '#' comments and blank lines ignored.
SynonymTable load_synonyms(const std::filesystem::path& path);
std::filesystem::path default_synonyms_path();

/// Sums the columns that share a synset key into one column named by the key
/// and re-normalizes rows. The vocabulary never grows.
TermMatrix fold_synonyms(const TermMatrix& m, const SynonymTable& table);

}  // namespace mailproc
