#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mailproc/run.hpp"

namespace mailproc {

// The run file is a single JSON document holding everything needed to resume
// a run: corpus, config, fitted text model (including the stopword list),
// synonym table, every phase result and the label store. Keys are sorted so
// the same run always serializes to the same bytes.

nlohmann::json run_to_json(const Run& run);
/// Throws CorpusError when the stored corpus digest does not match the stored
/// emails, Error on structurally invalid files.
Run run_from_json(const nlohmann::json& j);

std::string dump_run(const Run& run);
Run parse_run(const std::string& text);

// Write to a sibling temp file, then rename over the target.
void save_run(const Run& run, const std::filesystem::path& path);
Run load_run(const std::filesystem::path& path);

// Nested {node, height, size, children | email_id} form of a dendrogram.
nlohmann::json dendrogram_tree(const Dendrogram& d);
nlohmann::json quality_to_json(const QualityReport& q);

}  // namespace mailproc
