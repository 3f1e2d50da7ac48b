#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace slidegym {

/// Per-brief scoring targets and the episode step budget.
struct BriefTargets {
    int sections_per_slide = 3;
    int words_per_slide = 60;
    int max_turns = 35;
};

/// The task specification that parameterizes an episode.
struct SlideBrief {
    std::string id;
    std::string topic;
    std::string audience;
    int num_slides = 0;
    double confidence = 1.0;
    nlohmann::json content = nlohmann::json::object();  // nested key/value facts
    std::optional<std::string> theme_hint;
    BriefTargets targets;

    /// Content flattened to plain text (keys and scalar values), for the
    /// grounding metrics and the offline search provider.
    std::string flatten_content() const;
};

struct BriefValidation {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Checks every SlideBrief/BriefTargets invariant; never throws.
BriefValidation validate_brief(const SlideBrief& brief);

struct BriefCatalog {
    std::vector<SlideBrief> briefs;  // sorted by id
    std::string source_path;
    std::vector<std::string> issues;  // unparseable entries, reported not dropped

    const SlideBrief* find(const std::string& id) const;
};

class CatalogError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Load briefs from a directory of *.json files or a single JSON file
/// (one brief object or an array). Throws CatalogError on a missing path
/// or duplicate ids; malformed documents are recorded in issues.
BriefCatalog load_catalog(const std::filesystem::path& path);

SlideBrief brief_from_json(const nlohmann::json& doc, const std::string& fallback_id);
nlohmann::json brief_to_json(const SlideBrief& brief);

}  // namespace slidegym
