#include "slidegym/brief.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "slidegym/text.hpp"

namespace slidegym {

namespace {

using nlohmann::json;

void flatten_json(const json& node, std::string& out) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            out += key;
            out += ' ';
            flatten_json(value, out);
        }
    } else if (node.is_array()) {
        for (const auto& value : node) flatten_json(value, out);
    } else if (node.is_string()) {
        out += node.get<std::string>();
        out += ' ';
    } else if (!node.is_null()) {
        out += node.dump();
        out += ' ';
    }
}

}  // namespace

std::string SlideBrief::flatten_content() const {
    std::string out;
    flatten_json(content, out);
    return text::trim(out);
}

BriefValidation validate_brief(const SlideBrief& brief) {
    BriefValidation report;
    auto fail = [&report](std::string msg) {
        report.ok = false;
        report.violations.push_back(std::move(msg));
    };

    if (text::trim(brief.topic).empty()) fail("topic empty");
    if (brief.num_slides < 1 || brief.num_slides > 64) fail("num_slides out of range");
    if (!(brief.confidence >= 0.0 && brief.confidence <= 1.0)) fail("confidence out of range");
    if (brief.targets.sections_per_slide < 1) fail("targets.sections_per_slide must be positive");
    if (brief.targets.words_per_slide < 1) fail("targets.words_per_slide must be positive");
    if (brief.targets.max_turns < 1) fail("targets.max_turns must be positive");
    return report;
}

SlideBrief brief_from_json(const json& doc, const std::string& fallback_id) {
    if (!doc.is_object()) throw CatalogError("brief document is not a JSON object");

    SlideBrief brief;
    brief.id = doc.value("id", fallback_id);
    brief.topic = doc.at("topic").get<std::string>();
    brief.audience = doc.value("audience", std::string{});
    brief.num_slides = doc.at("num_slides").get<int>();
    brief.confidence = doc.value("confidence", 1.0);
    brief.content = doc.value("content", json::object());
    if (doc.contains("theme_hint") && doc["theme_hint"].is_string()) {
        brief.theme_hint = doc["theme_hint"].get<std::string>();
    }
    if (doc.contains("targets")) {
        const auto& t = doc["targets"];
        brief.targets.sections_per_slide = t.value("sections_per_slide", brief.targets.sections_per_slide);
        brief.targets.words_per_slide = t.value("words_per_slide", brief.targets.words_per_slide);
        brief.targets.max_turns = t.value("max_turns", brief.targets.max_turns);
    }
    return brief;
}

json brief_to_json(const SlideBrief& brief) {
    json doc{
        {"id", brief.id},
        {"topic", brief.topic},
        {"audience", brief.audience},
        {"num_slides", brief.num_slides},
        {"confidence", brief.confidence},
        {"content", brief.content},
        {"targets",
         {{"sections_per_slide", brief.targets.sections_per_slide},
          {"words_per_slide", brief.targets.words_per_slide},
          {"max_turns", brief.targets.max_turns}}},
    };
    if (brief.theme_hint) doc["theme_hint"] = *brief.theme_hint;
    return doc;
}

const SlideBrief* BriefCatalog::find(const std::string& id) const {
    auto it = std::find_if(briefs.begin(), briefs.end(),
                           [&id](const SlideBrief& b) { return b.id == id; });
    return it == briefs.end() ? nullptr : &*it;
}

namespace {

void load_one_document(const std::filesystem::path& file, BriefCatalog& catalog,
                       std::map<std::string, std::string>& sources) {
    std::ifstream in(file);
    if (!in) {
        catalog.issues.push_back(file.string() + ": unreadable");
        return;
    }

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        catalog.issues.push_back(file.string() + ": " + e.what());
        return;
    }

    auto add = [&](const json& node, const std::string& fallback_id) {
        SlideBrief brief;
        try {
            brief = brief_from_json(node, fallback_id);
        } catch (const std::exception& e) {
            catalog.issues.push_back(file.string() + ": " + e.what());
            return;
        }
        auto [it, inserted] = sources.emplace(brief.id, file.string());
        if (!inserted) {
            throw CatalogError("duplicate brief id '" + brief.id + "' in " + file.string() +
                               " and " + it->second);
        }
        catalog.briefs.push_back(std::move(brief));
    };

    if (doc.is_array()) {
        int idx = 0;
        for (const auto& node : doc) {
            add(node, file.stem().string() + "-" + std::to_string(idx++));
        }
    } else {
        add(doc, file.stem().string());
    }
}

}  // namespace

BriefCatalog load_catalog(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw CatalogError("briefs path does not exist: " + path.string());

    BriefCatalog catalog;
    catalog.source_path = path.string();
    std::map<std::string, std::string> sources;

    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) load_one_document(file, catalog, sources);
    } else {
        load_one_document(path, catalog, sources);
    }

    std::sort(catalog.briefs.begin(), catalog.briefs.end(),
              [](const SlideBrief& a, const SlideBrief& b) { return a.id < b.id; });
    return catalog;
}

}  // namespace slidegym
