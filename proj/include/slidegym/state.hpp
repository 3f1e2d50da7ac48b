#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slidegym/brief.hpp"
#include "slidegym/renderer.hpp"

namespace slidegym {

enum class Phase { Research, Plan, Generate, Refine, Done };

std::string_view to_string(Phase phase);  // lowercase names
std::optional<Phase> phase_from_string(std::string_view s);

struct ResearchRecord {
    std::string query_or_url;
    std::string result;
    bool is_url = false;

    bool operator==(const ResearchRecord&) const = default;
};

struct OutlineEntry {
    std::string title;
    std::vector<std::string> bullet_points;

    bool operator==(const OutlineEntry&) const = default;
};

/// Full episode state. slides_html / slides_png / slide_specs stay aligned:
/// one entry each per slide, with unrendered PNGs as nullopt.
struct EnvState {
    SlideBrief brief;
    std::vector<ResearchRecord> research_context;
    std::vector<OutlineEntry> outline;
    std::vector<std::string> slides_html;
    std::vector<std::optional<std::string>> slides_png;
    std::string theme = "default";
    Phase phase = Phase::Research;
    bool edit_mode = false;
    std::vector<std::string> original_slides_html;

    // Episode bookkeeping.
    std::string episode_id;
    int step_count = 0;
    int step_budget = 35;
    bool terminated = false;
    double cumulative_reward = 0.0;

    // Source specs for re-rendering (set_theme, edit_slide); parallel to
    // slides_html.
    std::vector<SlideSpec> slide_specs;

    int slide_count() const { return static_cast<int>(slides_html.size()); }
};

/// One action: a tool name from the closed 14-name set plus its parameters.
struct ToolCall {
    std::string tool;
    nlohmann::json params = nlohmann::json::object();
};

/// The 14 tool names, in the documented order.
const std::vector<std::string>& tool_names();
bool is_known_tool(std::string_view name);

struct Observation {
    std::string result;
    bool success = false;
    int current_slide_count = 0;
    Phase phase = Phase::Research;
    std::vector<std::string> slide_previews;  // base64 PNG thumbnails

    nlohmann::json to_json() const;
};

}  // namespace slidegym
