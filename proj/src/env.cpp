#include "slidegym/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slidegym/pngcodec.hpp"
#include "slidegym/text.hpp"
#include "slidegym/util.hpp"

namespace slidegym {

using nlohmann::json;

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Research: return "research";
        case Phase::Plan: return "plan";
        case Phase::Generate: return "generate";
        case Phase::Refine: return "refine";
        case Phase::Done: return "done";
    }
    return "unknown";
}

std::optional<Phase> phase_from_string(std::string_view s) {
    for (Phase p : {Phase::Research, Phase::Plan, Phase::Generate, Phase::Refine, Phase::Done}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

const std::vector<std::string>& tool_names() {
    static const std::vector<std::string> kTools = {
        "web_search",    "fetch_url",     "create_outline",    "revise_outline",
        "generate_slide", "edit_slide",   "set_theme",         "get_slide_content",
        "delete_slide",  "reorder_slides", "duplicate_slide",  "insert_slide",
        "review_deck",   "finalize",
    };
    return kTools;
}

bool is_known_tool(std::string_view name) {
    const auto& names = tool_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

json Observation::to_json() const {
    return json{{"result", result},
                {"success", success},
                {"current_slide_count", current_slide_count},
                {"phase", std::string(to_string(phase))},
                {"slide_previews", slide_previews}};
}

json StepInfo::to_json() const {
    return json{{"step_index", step_index},
                {"q_before", q_before},
                {"q_after", q_after},
                {"action_reward", action_reward},
                {"reward_breakdown", breakdown.to_json()}};
}

json StepResult::to_json() const {
    return json{{"observation", observation.to_json()},
                {"reward", reward},
                {"terminated", terminated},
                {"info", info.to_json()}};
}

// ---------------------------------------------------------------------------
// Offline search provider
// ---------------------------------------------------------------------------

namespace {

std::string brief_fact_text(const SlideBrief& brief) {
    std::string facts = brief.flatten_content();
    if (facts.empty()) {
        facts = "Industry analysts covering " + brief.topic +
                " report sustained momentum, strong demand signals, and measurable adoption "
                "across key market segments.";
    }
    return facts;
}

}  // namespace

std::vector<SearchResult> OfflineSearchProvider::search(const std::string& query,
                                                        const EnvState& state) {
    const auto query_words = text::content_word_set(query);
    const auto brief_words = text::content_word_set(
        state.brief.topic + " " + state.brief.audience + " " + state.brief.flatten_content());
    bool relevant = false;
    for (const auto& w : query_words) {
        if (brief_words.count(w)) {
            relevant = true;
            break;
        }
    }
    if (!relevant) return {};

    std::string slug;
    int used = 0;
    for (const auto& w : query_words) {
        if (used++ == 4) break;
        if (!slug.empty()) slug += '-';
        slug += w;
    }
    if (slug.empty()) slug = "query";

    const std::string facts = brief_fact_text(state.brief);
    std::vector<SearchResult> results;
    results.push_back({"https://research.example/" + slug + "/1",
                       state.brief.topic + " overview for " + state.brief.audience + ": " + facts});
    results.push_back({"https://research.example/" + slug + "/2",
                       "Key findings on " + state.brief.topic +
                           ": independent reviews confirm the reported figures and highlight "
                           "execution risks, competitive pressure, and adoption timelines."});
    return results;
}

std::optional<std::string> OfflineSearchProvider::fetch(const std::string& url,
                                                        const EnvState& state) {
    bool known = url.find("research.example") != std::string::npos;
    if (!known) {
        for (const auto& record : state.research_context) {
            if (record.result.find(url) != std::string::npos) {
                known = true;
                break;
            }
        }
    }
    if (!known) return std::nullopt;
    return "Article at " + url + ": " + state.brief.topic + " in depth. " +
           brief_fact_text(state.brief) +
           " Commentary covers strategy, execution risks, and market context.";
}

// ---------------------------------------------------------------------------
// SlideEnv
// ---------------------------------------------------------------------------

SlideEnv::SlideEnv(EnvConfig config) : config_(std::move(config)) {
    step_judge_ = config_.live_judge_q ? config_.judge : std::make_shared<JudgeGateway>();
}

double SlideEnv::compute_quality() {
    return aggregate_rewards(state_, *step_judge_, config_.weights).aggregate;
}

Observation SlideEnv::reset(const SlideBrief& brief, const std::vector<SlideSpec>& seed_slides) {
    const BriefValidation validation = validate_brief(brief);
    if (!validation.ok) {
        std::string msg = "invalid brief:";
        for (const auto& v : validation.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }

    state_ = EnvState{};
    state_.brief = brief;
    state_.step_budget = brief.targets.max_turns;
    if (brief.theme_hint && find_theme(*brief.theme_hint)) state_.theme = *brief.theme_hint;
    state_.episode_id = brief.id + "-ep" + std::to_string(episode_counter_++);
    if (!seed_slides.empty()) {
        state_.edit_mode = true;
        for (const auto& spec : seed_slides) {
            const RenderedSlide rendered =
                render_slide(spec, current_theme(), config_.png_renderer.get());
            state_.slides_html.push_back(rendered.html);
            state_.slides_png.push_back(rendered.png);
            state_.slide_specs.push_back(spec);
        }
        state_.original_slides_html = state_.slides_html;
    }
    review_deck_uses_ = 0;
    has_episode_ = true;
    q_current_ = compute_quality();

    std::ostringstream intro;
    intro << "Episode started: create a " << brief.num_slides << "-slide presentation on '"
          << brief.topic << "' for " << (brief.audience.empty() ? "a general audience" : brief.audience)
          << ".";
    return make_observation(intro.str(), true);
}

Observation SlideEnv::make_observation(std::string result, bool success) const {
    Observation obs;
    obs.result = std::move(result);
    obs.success = success;
    obs.current_slide_count = state_.slide_count();
    obs.phase = state_.phase;
    for (const auto& png_bytes : state_.slides_png) {
        if (!png_bytes) continue;
        if (*png_bytes == png::marker_png()) continue;  // stubbed render: no previews
        auto image = png::decode(*png_bytes);
        if (!image) continue;
        const png::Image thumb = png::scale_to_width(*image, config_.thumbnail_width);
        obs.slide_previews.push_back(util::base64_encode(png::encode(thumb)));
    }
    return obs;
}

std::string SlideEnv::render_observation_text(const Observation& obs, const EnvState& state) {
    std::ostringstream out;
    out << "Tool result (success=" << (obs.success ? "true" : "false") << "): " << obs.result
        << "\n"
        << "State: phase=" << to_string(obs.phase) << ", slides=" << obs.current_slide_count << "/"
        << state.brief.num_slides << ", turns remaining=" << (state.step_budget - state.step_count);
    return out.str();
}

std::optional<ToolCall> SlideEnv::parse_tool_call(std::string_view completion) {
    auto object = util::first_json_object(
        completion, [](const json& o) { return o.contains("tool"); });
    if (!object || !(*object)["tool"].is_string()) return std::nullopt;
    const std::string name = (*object)["tool"].get<std::string>();
    if (!is_known_tool(name)) return std::nullopt;

    ToolCall call;
    call.tool = name;
    call.params = *object;
    call.params.erase("tool");
    return call;
}

double SlideEnv::action_reward(bool success, bool was_finalize, const std::string& tool) {
    if (!success) return -0.02;
    if (was_finalize) return 0.1;
    if (tool == "review_deck" && config_.review_deck_decay != 1.0) {
        return 0.01 * std::pow(config_.review_deck_decay, review_deck_uses_ - 1);
    }
    return 0.01;
}

StepResult SlideEnv::step(const ToolCall& call) {
    if (!has_episode_) throw ProtocolError("step called before reset");
    if (state_.terminated) throw ProtocolError("step called after episode termination");

    ExecOutcome outcome = execute_tool(call);
    const bool was_finalize = call.tool == "finalize" && outcome.success;
    if (call.tool == "review_deck" && outcome.success) ++review_deck_uses_;
    return finish_step(std::move(outcome), was_finalize, call.tool);
}

StepResult SlideEnv::step_parse_failure(std::string_view reason) {
    if (!has_episode_) throw ProtocolError("step called before reset");
    if (state_.terminated) throw ProtocolError("step called after episode termination");
    ExecOutcome outcome;
    outcome.success = false;
    outcome.result = "No valid tool call found";
    if (!reason.empty()) outcome.result += ": " + std::string(reason);
    return finish_step(std::move(outcome), false, "");
}

StepResult SlideEnv::finish_step(ExecOutcome outcome, bool was_finalize, const std::string& tool) {
    const double q_old = q_current_;
    state_.step_count += 1;

    const double q_new = compute_quality();
    q_current_ = q_new;

    const double r_action = action_reward(outcome.success, was_finalize, tool);
    const double reward = (q_new - q_old) + r_action;
    state_.cumulative_reward += reward;

    if (!state_.terminated && state_.step_count >= state_.step_budget) {
        state_.terminated = true;  // budget exhaustion, no finalize bonus
    }

    StepResult result;
    result.observation = make_observation(std::move(outcome.result), outcome.success);
    result.reward = reward;
    result.terminated = state_.terminated;
    result.info.step_index = state_.step_count;
    result.info.q_before = q_old;
    result.info.q_after = q_new;
    result.info.action_reward = r_action;
    result.info.breakdown = aggregate_rewards(state_, *step_judge_, config_.weights);
    return result;
}

// ---------------------------------------------------------------------------
// Tool execution
// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> string_param(const json& params, const char* name) {
    if (!params.is_object() || !params.contains(name) || !params[name].is_string()) {
        return std::nullopt;
    }
    return params[name].get<std::string>();
}

std::optional<int> int_param(const json& params, const char* name) {
    if (!params.is_object() || !params.contains(name)) return std::nullopt;
    const auto& v = params[name];
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d)) return static_cast<int>(d);
    }
    return std::nullopt;
}

std::vector<SlideSection> sections_from_json(const json& sections) {
    std::vector<SlideSection> out;
    for (const auto& node : sections) {
        SlideSection section;
        if (node.is_object()) {
            section.heading = node.value("heading", std::string{});
            section.body = node.value("body", std::string{});
        } else if (node.is_string()) {
            section.body = node.get<std::string>();
        }
        out.push_back(std::move(section));
    }
    return out;
}

ExecOutcome fail(std::string msg) { return {std::move(msg), false}; }
ExecOutcome ok(std::string msg) { return {std::move(msg), true}; }

}  // namespace

ExecOutcome SlideEnv::execute_tool(const ToolCall& call) {
    const std::string& tool = call.tool;
    const json& params = call.params;
    const int n = state_.slide_count();

    if (tool == "web_search") {
        const auto query = string_param(params, "query");
        if (!query || text::trim(*query).empty()) return fail("web_search requires a 'query' string.");
        const auto results = config_.search->search(*query, state_);
        if (results.empty()) return fail("No results for query '" + *query + "'.");
        std::string combined;
        for (const auto& r : results) {
            if (!combined.empty()) combined += '\n';
            combined += r.url + " - " + r.snippet;
        }
        state_.research_context.push_back({*query, combined, false});
        return ok("Found " + std::to_string(results.size()) + " results for '" + *query + "'.");
    }

    if (tool == "fetch_url") {
        const auto url = string_param(params, "url");
        if (!url || text::trim(*url).empty()) return fail("fetch_url requires a 'url' string.");
        const auto page = config_.search->fetch(*url, state_);
        if (!page) return fail("Could not fetch URL '" + *url + "'.");
        state_.research_context.push_back({*url, *page, true});
        return ok("Fetched " + *url + " (" + std::to_string(text::count_words(*page)) + " words).");
    }

    if (tool == "create_outline") {
        if (!params.is_object() || !params.contains("sections") || !params["sections"].is_array() ||
            params["sections"].empty()) {
            return fail("create_outline requires a nonempty 'sections' array.");
        }
        std::vector<OutlineEntry> outline;
        for (const auto& node : params["sections"]) {
            OutlineEntry entry;
            if (node.is_object() && node.contains("title") && node["title"].is_string()) {
                entry.title = node["title"].get<std::string>();
                if (node.contains("bullet_points") && node["bullet_points"].is_array()) {
                    for (const auto& bp : node["bullet_points"]) {
                        if (bp.is_string()) entry.bullet_points.push_back(bp.get<std::string>());
                    }
                }
            } else if (node.is_string()) {
                entry.title = node.get<std::string>();
            } else {
                return fail("outline sections need a 'title'.");
            }
            outline.push_back(std::move(entry));
        }
        state_.outline = std::move(outline);
        if (state_.phase == Phase::Research) state_.phase = Phase::Plan;
        return ok("Outline created with " + std::to_string(state_.outline.size()) + " sections.");
    }

    if (tool == "revise_outline") {
        const auto idx = int_param(params, "slide_idx");
        if (!idx) return fail("revise_outline requires an integer 'slide_idx'.");
        if (*idx < 0 || *idx >= static_cast<int>(state_.outline.size())) {
            return fail("slide_idx " + std::to_string(*idx) + " out of range (outline has " +
                        std::to_string(state_.outline.size()) + " sections).");
        }
        auto& entry = state_.outline[static_cast<std::size_t>(*idx)];
        if (const auto title = string_param(params, "title")) entry.title = *title;
        if (params.contains("bullet_points") && params["bullet_points"].is_array()) {
            entry.bullet_points.clear();
            for (const auto& bp : params["bullet_points"]) {
                if (bp.is_string()) entry.bullet_points.push_back(bp.get<std::string>());
            }
        }
        return ok("Outline section " + std::to_string(*idx) + " revised.");
    }

    if (tool == "generate_slide") {
        const auto idx = int_param(params, "slide_idx");
        const auto title = string_param(params, "title");
        if (!idx || !title) return fail("generate_slide requires 'slide_idx' and 'title'.");
        if (*idx < 0 || *idx > n) {
            return fail("slide_idx " + std::to_string(*idx) + " out of range (deck has " +
                        std::to_string(n) + " slides).");
        }
        SlideSpec spec;
        spec.slide_idx = *idx;
        spec.title = *title;
        if (params.contains("sections") && params["sections"].is_array()) {
            spec.sections = sections_from_json(params["sections"]);
        }
        const RenderedSlide rendered = render_slide(spec, current_theme(), config_.png_renderer.get());
        if (*idx == n) {
            state_.slides_html.push_back(rendered.html);
            state_.slides_png.push_back(rendered.png);
            state_.slide_specs.push_back(spec);
        } else {
            state_.slides_html[static_cast<std::size_t>(*idx)] = rendered.html;
            state_.slides_png[static_cast<std::size_t>(*idx)] = rendered.png;
            state_.slide_specs[static_cast<std::size_t>(*idx)] = spec;
        }
        if (state_.phase == Phase::Research || state_.phase == Phase::Plan) {
            state_.phase = Phase::Generate;
        }
        return ok("Slide " + std::to_string(*idx) + " generated and rendered (" +
                  std::to_string(spec.sections.size()) + " sections).");
    }

    if (tool == "edit_slide") {
        const auto idx = int_param(params, "slide_idx");
        if (!idx) return fail("edit_slide requires an integer 'slide_idx'.");
        if (*idx < 0 || *idx >= n) {
            return fail("slide_idx " + std::to_string(*idx) + " out of range (deck has " +
                        std::to_string(n) + " slides).");
        }
        SlideSpec spec = state_.slide_specs[static_cast<std::size_t>(*idx)];
        if (const auto title = string_param(params, "title")) spec.title = *title;
        if (params.contains("sections") && params["sections"].is_array()) {
            spec.sections = sections_from_json(params["sections"]);
        }
        const RenderedSlide rendered = render_slide(spec, current_theme(), config_.png_renderer.get());
        state_.slides_html[static_cast<std::size_t>(*idx)] = rendered.html;
        state_.slides_png[static_cast<std::size_t>(*idx)] = rendered.png;
        state_.slide_specs[static_cast<std::size_t>(*idx)] = spec;
        if (state_.phase == Phase::Generate) state_.phase = Phase::Refine;
        return ok("Slide " + std::to_string(*idx) + " updated and rendered (" +
                  std::to_string(spec.sections.size()) + " sections).");
    }

    if (tool == "set_theme") {
        const auto theme = string_param(params, "theme");
        if (!theme || !find_theme(*theme)) {
            std::string valid;
            for (const auto& name : theme_names()) {
                if (!valid.empty()) valid += ", ";
                valid += name;
            }
            return fail("Unknown theme '" + theme.value_or("") + "'. Valid themes: " + valid + ".");
        }
        state_.theme = *theme;
        for (std::size_t i = 0; i < state_.slide_specs.size(); ++i) {
            const RenderedSlide rendered =
                render_slide(state_.slide_specs[i], current_theme(), config_.png_renderer.get());
            state_.slides_html[i] = rendered.html;
            state_.slides_png[i] = rendered.png;
        }
        return ok("Theme set to '" + *theme + "' (" + std::to_string(n) + " slides re-rendered).");
    }

    if (tool == "get_slide_content") {
        const auto idx = int_param(params, "idx");
        if (!idx || *idx < 0 || *idx >= n) {
            return fail("idx " + (idx ? std::to_string(*idx) : std::string("(missing)")) +
                        " out of range (deck has " + std::to_string(n) + " slides).");
        }
        return ok(state_.slides_html[static_cast<std::size_t>(*idx)]);
    }

    if (tool == "delete_slide") {
        const auto idx = int_param(params, "idx");
        if (!idx || *idx < 0 || *idx >= n) {
            return fail("idx " + (idx ? std::to_string(*idx) : std::string("(missing)")) +
                        " out of range (deck has " + std::to_string(n) + " slides).");
        }
        state_.slides_html.erase(state_.slides_html.begin() + *idx);
        state_.slides_png.erase(state_.slides_png.begin() + *idx);
        state_.slide_specs.erase(state_.slide_specs.begin() + *idx);
        return ok("Slide " + std::to_string(*idx) + " deleted (" +
                  std::to_string(state_.slide_count()) + " slides remain).");
    }

    if (tool == "duplicate_slide") {
        const auto idx = int_param(params, "idx");
        if (!idx || *idx < 0 || *idx >= n) {
            return fail("idx " + (idx ? std::to_string(*idx) : std::string("(missing)")) +
                        " out of range (deck has " + std::to_string(n) + " slides).");
        }
        const auto i = static_cast<std::size_t>(*idx);
        state_.slides_html.insert(state_.slides_html.begin() + *idx + 1, state_.slides_html[i]);
        state_.slides_png.insert(state_.slides_png.begin() + *idx + 1, state_.slides_png[i]);
        state_.slide_specs.insert(state_.slide_specs.begin() + *idx + 1, state_.slide_specs[i]);
        return ok("Slide " + std::to_string(*idx) + " duplicated.");
    }

    if (tool == "insert_slide") {
        const auto pos = int_param(params, "pos");
        if (!pos || *pos < 0 || *pos > n) {
            return fail("pos " + (pos ? std::to_string(*pos) : std::string("(missing)")) +
                        " out of range (deck has " + std::to_string(n) + " slides).");
        }
        SlideSpec blank;
        blank.slide_idx = *pos;
        const RenderedSlide rendered = render_slide(blank, current_theme(), config_.png_renderer.get());
        state_.slides_html.insert(state_.slides_html.begin() + *pos, rendered.html);
        state_.slides_png.insert(state_.slides_png.begin() + *pos, rendered.png);
        state_.slide_specs.insert(state_.slide_specs.begin() + *pos, blank);
        return ok("Blank slide inserted at position " + std::to_string(*pos) + ".");
    }

    if (tool == "reorder_slides") {
        if (!params.is_object() || !params.contains("order") || !params["order"].is_array()) {
            return fail("reorder_slides requires an 'order' array.");
        }
        std::vector<int> order;
        for (const auto& v : params["order"]) {
            if (!v.is_number_integer()) return fail("order entries must be integers.");
            order.push_back(v.get<int>());
        }
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        bool is_permutation = static_cast<int>(order.size()) == n;
        for (int i = 0; is_permutation && i < n; ++i) {
            if (sorted[static_cast<std::size_t>(i)] != i) is_permutation = false;
        }
        if (!is_permutation) {
            return fail("order must be a permutation of 0.." + std::to_string(n - 1) + ".");
        }
        std::vector<std::string> html;
        std::vector<std::optional<std::string>> pngs;
        std::vector<SlideSpec> specs;
        for (int src : order) {
            html.push_back(state_.slides_html[static_cast<std::size_t>(src)]);
            pngs.push_back(state_.slides_png[static_cast<std::size_t>(src)]);
            specs.push_back(state_.slide_specs[static_cast<std::size_t>(src)]);
        }
        state_.slides_html = std::move(html);
        state_.slides_png = std::move(pngs);
        state_.slide_specs = std::move(specs);
        return ok("Slides reordered.");
    }

    if (tool == "review_deck") {
        // Unconditional success, never mutates state: the documented
        // exploit surface, preserved exactly.
        std::ostringstream out;
        out << "Deck review: " << n << "/" << state_.brief.num_slides << " slides, theme '"
            << state_.theme << "', phase " << to_string(state_.phase) << ", outline sections "
            << state_.outline.size() << ".";
        if (n > 0) {
            out << " Titles:";
            for (int i = 0; i < n; ++i) {
                const SlideStats stats = inspect_slide(state_.slides_html[static_cast<std::size_t>(i)]);
                out << " " << (i + 1) << ". "
                    << (stats.title_text.empty() ? "(untitled)" : stats.title_text) << ";";
            }
        }
        return ok(out.str());
    }

    if (tool == "finalize") {
        if (n == 0) return fail("Cannot finalize: the deck is empty.");
        state_.phase = Phase::Done;
        state_.terminated = true;
        return ok("Presentation finalized with " + std::to_string(n) + " slides.");
    }

    return fail("Unknown tool '" + tool + "'.");
}

const ThemePalette& SlideEnv::current_theme() const {
    const ThemePalette* theme = find_theme(state_.theme);
    return theme ? *theme : *find_theme("default");
}

}  // namespace slidegym
