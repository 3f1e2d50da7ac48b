#include "slidegym/harness.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "slidegym/text.hpp"
#include "slidegym/util.hpp"

namespace slidegym {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

ScriptedAgent::ScriptedAgent(std::string name, std::vector<std::string> completions)
    : name_(std::move(name)), completions_(std::move(completions)) {}

void ScriptedAgent::begin_episode(const SlideBrief&) { cursor_ = 0; }

std::string ScriptedAgent::act(const std::string&) {
    if (completions_.empty()) return "";
    if (cursor_ >= completions_.size()) return completions_.back();
    return completions_[cursor_++];
}

std::vector<std::string> review_deck_script(int turns) {
    return std::vector<std::string>(static_cast<std::size_t>(std::max(0, turns)),
                                    R"({"tool": "review_deck"})");
}

namespace {

std::string chunk_words(const std::string& source, std::size_t offset, std::size_t count) {
    std::istringstream in(source);
    std::string word, out;
    std::size_t idx = 0;
    while (in >> word) {
        if (idx >= offset && idx < offset + count) {
            if (!out.empty()) out += ' ';
            out += word;
        }
        ++idx;
    }
    return out;
}

}  // namespace

std::vector<std::string> competent_script(const SlideBrief& brief) {
    std::vector<std::string> script;

    // Research first: the offline provider synthesizes snippets from the
    // brief, and the slide bodies below quote them so grounding holds.
    script.push_back(json{{"tool", "web_search"}, {"query", brief.topic}}.dump());
    const std::string facts =
        brief.flatten_content().empty()
            ? "Industry analysts covering " + brief.topic +
                  " report sustained momentum, strong demand signals, and measurable adoption "
                  "across key market segments."
            : brief.flatten_content();
    const std::string snippet =
        brief.topic + " overview for " + brief.audience + ": " + facts;

    static const char* kHeadings[] = {"Overview",  "Key Points", "Analysis", "Outlook",
                                      "Risks",     "Timeline",   "Metrics",  "Strategy",
                                      "Findings",  "Summary"};

    json outline_sections = json::array();
    for (int i = 0; i < brief.num_slides; ++i) {
        outline_sections.push_back(
            json{{"title", std::string(kHeadings[i % 10]) + ": " + brief.topic},
                 {"bullet_points",
                  json::array({chunk_words(snippet, static_cast<std::size_t>(i) * 4, 10)})}});
    }
    script.push_back(json{{"tool", "create_outline"}, {"sections", outline_sections}}.dump());

    if (!brief.theme_hint) {
        script.push_back(json{{"tool", "set_theme"}, {"theme", "corporate"}}.dump());
    }

    const int sections_per_slide = brief.targets.sections_per_slide;
    const int body_words =
        std::max(6, brief.targets.words_per_slide / std::max(1, sections_per_slide) - 4);
    for (int i = 0; i < brief.num_slides; ++i) {
        json sections = json::array();
        for (int s = 0; s < sections_per_slide; ++s) {
            std::string body = chunk_words(snippet, static_cast<std::size_t>(i * 3 + s * 7),
                                           static_cast<std::size_t>(body_words));
            if (body.empty()) {
                body = chunk_words(snippet, 0, static_cast<std::size_t>(body_words));
            }
            if (i == 0 && s == 0) body = "Prepared for " + brief.audience + ". " + body;
            sections.push_back(json{{"heading", kHeadings[(i + s) % 10]}, {"body", body}});
        }
        script.push_back(json{{"tool", "generate_slide"},
                              {"slide_idx", i},
                              {"title", std::string(kHeadings[i % 10]) + ": " + brief.topic},
                              {"sections", sections}}
                             .dump());
    }

    script.push_back(json{{"tool", "finalize"}}.dump());
    return script;
}

const std::string& default_agent_system_prompt() {
    static const std::string kPrompt =
        "You are an agent that creates professional HTML slide presentations inside a "
        "tool-based environment. Work through the phases in order: research the topic, plan an "
        "outline, generate every slide, refine, then call finalize. On every turn respond with "
        "exactly one JSON tool call and nothing else, for example "
        "{\"tool\": \"generate_slide\", \"slide_idx\": 0, \"title\": \"...\", "
        "\"sections\": [{\"heading\": \"...\", \"body\": \"...\"}]}. Available tools: "
        "web_search(query), fetch_url(url), create_outline(sections), "
        "revise_outline(slide_idx, ...), generate_slide(slide_idx, title, sections), "
        "edit_slide(slide_idx, ...), set_theme(theme), get_slide_content(idx), "
        "delete_slide(idx), reorder_slides(order), duplicate_slide(idx), insert_slide(pos), "
        "review_deck(), finalize().";
    return kPrompt;
}

RemoteAgent::RemoteAgent(RemoteAgentConfig config) : config_(std::move(config)) {
    if (config_.system_prompt.empty()) config_.system_prompt = default_agent_system_prompt();
}

void RemoteAgent::begin_episode(const SlideBrief& brief) {
    messages_.clear();
    messages_.emplace_back("user", "Brief: create a " + std::to_string(brief.num_slides) +
                                       "-slide presentation on '" + brief.topic + "' for " +
                                       brief.audience + ".");
}

std::string RemoteAgent::act(const std::string& observation_text) {
    messages_.emplace_back("user", observation_text);

    json messages = json::array();
    for (const auto& [role, content] : messages_) {
        messages.push_back(json{{"role", role}, {"content", content}});
    }
    const json body{{"model", config_.model_name},
                    {"system", config_.system_prompt},
                    {"messages", messages}};

    std::string base = config_.endpoint;
    std::string path = "/";
    const std::size_t scheme_end = base.find("://");
    if (scheme_end != std::string::npos) {
        const std::size_t slash = base.find('/', scheme_end + 3);
        if (slash != std::string::npos) {
            path = base.substr(slash);
            base = base.substr(0, slash);
        }
    }

    httplib::Client client(base);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        auto result = client.Post(path, body.dump(), "application/json");
        if (!result || result->status != 200) continue;
        const json reply = json::parse(result->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("completion") ||
            !reply["completion"].is_string()) {
            continue;
        }
        const std::string completion = reply["completion"].get<std::string>();
        messages_.emplace_back("assistant", completion);
        return completion;
    }
    throw AgentTransportError("agent endpoint unreachable: " + config_.endpoint);
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

namespace {

Observation observation_from_json(const json& doc) {
    Observation obs;
    obs.result = doc.value("result", std::string{});
    obs.success = doc.value("success", false);
    obs.current_slide_count = doc.value("current_slide_count", 0);
    obs.phase = phase_from_string(doc.value("phase", "research")).value_or(Phase::Research);
    if (doc.contains("slide_previews") && doc["slide_previews"].is_array()) {
        for (const auto& p : doc["slide_previews"]) {
            if (p.is_string()) obs.slide_previews.push_back(p.get<std::string>());
        }
    }
    return obs;
}

}  // namespace

json Trajectory::to_json() const {
    json turns_json = json::array();
    for (const auto& turn : turns) {
        json t{{"turn_idx", turn.turn_idx},
               {"raw_completion", turn.raw_completion},
               {"observation", turn.observation.to_json()},
               {"step_reward", turn.step_reward}};
        if (turn.tool_call) {
            json call = turn.tool_call->params;
            call["tool"] = turn.tool_call->tool;
            t["tool_call"] = call;
        } else {
            t["tool_call"] = nullptr;
        }
        turns_json.push_back(std::move(t));
    }
    return json{{"brief_id", brief_id},
                {"model_name", model_name},
                {"turns", turns_json},
                {"final", final_breakdown.to_json()},
                {"completed", completed},
                {"turns_used", turns_used},
                {"slides_created", slides_created},
                {"wall_time_s", wall_time_s}};
}

Trajectory Trajectory::from_json(const json& doc, std::vector<std::string>* unmapped_fields) {
    static const std::set<std::string> kKnown = {"brief_id",  "model_name",     "turns",
                                                 "final",     "completed",      "turns_used",
                                                 "slides_created", "wall_time_s"};
    if (unmapped_fields) {
        for (const auto& [key, value] : doc.items()) {
            (void)value;
            if (!kKnown.count(key)) unmapped_fields->push_back(key);
        }
    }

    Trajectory trajectory;
    trajectory.brief_id = doc.value("brief_id", std::string{});
    trajectory.model_name = doc.value("model_name", std::string{});
    if (doc.contains("turns") && doc["turns"].is_array()) {
        for (const auto& t : doc["turns"]) {
            TrajectoryTurn turn;
            turn.turn_idx = t.value("turn_idx", 0);
            turn.raw_completion = t.value("raw_completion", std::string{});
            if (t.contains("observation")) turn.observation = observation_from_json(t["observation"]);
            turn.step_reward = t.value("step_reward", 0.0);
            if (t.contains("tool_call") && t["tool_call"].is_object()) {
                ToolCall call;
                call.params = t["tool_call"];
                call.tool = call.params.value("tool", std::string{});
                call.params.erase("tool");
                turn.tool_call = std::move(call);
            }
            trajectory.turns.push_back(std::move(turn));
        }
    }
    if (doc.contains("final")) trajectory.final_breakdown = RewardBreakdown::from_json(doc["final"]);
    trajectory.completed = doc.value("completed", false);
    trajectory.turns_used = doc.value("turns_used", 0);
    trajectory.slides_created = doc.value("slides_created", 0);
    trajectory.wall_time_s = doc.value("wall_time_s", 0.0);
    return trajectory;
}

bool Trajectory::operator==(const Trajectory& other) const {
    return to_json() == other.to_json();
}

Trajectory run_episode(Agent& agent, const SlideBrief& brief, const RunConfig& config) {
    const auto start = Clock::now();

    SlideEnv env(config.env);
    Observation obs = env.reset(brief);
    agent.begin_episode(brief);

    Trajectory trajectory;
    trajectory.brief_id = brief.id;
    trajectory.model_name = agent.name();

    while (!env.state().terminated) {
        std::string completion;
        try {
            completion = agent.act(SlideEnv::render_observation_text(obs, env.state()));
        } catch (const AgentTransportError& e) {
            std::cerr << "slidegym: episode " << brief.id << " aborted: " << e.what() << std::endl;
            break;  // failed-incomplete; keep the partial trajectory
        }

        const auto call = SlideEnv::parse_tool_call(completion);
        const StepResult result =
            call ? env.step(*call) : env.step_parse_failure("unparseable completion");

        TrajectoryTurn turn;
        turn.turn_idx = static_cast<int>(trajectory.turns.size());
        turn.tool_call = call;
        turn.raw_completion = completion;
        turn.observation = result.observation;
        turn.step_reward = result.reward;
        trajectory.turns.push_back(std::move(turn));
        obs = result.observation;
    }

    trajectory.final_breakdown =
        aggregate_rewards(env.state(), *config.env.judge, config.env.weights);
    trajectory.completed = env.state().phase == Phase::Done;
    trajectory.turns_used = static_cast<int>(trajectory.turns.size());
    trajectory.slides_created = env.state().slide_count();

    if (config.export_dir && env.state().slide_count() > 0) {
        export_deck(env.state().slides_html, *config.export_dir);
    }

    trajectory.wall_time_s =
        std::chrono::duration<double>(Clock::now() - start).count();
    return trajectory;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

AgentSpec scripted_competent_spec(const std::string& name) {
    return {name, [name](const SlideBrief& brief) {
                return std::make_unique<ScriptedAgent>(name, competent_script(brief));
            }};
}

AgentSpec scripted_review_deck_spec(const std::string& name) {
    return {name, [name](const SlideBrief& brief) {
                return std::make_unique<ScriptedAgent>(name,
                                                       review_deck_script(brief.targets.max_turns));
            }};
}

json AgentReport::to_json() const {
    return json{{"model_name", model_name},
                {"episodes", episodes},
                {"overall_quality", overall_quality},
                {"completion_rate", completion_rate},
                {"avg_turns", avg_turns},
                {"avg_slides", avg_slides},
                {"avg_time_s", avg_time_s},
                {"component_means", component_means.to_json()}};
}

json EvalReport::to_json() const {
    json agents_json = json::array();
    for (const auto& a : agents) agents_json.push_back(a.to_json());
    json h2h = json::array();
    for (const auto& h : head_to_head) {
        h2h.push_back(json{{"agent_a", h.agent_a},
                           {"agent_b", h.agent_b},
                           {"wins", h.wins},
                           {"ties", h.ties},
                           {"losses", h.losses}});
    }
    return json{{"agents", agents_json}, {"head_to_head", h2h}};
}

EvalReport evaluate(const std::vector<AgentSpec>& agents, const BriefCatalog& catalog,
                    const EvalConfig& config) {
    if (agents.empty() || catalog.briefs.empty()) {
        throw std::invalid_argument("evaluate requires at least one agent and one brief");
    }

    const std::size_t n_agents = agents.size();
    const std::size_t n_briefs = catalog.briefs.size();
    std::vector<Trajectory> results(n_agents * n_briefs);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= results.size()) return;
            const std::size_t agent_idx = i / n_briefs;
            const std::size_t brief_idx = i % n_briefs;
            const SlideBrief& brief = catalog.briefs[brief_idx];

            RunConfig run = config.run;
            if (run.export_dir) {
                run.export_dir = *run.export_dir / agents[agent_idx].model_name / brief.id;
            }
            try {
                auto agent = agents[agent_idx].make(brief);
                results[i] = run_episode(*agent, brief, run);
            } catch (const std::exception& e) {
                std::cerr << "slidegym: episode failed (" << agents[agent_idx].model_name << ", "
                          << brief.id << "): " << e.what() << std::endl;
                results[i].brief_id = brief.id;
                results[i].model_name = agents[agent_idx].model_name;
                results[i].completed = false;
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(config.worker_threads,
                                                    static_cast<int>(results.size())));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    EvalReport report;
    for (std::size_t a = 0; a < n_agents; ++a) {
        AgentReport agent_report;
        agent_report.model_name = agents[a].model_name;
        agent_report.episodes = static_cast<int>(n_briefs);
        double quality = 0.0, turns = 0.0, slides = 0.0, time_s = 0.0;
        int completed = 0;
        RewardBreakdown sums;
        for (std::size_t b = 0; b < n_briefs; ++b) {
            const auto& t = results[a * n_briefs + b];
            quality += t.final_breakdown.aggregate;
            turns += t.turns_used;
            slides += t.slides_created;
            time_s += t.wall_time_s;
            if (t.completed) ++completed;
            sums.code_rules += t.final_breakdown.code_rules;
            sums.render_quality += t.final_breakdown.render_quality;
            sums.aesthetic_html += t.final_breakdown.aesthetic_html;
            sums.aesthetic_visual += t.final_breakdown.aesthetic_visual;
            sums.content_quality += t.final_breakdown.content_quality;
            sums.spec_reconstruction += t.final_breakdown.spec_reconstruction;
        }
        const double n = static_cast<double>(n_briefs);
        agent_report.overall_quality = quality / n;
        agent_report.completion_rate = completed / n;
        agent_report.avg_turns = turns / n;
        agent_report.avg_slides = slides / n;
        agent_report.avg_time_s = time_s / n;
        agent_report.component_means.code_rules = sums.code_rules / n;
        agent_report.component_means.render_quality = sums.render_quality / n;
        agent_report.component_means.aesthetic_html = sums.aesthetic_html / n;
        agent_report.component_means.aesthetic_visual = sums.aesthetic_visual / n;
        agent_report.component_means.content_quality = sums.content_quality / n;
        agent_report.component_means.spec_reconstruction = sums.spec_reconstruction / n;
        agent_report.component_means.aggregate = agent_report.overall_quality;
        report.agents.push_back(std::move(agent_report));
    }

    for (std::size_t a = 0; a < n_agents; ++a) {
        for (std::size_t b = a + 1; b < n_agents; ++b) {
            HeadToHead h2h;
            h2h.agent_a = agents[a].model_name;
            h2h.agent_b = agents[b].model_name;
            for (std::size_t br = 0; br < n_briefs; ++br) {
                const double qa = results[a * n_briefs + br].final_breakdown.aggregate;
                const double qb = results[b * n_briefs + br].final_breakdown.aggregate;
                if (std::abs(qa - qb) < 1e-12) ++h2h.ties;
                else if (qa > qb) ++h2h.wins;
                else ++h2h.losses;
            }
            report.head_to_head.push_back(h2h);
        }
    }

    report.trajectories = std::move(results);
    return report;
}

// ---------------------------------------------------------------------------
// Rollout export
// ---------------------------------------------------------------------------

std::filesystem::path export_rollouts(const std::vector<Trajectory>& trajectories,
                                      const std::filesystem::path& out_path) {
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + out_path.string());
    for (const auto& t : trajectories) out << t.to_json().dump() << '\n';
    if (!out) throw std::runtime_error("short write to " + out_path.string());
    return out_path;
}

std::vector<Trajectory> import_rollouts(const std::filesystem::path& path,
                                        std::vector<std::string>* notes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<Trajectory> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            if (notes) notes->push_back("line " + std::to_string(line_no) + ": unparseable record");
            continue;
        }
        std::vector<std::string> unmapped;
        out.push_back(Trajectory::from_json(doc, &unmapped));
        if (notes) {
            for (const auto& f : unmapped) {
                notes->push_back("line " + std::to_string(line_no) + ": unmapped field '" + f + "'");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// HTTP environment service
// ---------------------------------------------------------------------------

class EnvServiceImpl {
  public:
    explicit EnvServiceImpl(const ServiceConfig& config) : config_(config) { setup_routes(); }

    ~EnvServiceImpl() { stop(); }

    bool start() {
        if (!server_.bind_to_port(config_.host, config_.port)) return false;
        thread_ = std::thread([this]() { server_.listen_after_bind(); });
        return true;
    }

    void stop() {
        if (server_.is_running()) server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    bool wait_until_ready(int timeout_ms) const {
        const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
        while (Clock::now() < deadline) {
            if (server_.is_running()) return true;
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        return server_.is_running();
    }

  private:
    struct Session {
        std::unique_ptr<SlideEnv> env;
        std::mutex mutex;  // per-session step serialization
        Clock::time_point last_used = Clock::now();
    };

    static void reply_json(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    std::shared_ptr<Session> find_session(const std::string& episode_id) {
        std::lock_guard lock(sessions_mutex_);
        auto it = sessions_.find(episode_id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    void evict_idle_sessions() {
        const auto now = Clock::now();
        std::lock_guard lock(sessions_mutex_);
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            const auto idle =
                std::chrono::duration_cast<std::chrono::seconds>(now - it->second->last_used);
            if (idle.count() > config_.idle_timeout_s) {
                it = sessions_.erase(it);
            } else {
                ++it;
            }
        }
    }

    void setup_routes() {
        server_.Post("/reset", [this](const httplib::Request& req, httplib::Response& res) {
            evict_idle_sessions();
            const json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                return reply_json(res, 400, json{{"error", "body must be a JSON object"}});
            }

            SlideBrief brief;
            if (body.contains("brief_id")) {
                const auto* found = config_.catalog.find(body["brief_id"].get<std::string>());
                if (!found) {
                    return reply_json(res, 404, json{{"error", "unknown brief_id"}});
                }
                brief = *found;
            } else if (body.contains("brief")) {
                try {
                    brief = brief_from_json(body["brief"], "adhoc");
                } catch (const std::exception& e) {
                    return reply_json(res, 400, json{{"error", e.what()}});
                }
            } else {
                return reply_json(res, 400, json{{"error", "expected brief_id or brief"}});
            }

            auto session = std::make_shared<Session>();
            session->env = std::make_unique<SlideEnv>(config_.env);
            Observation obs;
            try {
                obs = session->env->reset(brief);
            } catch (const std::exception& e) {
                return reply_json(res, 400, json{{"error", e.what()}});
            }

            std::string episode_id;
            {
                std::lock_guard lock(sessions_mutex_);
                episode_id = brief.id + "-srv" + std::to_string(next_session_id_++);
                sessions_[episode_id] = session;
            }
            reply_json(res, 200,
                       json{{"episode_id", episode_id},
                            {"observation", obs.to_json()},
                            {"observation_text",
                             SlideEnv::render_observation_text(obs, session->env->state())}});
        });

        server_.Post("/step", [this](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object() || !body.contains("episode_id")) {
                return reply_json(res, 400, json{{"error", "expected episode_id and tool_call"}});
            }
            auto session = find_session(body["episode_id"].get<std::string>());
            if (!session) {
                return reply_json(res, 404, json{{"error", "unknown episode_id"}});
            }
            if (!body.contains("tool_call") || !body["tool_call"].is_object()) {
                return reply_json(res, 400, json{{"error", "expected a tool_call object"}});
            }

            ToolCall call;
            call.params = body["tool_call"];
            if (call.params.contains("params") && call.params["params"].is_object()) {
                // Accept both {"tool": ..., ...params} and {"tool": ..., "params": {...}}.
                json nested = call.params["params"];
                call.tool = call.params.value("tool", std::string{});
                call.params = nested;
            } else {
                call.tool = call.params.value("tool", std::string{});
                call.params.erase("tool");
            }

            std::lock_guard session_lock(session->mutex);
            session->last_used = Clock::now();
            try {
                const StepResult result = session->env->step(call);
                json payload = result.to_json();
                payload["observation_text"] =
                    SlideEnv::render_observation_text(result.observation, session->env->state());
                reply_json(res, 200, payload);
            } catch (const ProtocolError& e) {
                reply_json(res, 409, json{{"error", e.what()}});
            } catch (const std::exception& e) {
                reply_json(res, 500, json{{"error", e.what()}});
            }
        });

        server_.Get(R"(/state/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto session = find_session(req.matches[1].str());
            if (!session) {
                return reply_json(res, 404, json{{"error", "unknown episode_id"}});
            }
            std::lock_guard session_lock(session->mutex);
            session->last_used = Clock::now();
            const EnvState& state = session->env->state();
            json outline = json::array();
            for (const auto& entry : state.outline) outline.push_back(entry.title);
            json summary{{"episode_id", req.matches[1].str()},
                         {"brief_id", state.brief.id},
                         {"phase", std::string(to_string(state.phase))},
                         {"slide_count", state.slide_count()},
                         {"step_count", state.step_count},
                         {"step_budget", state.step_budget},
                         {"terminated", state.terminated},
                         {"theme", state.theme},
                         {"outline_titles", outline}};
            if (config_.expose_rewards) {
                summary["cumulative_reward"] = state.cumulative_reward;
                summary["quality"] = session->env->current_quality();
            }
            reply_json(res, 200, summary);
        });
    }

    ServiceConfig config_;
    httplib::Server server_;
    std::thread thread_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex sessions_mutex_;
    std::uint64_t next_session_id_ = 0;
};

EnvService::EnvService(ServiceConfig config)
    : config_(std::move(config)), impl_(std::make_unique<EnvServiceImpl>(config_)) {}

EnvService::~EnvService() = default;

bool EnvService::start() { return impl_->start(); }
void EnvService::stop() { impl_->stop(); }
bool EnvService::wait_until_ready(int timeout_ms) const { return impl_->wait_until_ready(timeout_ms); }

}  // namespace slidegym
