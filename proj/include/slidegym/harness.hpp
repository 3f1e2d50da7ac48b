#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <thread>

#include "slidegym/env.hpp"

namespace slidegym {

/// Agent boundary for the episode runner. Agents see rendered observation
/// text only, never reward internals.
class Agent {
  public:
    virtual ~Agent() = default;
    virtual std::string name() const = 0;
    virtual void begin_episode(const SlideBrief& brief) { (void)brief; }
    /// One completion per turn.
    virtual std::string act(const std::string& observation_text) = 0;
};

class AgentTransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Replays a fixed list of completions; after the list runs out it repeats
/// the last entry.
class ScriptedAgent : public Agent {
  public:
    ScriptedAgent(std::string name, std::vector<std::string> completions);
    std::string name() const override { return name_; }
    void begin_episode(const SlideBrief& brief) override;
    std::string act(const std::string& observation_text) override;

  private:
    std::string name_;
    std::vector<std::string> completions_;
    std::size_t cursor_ = 0;
};

/// The happy-path baseline: research, outline, themed slides from the
/// brief's own content, finalize.
std::vector<std::string> competent_script(const SlideBrief& brief);

/// The exploit agent of the collapse experiment: review_deck every turn.
std::vector<std::string> review_deck_script(int turns);

struct RemoteAgentConfig {
    std::string endpoint;
    std::string model_name;
    std::string system_prompt;  // empty = default_agent_system_prompt()
    int timeout_ms = 30000;
    int max_retries = 1;
};

const std::string& default_agent_system_prompt();

/// Chat-style remote agent speaking POST {model, system, messages} ->
/// {completion}. Throws AgentTransportError when the endpoint stays
/// unreachable.
class RemoteAgent : public Agent {
  public:
    explicit RemoteAgent(RemoteAgentConfig config);
    std::string name() const override { return config_.model_name; }
    void begin_episode(const SlideBrief& brief) override;
    std::string act(const std::string& observation_text) override;

  private:
    RemoteAgentConfig config_;
    std::vector<std::pair<std::string, std::string>> messages_;  // role, content
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TrajectoryTurn {
    int turn_idx = 0;
    std::optional<ToolCall> tool_call;  // nullopt = unparseable completion
    std::string raw_completion;
    Observation observation;
    double step_reward = 0.0;
};

struct Trajectory {
    std::string brief_id;
    std::string model_name;
    std::vector<TrajectoryTurn> turns;
    RewardBreakdown final_breakdown;
    bool completed = false;  // finalize succeeded
    int turns_used = 0;
    int slides_created = 0;
    double wall_time_s = 0.0;

    nlohmann::json to_json() const;
    static Trajectory from_json(const nlohmann::json& doc,
                                std::vector<std::string>* unmapped_fields = nullptr);
    bool operator==(const Trajectory& other) const;
};

struct RunConfig {
    EnvConfig env;
    /// When set, deck.html / deck.pptx are exported here for decks with at
    /// least one slide.
    std::optional<std::filesystem::path> export_dir;
};

/// Run one full episode: observation -> completion -> parse -> step, until
/// termination or budget. Agent transport failures end the episode early
/// with the partial trajectory retained.
Trajectory run_episode(Agent& agent, const SlideBrief& brief, const RunConfig& config = {});

// ---------------------------------------------------------------------------
// Evaluation sweeps
// ---------------------------------------------------------------------------

/// A model entry in an evaluation: a fresh Agent per episode.
struct AgentSpec {
    std::string model_name;
    std::function<std::unique_ptr<Agent>(const SlideBrief&)> make;
};

AgentSpec scripted_competent_spec(const std::string& name = "scripted-competent");
AgentSpec scripted_review_deck_spec(const std::string& name = "scripted-review-deck");

struct AgentReport {
    std::string model_name;
    int episodes = 0;
    double overall_quality = 0.0;
    double completion_rate = 0.0;
    double avg_turns = 0.0;
    double avg_slides = 0.0;
    double avg_time_s = 0.0;
    RewardBreakdown component_means;

    nlohmann::json to_json() const;
};

struct HeadToHead {
    std::string agent_a;
    std::string agent_b;
    int wins = 0;   // agent_a ahead
    int ties = 0;
    int losses = 0;
};

struct EvalReport {
    std::vector<AgentReport> agents;
    std::vector<HeadToHead> head_to_head;
    std::vector<Trajectory> trajectories;

    nlohmann::json to_json() const;
};

struct EvalConfig {
    RunConfig run;
    int worker_threads = static_cast<int>(std::thread::hardware_concurrency());
};

/// Every (agent, brief) pair; per-episode failures are recorded, never
/// abort the sweep.
EvalReport evaluate(const std::vector<AgentSpec>& agents, const BriefCatalog& catalog,
                    const EvalConfig& config = {});

// ---------------------------------------------------------------------------
// Rollout export
// ---------------------------------------------------------------------------

/// One JSON record per line; returns the written path.
std::filesystem::path export_rollouts(const std::vector<Trajectory>& trajectories,
                                      const std::filesystem::path& out_path);

/// Inverse of export_rollouts. Unknown fields are reported via notes, not
/// guessed at.
std::vector<Trajectory> import_rollouts(const std::filesystem::path& path,
                                        std::vector<std::string>* notes = nullptr);

// ---------------------------------------------------------------------------
// HTTP environment service
// ---------------------------------------------------------------------------

struct ServiceConfig {
    int port = 8080;
    std::string host = "127.0.0.1";
    BriefCatalog catalog;
    EnvConfig env;
    int idle_timeout_s = 600;
    bool expose_rewards = false;  // redact reward internals from /state
};

/// JSON-over-HTTP mirror of reset/step with per-session serialization.
class EnvService {
  public:
    explicit EnvService(ServiceConfig config);
    ~EnvService();

    /// Bind and serve on a background thread; false if the port is taken.
    bool start();
    void stop();
    bool wait_until_ready(int timeout_ms = 2000) const;
    int port() const { return config_.port; }

  private:
    ServiceConfig config_;
    std::unique_ptr<class EnvServiceImpl> impl_;
};

}  // namespace slidegym
