#pragma once

#include <memory>
#include <random>

#include "slidegym/rewards.hpp"
#include "slidegym/state.hpp"

namespace slidegym {

struct SearchResult {
    std::string url;
    std::string snippet;
};

/// Pluggable research boundary. The offline provider keeps episodes fully
/// deterministic and network-free.
class SearchProvider {
  public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchResult> search(const std::string& query, const EnvState& state) = 0;
    virtual std::optional<std::string> fetch(const std::string& url, const EnvState& state) = 0;
};

/// Synthesizes results from the brief's own content; queries that share no
/// content word with the brief come back empty (a miss). fetch serves the
/// URLs previously returned by search and misses on anything else.
class OfflineSearchProvider : public SearchProvider {
  public:
    std::vector<SearchResult> search(const std::string& query, const EnvState& state) override;
    std::optional<std::string> fetch(const std::string& url, const EnvState& state) override;
};

class ProtocolError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

struct ExecOutcome {
    std::string result;
    bool success = false;
};

struct StepInfo {
    int step_index = 0;
    double q_before = 0.0;
    double q_after = 0.0;
    double action_reward = 0.0;
    RewardBreakdown breakdown;

    nlohmann::json to_json() const;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool terminated = false;
    StepInfo info;

    nlohmann::json to_json() const;
};

struct EnvConfig {
    std::shared_ptr<SearchProvider> search = std::make_shared<OfflineSearchProvider>();
    std::shared_ptr<PngRenderer> png_renderer = std::make_shared<StubPngRenderer>();
    std::shared_ptr<JudgeGateway> judge = std::make_shared<JudgeGateway>();
    ComponentWeights weights;
    /// Use the configured (possibly remote) judge for step-reward deltas
    /// instead of a dedicated offline judge.
    bool live_judge_q = false;
    /// Per-use multiplier on review_deck's success bonus; 1.0 keeps the
    /// unconditional +0.01 that enables the no-op exploit, values < 1 give
    /// the tool diminishing returns.
    double review_deck_decay = 1.0;
    int thumbnail_width = 256;
};

/// The episode state machine: reset/step semantics, the 14-tool executor,
/// phase tracking, and observation construction.
class SlideEnv {
  public:
    explicit SlideEnv(EnvConfig config = {});

    /// Start a fresh episode. Throws std::invalid_argument when the brief
    /// fails validation. A nonempty seed renders those slides up front and
    /// snapshots them as the pre-edit originals (the edit-task variant).
    Observation reset(const SlideBrief& brief, const std::vector<SlideSpec>& seed_slides = {});

    /// Execute one tool call, with the dense shaped reward
    /// r = (Q_new - Q_old) + r_action. Throws ProtocolError after
    /// termination.
    StepResult step(const ToolCall& call);

    /// A turn whose completion could not be parsed: consumes budget and is
    /// scored as a failed action.
    StepResult step_parse_failure(std::string_view reason);

    /// Run one tool against the current state without step bookkeeping or
    /// rewards.
    ExecOutcome execute_tool(const ToolCall& call);

    const EnvState& state() const { return state_; }
    double current_quality() const { return q_current_; }
    const EnvConfig& config() const { return config_; }

    /// Extract the first JSON object with a known "tool" key from an agent
    /// completion; nullopt = parse failure (unknown tool names included).
    static std::optional<ToolCall> parse_tool_call(std::string_view completion);

    /// The exact two-line observation text shown to agents.
    static std::string render_observation_text(const Observation& obs, const EnvState& state);

  private:
    friend struct EnvPeek;
    Observation make_observation(std::string result, bool success) const;
    StepResult finish_step(ExecOutcome outcome, bool was_finalize, const std::string& tool);
    double action_reward(bool success, bool was_finalize, const std::string& tool);
    double compute_quality();
    const ThemePalette& current_theme() const;

    EnvConfig config_;
    EnvState state_;
    std::shared_ptr<JudgeGateway> step_judge_;  // offline unless live_judge_q
    double q_current_ = 0.0;
    int episode_counter_ = 0;
    int review_deck_uses_ = 0;
    bool has_episode_ = false;
};

}  // namespace slidegym
