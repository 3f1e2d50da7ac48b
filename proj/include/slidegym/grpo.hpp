#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "slidegym/env.hpp"

namespace slidegym::grpo {

// ---------------------------------------------------------------------------
// Toy policy: linear softmax over an action-template vocabulary
// ---------------------------------------------------------------------------

/// Feature layout: phase one-hot (5) + bucketed slide count (5) +
/// bucketed turns remaining (4) + bias.
constexpr int kFeatureDim = 15;

std::vector<double> policy_features(const EnvState& state);

/// A parameterized action template; slots are filled from the episode
/// state at expansion time.
struct ActionTemplate {
    std::string name;
    std::string tool;
    int slot = 0;
};

const std::vector<ActionTemplate>& template_vocab();
int review_deck_template_index();

/// Expand a template against the current state into a concrete ToolCall.
ToolCall expand_template(const ActionTemplate& tmpl, const EnvState& state);

/// Linear-softmax policy over the template vocabulary.
class ToyPolicy {
  public:
    ToyPolicy(int vocab_size, int feature_dim);

    int vocab_size() const { return vocab_size_; }
    int feature_dim() const { return feature_dim_; }

    std::vector<double> logits(std::span<const double> features) const;
    std::vector<double> probs(std::span<const double> features) const;
    double logprob(std::span<const double> features, int action) const;
    int sample(std::span<const double> features, std::mt19937_64& rng) const;

    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    double& weight_at(int action, int feature) { return weights_[index(action, feature)]; }

    /// w -= lr * grad (grad in the same flat layout as weights()).
    void apply_gradient(std::span<const double> grad, double learning_rate);

    void randomize(std::mt19937_64& rng, double scale);

  private:
    std::size_t index(int action, int feature) const {
        return static_cast<std::size_t>(action) * feature_dim_ + feature;
    }
    int vocab_size_;
    int feature_dim_;
    std::vector<double> weights_;  // row-major vocab x feature
};

// ---------------------------------------------------------------------------
// GRPO math
// ---------------------------------------------------------------------------

struct GrpoConfig {
    int k = 2;                  // completions per group
    double eps_adv = 1e-4;      // advantage-normalization stability constant
    double eps_clip = 0.2;
    double beta = 0.0;          // KL coefficient; 0 skips the reference policy
    double learning_rate = 0.1;
    int steps = 200;
    std::uint64_t seed = 0;
};

/// Group-normalized advantages with population standard deviation:
/// A_k = (R_k - mean) / (stddev + eps_adv). Requires K >= 2.
std::vector<double> compute_advantages(std::span<const double> rewards, double eps_adv);

/// Numerically stable log-softmax value of one token.
double token_logprob(std::span<const double> logits, int token);

double importance_ratio(double logp_new, double logp_old);

/// -min(rho * A, clip(rho, 1-eps, 1+eps) * A).
double clipped_token_loss(double ratio, double advantage, double eps_clip);

struct TokenRecord {
    std::vector<double> features;
    int action = 0;
    double old_logprob = 0.0;
    int mask = 1;
};

struct Completion {
    std::vector<TokenRecord> tokens;
    double reward = 0.0;
    double advantage = 0.0;
};

struct GrpoGroup {
    std::vector<Completion> completions;
};

/// Mean over completions of mask-weighted mean token loss, plus
/// beta * KL(policy || reference) estimated over batch tokens. Completions
/// with an all-zero mask are excluded with a warning.
double grpo_loss(const std::vector<GrpoGroup>& batch, const ToyPolicy& policy, double beta,
                 const ToyPolicy* reference = nullptr, double eps_clip = 0.2);

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;  // flat, same layout as ToyPolicy weights
};

/// Analytic gradient of grpo_loss with respect to the policy weights.
LossAndGrad grpo_loss_with_grad(const std::vector<GrpoGroup>& batch, const ToyPolicy& policy,
                                double beta, const ToyPolicy* reference = nullptr,
                                double eps_clip = 0.2);

/// Max relative error between the analytic gradient and central finite
/// differences over sample_coords random coordinates.
double finite_difference_check(ToyPolicy& policy, const std::vector<GrpoGroup>& batch, double h,
                               double beta = 0.0, const ToyPolicy* reference = nullptr,
                               double eps_clip = 0.2, int sample_coords = 128,
                               std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Rewards for completions (the graduated penalty ladder)
// ---------------------------------------------------------------------------

/// -2.0 when the completion has no parseable tool call, -1.0 when the call
/// executes and fails, else the aggregate quality of the resulting state.
double completion_reward(std::string_view completion, const SlideBrief& brief,
                         const EnvConfig& env_config = {});

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainRecord {
    int step = 0;
    double avg = 0.0;
    double min = 0.0;
    double max = 0.0;
    double entropy = 0.0;
    double p_review_deck = 0.0;

    nlohmann::json to_json() const;
};

enum class RewardSignal {
    EnvSteps,          // sum of dense env step rewards over a rollout
    CompletionLadder,  // single-action completions scored by completion_reward
};

struct TrainOptions {
    GrpoConfig grpo;
    RewardSignal signal = RewardSignal::EnvSteps;
    int groups_per_step = 4;
    int seq_len = 6;
    /// Probability that a parameterized template's expansion is emitted
    /// corrupted (invalid params, or prose in completion mode), modelling
    /// tool-call emission unreliability; zero-parameter tools never slip.
    double param_slip_prob = 0.0;
    /// Per-use multiplier on review_deck's success bonus (env signal only).
    double review_deck_decay = 1.0;
    EnvConfig env_config;
};

std::vector<TrainRecord> train(ToyPolicy& policy, const std::vector<SlideBrief>& briefs,
                               const TrainOptions& options);

// ---------------------------------------------------------------------------
// Collapse experiment
// ---------------------------------------------------------------------------

struct WindowStat {
    int first_step = 0;
    int last_step = 0;
    double avg = 0.0;
    double min = 0.0;
    double max = 0.0;
    double p_review_deck = 0.0;
};

struct CollapseConfig {
    SlideBrief brief;  // default: open-ended topic, no structured content
    GrpoConfig grpo{.k = 2, .eps_adv = 1e-4, .eps_clip = 0.2, .beta = 0.0,
                    .learning_rate = 0.1, .steps = 1500, .seed = 7};
    int groups_per_step = 8;
    int seq_len = 6;
    int window = 50;
    /// Base emission-slip rate: the probability a state-mutating tool call
    /// is emitted corrupted. Read-only and research calls slip at a fifth
    /// of this, zero-parameter meta tools never. This is what makes
    /// productive tools risky while review_deck stays free.
    double param_slip_prob = 0.9;
    double review_deck_decay = 1.0;  // < 1 enables the mitigation

    CollapseConfig();
};

struct CollapseReport {
    std::vector<WindowStat> windows;
    std::vector<TrainRecord> log;
    double terminal_p_review_deck = 0.0;
    // The scripted exploit agent: review_deck on every one of 35 turns.
    double scripted_cumulative_reward = 0.0;
    double scripted_aggregate_quality = 0.0;
    int scripted_turns = 0;

    std::string format_window_table() const;
};

CollapseReport run_collapse_experiment(const CollapseConfig& config = {});

// ---------------------------------------------------------------------------
// Noise analysis
// ---------------------------------------------------------------------------

struct SnrResult {
    double value = 0.0;
    bool infinite = false;
};

/// Signal-to-noise ratio sigma_true^2 / sigma_eta^2; sigma_eta = 0 yields
/// the infinite sentinel.
SnrResult snr(double sigma_true, double sigma_eta);

/// sqrt(sum w_c^2 sigma_c^2) / sum w_c.
double aggregate_noise(std::span<const double> weights, std::span<const double> sigmas);

}  // namespace slidegym::grpo
