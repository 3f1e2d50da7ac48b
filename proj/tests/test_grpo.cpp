#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "slidegym/grpo.hpp"

using namespace slidegym;
using namespace slidegym::grpo;
using namespace slidegym::testutil;
using nlohmann::json;

namespace {

std::vector<double> random_features(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> f(static_cast<std::size_t>(dim));
    for (double& v : f) v = dist(rng);
    return f;
}

// A random but well-posed batch for gradient checks.
std::vector<GrpoGroup> random_batch(std::mt19937_64& rng, const ToyPolicy& policy, int groups,
                                    int k, int tokens) {
    std::uniform_real_distribution<double> reward_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    std::uniform_int_distribution<int> action_dist(0, policy.vocab_size() - 1);

    std::vector<GrpoGroup> batch;
    for (int g = 0; g < groups; ++g) {
        GrpoGroup group;
        std::vector<double> rewards;
        for (int i = 0; i < k; ++i) {
            Completion completion;
            completion.reward = reward_dist(rng);
            rewards.push_back(completion.reward);
            for (int t = 0; t < tokens; ++t) {
                TokenRecord token;
                token.features = random_features(rng, policy.feature_dim());
                token.action = action_dist(rng);
                // Slightly off-policy old logprobs exercise the clip.
                token.old_logprob = policy.logprob(token.features, token.action) + jitter(rng);
                token.mask = 1;
                completion.tokens.push_back(std::move(token));
            }
            group.completions.push_back(std::move(completion));
        }
        const auto advantages = compute_advantages(rewards, 1e-4);
        for (int i = 0; i < k; ++i) group.completions[static_cast<std::size_t>(i)].advantage = advantages[static_cast<std::size_t>(i)];
        batch.push_back(std::move(group));
    }
    return batch;
}

SlideBrief lab_brief() {
    SlideBrief brief;
    brief.id = "lab";
    brief.topic = "Edge Computing Adoption";
    brief.audience = "executives";
    brief.num_slides = 6;
    brief.confidence = 0.8;
    return brief;
}

}  // namespace

TEST_CASE("K=2 advantages are near-binary for unequal rewards") {
    const auto adv = compute_advantages(std::vector<double>{0.7, 0.3}, 1e-4);
    CHECK(adv[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(adv[1] == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(adv[0] + adv[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("equal rewards give zero advantages") {
    const auto adv = compute_advantages(std::vector<double>{0.5, 0.5, 0.5}, 1e-4);
    for (double a : adv) CHECK(a == 0.0);
}

TEST_CASE("K=4 advantages match the hand computation") {
    // mean 2.5, population sd sqrt(1.25).
    const auto adv = compute_advantages(std::vector<double>{1, 2, 3, 4}, 1e-4);
    CHECK(adv[0] == doctest::Approx(-1.342).epsilon(1e-3));
    CHECK(adv[1] == doctest::Approx(-0.447).epsilon(1e-3));
    CHECK(adv[2] == doctest::Approx(0.447).epsilon(1e-3));
    CHECK(adv[3] == doctest::Approx(1.342).epsilon(1e-3));
}

TEST_CASE("advantages are invariant under positive affine reward maps") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> rewards(4);
        for (double& r : rewards) r = dist(rng);
        if (std::abs(rewards[0] - rewards[1]) < 1e-6) rewards[0] += 1.0;
        std::vector<double> mapped(rewards);
        for (double& r : mapped) r = 3.0 * r + 0.7;
        const auto a = compute_advantages(rewards, 1e-12);
        const auto b = compute_advantages(mapped, 1e-12);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("advantage groups require K >= 2") {
    CHECK_THROWS_AS(compute_advantages(std::vector<double>{1.0}, 1e-4), std::invalid_argument);
}

TEST_CASE("token_logprob: uniform, peaked, and shift-invariant") {
    const std::vector<double> uniform(4, 0.0);
    CHECK(token_logprob(uniform, 2) == doctest::Approx(std::log(0.25)));

    const std::vector<double> peaked = {10.0, 0.0};
    CHECK(token_logprob(peaked, 0) == doctest::Approx(-4.54e-5).epsilon(1e-2));

    std::vector<double> shifted = {1.0, -0.5, 2.0};
    const double base = token_logprob(shifted, 1);
    for (double& z : shifted) z += 123.0;
    CHECK(token_logprob(shifted, 1) == doctest::Approx(base).epsilon(1e-12));

    CHECK_THROWS_AS(token_logprob(uniform, 7), std::out_of_range);
    CHECK_THROWS_AS(token_logprob(uniform, -1), std::out_of_range);
}

TEST_CASE("importance ratio") {
    CHECK(importance_ratio(-1.5, -1.5) == doctest::Approx(1.0));
    CHECK(importance_ratio(std::log(2.0) - 1.0, -1.0) == doctest::Approx(2.0));
}

TEST_CASE("clipped token loss branches") {
    CHECK(clipped_token_loss(1.0, 1.0, 0.2) == doctest::Approx(-1.0));
    CHECK(clipped_token_loss(1.5, 1.0, 0.2) == doctest::Approx(-1.2));   // clipped at 1.2
    CHECK(clipped_token_loss(0.5, -1.0, 0.2) == doctest::Approx(0.8));   // min(-0.5, -0.8)
}

TEST_CASE("clip bound holds on a million random inputs") {
    // The clip caps the improvement incentive: the loss never drops below
    // -(1+eps)|A|. For nonnegative advantages the bound is two-sided; for
    // negative advantages the pessimistic (unclipped) branch is free to
    // grow, which is the PPO objective working as intended.
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> ratio_dist(0.0, 4.0);
    std::uniform_real_distribution<double> adv_dist(-3.0, 3.0);
    const double eps = 0.2;
    int violations = 0;
    for (int i = 0; i < 1000000; ++i) {
        const double rho = ratio_dist(rng);
        const double adv = adv_dist(rng);
        const double loss = clipped_token_loss(rho, adv, eps);
        if (loss < -(1.0 + eps) * std::abs(adv) - 1e-12) ++violations;
        if (adv >= 0.0 && std::abs(loss) > (1.0 + eps) * std::abs(adv) + 1e-12) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("on-policy loss reduces to minus the mean advantage") {
    ToyPolicy policy(6, 4);
    std::mt19937_64 rng(3);
    policy.randomize(rng, 0.5);

    std::vector<GrpoGroup> batch(1);
    std::vector<double> rewards = {1.0, 0.0};
    for (int k = 0; k < 2; ++k) {
        Completion completion;
        completion.reward = rewards[static_cast<std::size_t>(k)];
        for (int t = 0; t < 3; ++t) {
            TokenRecord token;
            token.features = random_features(rng, 4);
            token.action = k;  // arbitrary
            token.old_logprob = policy.logprob(token.features, token.action);  // snapshot now
            completion.tokens.push_back(std::move(token));
        }
        batch[0].completions.push_back(std::move(completion));
    }
    const auto adv = compute_advantages(rewards, 1e-4);
    batch[0].completions[0].advantage = adv[0];
    batch[0].completions[1].advantage = adv[1];

    // All ratios are exactly 1, so the loss is -mean(A).
    const double loss = grpo_loss(batch, policy, 0.0);
    CHECK(loss == doctest::Approx(-(adv[0] + adv[1]) / 2.0).epsilon(1e-12));
}

TEST_CASE("single on-policy completion with A=+1 has loss -1") {
    ToyPolicy policy(4, 3);
    std::vector<GrpoGroup> batch(1);
    Completion completion;
    completion.advantage = 1.0;
    for (int t = 0; t < 2; ++t) {
        TokenRecord token;
        token.features = {1.0, 0.0, 0.5};
        token.action = t;
        token.old_logprob = policy.logprob(token.features, token.action);
        completion.tokens.push_back(std::move(token));
    }
    batch[0].completions.push_back(std::move(completion));
    CHECK(grpo_loss(batch, policy, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("padding tokens leave the loss unchanged") {
    ToyPolicy policy(5, 3);
    std::mt19937_64 rng(17);
    policy.randomize(rng, 0.3);
    auto batch = random_batch(rng, policy, 2, 2, 4);
    const double base = grpo_loss(batch, policy, 0.0);

    // Double every completion's tokens as mask-0 padding.
    for (auto& group : batch) {
        for (auto& completion : group.completions) {
            const auto original = completion.tokens;
            for (auto token : original) {
                token.mask = 0;
                completion.tokens.push_back(token);
            }
        }
    }
    CHECK(grpo_loss(batch, policy, 0.0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("beta=0.1 with reference equal to the policy matches beta=0") {
    ToyPolicy policy(5, 3);
    std::mt19937_64 rng(23);
    policy.randomize(rng, 0.4);
    const auto batch = random_batch(rng, policy, 2, 3, 3);
    const ToyPolicy reference = policy;
    CHECK(grpo_loss(batch, policy, 0.1, &reference) ==
          doctest::Approx(grpo_loss(batch, policy, 0.0)).epsilon(1e-12));
}

TEST_CASE("beta>0 without a reference is rejected") {
    ToyPolicy policy(3, 2);
    CHECK_THROWS_AS(grpo_loss({}, policy, 0.5), std::invalid_argument);
}

TEST_CASE("finite differences confirm the analytic gradient") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 5; ++trial) {
        ToyPolicy policy(8, 5);
        policy.randomize(rng, 0.6);
        const auto batch = random_batch(rng, policy, 2, 3, 4);
        const double err =
            finite_difference_check(policy, batch, 1e-5, 0.0, nullptr, 0.2, 120, trial);
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("finite differences also pass with a KL term") {
    std::mt19937_64 rng(999);
    ToyPolicy policy(6, 4);
    policy.randomize(rng, 0.5);
    ToyPolicy reference = policy;  // snapshot
    // Move the policy off the reference so KL > 0.
    std::vector<double> nudge(policy.weights().size(), 0.0);
    for (double& g : nudge) g = 0.05;
    policy.apply_gradient(nudge, 1.0);

    const auto batch = random_batch(rng, policy, 2, 2, 3);
    const double err =
        finite_difference_check(policy, batch, 1e-5, 0.3, &reference, 0.2, 120, 4);
    CHECK(err <= 1e-4);
}

TEST_CASE("all-zero-mask completions are excluded from the loss") {
    ToyPolicy policy(5, 3);
    std::mt19937_64 rng(41);
    policy.randomize(rng, 0.3);
    auto batch = random_batch(rng, policy, 1, 2, 3);
    const double base = grpo_loss(batch, policy, 0.0);

    // Append a third completion whose tokens are entirely padding.
    Completion padded = batch[0].completions[0];
    for (auto& token : padded.tokens) token.mask = 0;
    batch[0].completions.push_back(padded);
    CHECK(grpo_loss(batch, policy, 0.0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("zero-advantage batches have near-zero gradients") {
    std::mt19937_64 rng(31);
    ToyPolicy policy(6, 4);
    policy.randomize(rng, 0.5);
    auto batch = random_batch(rng, policy, 2, 2, 3);
    for (auto& group : batch) {
        for (auto& completion : group.completions) completion.advantage = 0.0;
    }
    const auto result = grpo_loss_with_grad(batch, policy, 0.0);
    for (double g : result.grad) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("positive-advantage actions gain probability after one step") {
    ToyPolicy policy(static_cast<int>(template_vocab().size()), kFeatureDim);
    SlideEnv env;
    env.reset(lab_brief());
    const auto features = policy_features(env.state());

    const int up_action = 2, down_action = 5;
    std::vector<GrpoGroup> batch(1);
    for (int k = 0; k < 2; ++k) {
        Completion completion;
        TokenRecord token;
        token.features = features;
        token.action = k == 0 ? up_action : down_action;
        token.old_logprob = policy.logprob(features, token.action);
        completion.tokens.push_back(std::move(token));
        completion.reward = k == 0 ? 1.0 : -1.0;
        batch[0].completions.push_back(std::move(completion));
    }
    const auto adv = compute_advantages(std::vector<double>{1.0, -1.0}, 1e-4);
    batch[0].completions[0].advantage = adv[0];
    batch[0].completions[1].advantage = adv[1];

    const double p_before = policy.probs(features)[up_action];
    const auto step = grpo_loss_with_grad(batch, policy, 0.0);
    policy.apply_gradient(step.grad, 0.05);
    const double p_after = policy.probs(features)[up_action];
    CHECK(p_after > p_before);
    CHECK(policy.probs(features)[down_action] < 1.0 / template_vocab().size());
}

TEST_CASE("completion_reward implements the graduated penalty ladder") {
    const SlideBrief brief = lab_brief();
    CHECK(completion_reward("I think we should make some slides.", brief) == -2.0);
    CHECK(completion_reward(R"({"tool":"edit_slide","slide_idx":5})", brief) == -1.0);
    CHECK(completion_reward(R"({"tool":"fly_to_moon"})", brief) == -2.0);  // unknown tool

    // A valid, succeeding call scores the aggregate of the resulting state;
    // oracle: replay the same action on a fresh env.
    const std::string outline_call = json{
        {"tool", "create_outline"},
        {"sections", json::array({json{{"title", "Edge computing intro"}}})}}.dump();
    const double reward = completion_reward(outline_call, brief);
    CHECK(reward >= 0.0);
    SlideEnv oracle_env;
    oracle_env.reset(brief);
    oracle_env.step(*SlideEnv::parse_tool_call(outline_call));
    JudgeGateway judge;
    CHECK(reward ==
          doctest::Approx(aggregate_rewards(oracle_env.state(), judge).aggregate).epsilon(1e-12));

    // review_deck on a fresh episode succeeds with zero quality.
    CHECK(completion_reward(R"({"tool":"review_deck"})", brief) == 0.0);
}

TEST_CASE("template vocabulary covers all 14 tools") {
    const auto& vocab = template_vocab();
    CHECK(vocab.size() >= 50);
    std::set<std::string> tools;
    for (const auto& tmpl : vocab) tools.insert(tmpl.tool);
    CHECK(tools.size() == 14);
    CHECK(review_deck_template_index() >= 0);
}

TEST_CASE("template expansion produces executable calls") {
    SlideEnv env;
    env.reset(lab_brief());
    // All expansions are well-formed ToolCalls (known tool, object params).
    for (const auto& tmpl : template_vocab()) {
        const ToolCall call = expand_template(tmpl, env.state());
        CHECK(is_known_tool(call.tool));
        CHECK(call.params.is_object());
    }
    // generate_slide_next appends in order.
    const auto& vocab = template_vocab();
    for (const auto& tmpl : vocab) {
        if (tmpl.name == "generate_slide_next") {
            const ExecOutcome outcome = env.execute_tool(expand_template(tmpl, env.state()));
            CHECK(outcome.success);
            CHECK(env.state().slide_count() == 1);
        }
    }
}

TEST_CASE("policy features are one-hot blocks plus bias") {
    SlideEnv env;
    env.reset(lab_brief());
    const auto features = policy_features(env.state());
    REQUIRE(static_cast<int>(features.size()) == kFeatureDim);
    CHECK(features[0] == 1.0);                      // research phase
    CHECK(features[5] == 1.0);                      // zero slides
    CHECK(features[10] == 1.0);                     // full budget remaining
    CHECK(features[kFeatureDim - 1] == 1.0);        // bias
    double sum = 0.0;
    for (double f : features) sum += f;
    CHECK(sum == 4.0);
}

TEST_CASE("train on the completion ladder improves the mean reward") {
    ToyPolicy policy(static_cast<int>(template_vocab().size()), kFeatureDim);
    TrainOptions options;
    options.grpo.steps = 60;
    options.grpo.k = 2;
    options.grpo.learning_rate = 0.2;
    options.grpo.seed = 12;
    options.groups_per_step = 4;
    options.signal = RewardSignal::CompletionLadder;
    options.param_slip_prob = 0.2;

    const auto log = train(policy, {lab_brief()}, options);
    REQUIRE(static_cast<int>(log.size()) == options.grpo.steps);
    double early = 0.0, late = 0.0;
    for (int i = 0; i < 10; ++i) early += log[static_cast<std::size_t>(i)].avg;
    for (int i = 0; i < 10; ++i) late += log[log.size() - 1 - static_cast<std::size_t>(i)].avg;
    CHECK(late / 10.0 > early / 10.0);
}

TEST_CASE("training is deterministic given a seed") {
    auto run = [](std::uint64_t seed) {
        ToyPolicy policy(static_cast<int>(template_vocab().size()), kFeatureDim);
        TrainOptions options;
        options.grpo.steps = 8;
        options.grpo.seed = seed;
        options.groups_per_step = 2;
        options.seq_len = 4;
        const auto log = train(policy, {lab_brief()}, options);
        return std::make_pair(policy.weights(), log.back().avg);
    };
    const auto a = run(99);
    const auto b = run(99);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    const auto c = run(100);
    CHECK(a.first != c.first);
}

TEST_CASE("snr and aggregate noise") {
    CHECK(snr(0.2, 0.1).value == doctest::Approx(4.0));
    CHECK_FALSE(snr(0.2, 0.1).infinite);
    CHECK(snr(0.5, 0.0).infinite);
    CHECK_THROWS_AS(snr(-1.0, 0.1), std::invalid_argument);

    // Published weights; the three LLM-backed components carry sigma=0.10.
    const std::vector<double> weights = {1.0, 2.0, 1.5, 1.5, 2.0, 2.0};
    const std::vector<double> sigmas = {0.0, 0.0, 0.10, 0.10, 0.0, 0.10};
    CHECK(std::abs(aggregate_noise(weights, sigmas) - 0.029) <= 0.001);

    const std::vector<double> zero_sigmas(6, 0.0);
    CHECK(aggregate_noise(weights, zero_sigmas) == 0.0);
    CHECK_THROWS_AS(aggregate_noise(weights, std::vector<double>{0.1}), std::invalid_argument);
}

TEST_CASE("window table formatting mirrors the training log") {
    CollapseReport report;
    report.windows.push_back({0, 49, -0.953, -1.188, -0.750, 0.2});
    report.windows.push_back({50, 99, -0.125, -0.375, 0.000, 0.8});
    const std::string table = report.format_window_table();
    CHECK(table.find("Steps") != std::string::npos);
    CHECK(table.find("-0.953") != std::string::npos);
    CHECK(table.find("P(review_deck)") != std::string::npos);
}
