// Acceptance suite: runs every criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is the number of
// failed criteria.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "slidegym/grpo.hpp"
#include "slidegym/harness.hpp"

using namespace slidegym;
using namespace slidegym::testutil;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    std::string name;
    std::function<bool(std::string&)> run;
};

// 1. Feeding six reference models' published component scores through
// the weighted aggregate reproduces every published overall score.
bool table_consistency(std::string& detail) {
    const ComponentWeights weights;
    struct Row {
        const char* model;
        RewardBreakdown components;
        double expected;
    };
    const std::vector<Row> rows = {
        {"ref-a", {0.905, 0.958, 0.658, 0.539, 0.783, 0.530, 0.0}, 0.724},
        {"ref-b", {0.663, 0.708, 0.492, 0.397, 0.604, 0.412, 0.0}, 0.544},
        {"ref-c", {0.960, 1.000, 0.761, 0.568, 0.878, 0.616, 0.0}, 0.794},
        {"ref-d", {0.931, 1.000, 0.727, 0.550, 0.884, 0.567, 0.0}, 0.775},
        {"ref-e", {0.949, 1.000, 0.660, 0.546, 0.903, 0.615, 0.0}, 0.779},
        {"ref-f", {0.294, 0.309, 0.241, 0.184, 0.270, 0.199, 0.0}, 0.249},
    };
    std::ostringstream out;
    bool ok = true;
    for (const auto& row : rows) {
        const double aggregate = weighted_aggregate(row.components, weights);
        if (std::abs(aggregate - row.expected) > 0.002) {
            ok = false;
            out << row.model << " got " << aggregate << " want " << row.expected << "; ";
        }
    }
    detail = ok ? "all six overall-quality values reproduced within +/-0.002" : out.str();
    return ok;
}

// 2. Noise diversification with the published weights.
bool noise_diversification(std::string& detail) {
    const std::vector<double> weights = {1.0, 2.0, 1.5, 1.5, 2.0, 2.0};
    const std::vector<double> sigmas = {0.0, 0.0, 0.10, 0.10, 0.0, 0.10};
    const double sigma_agg = grpo::aggregate_noise(weights, sigmas);
    std::ostringstream out;
    out << "sigma_agg = " << sigma_agg;
    detail = out.str();
    return std::abs(sigma_agg - 0.029) <= 0.001;
}

// 3. The scripted exploit agent: 35 x review_deck.
bool collapse_arithmetic(std::string& detail) {
    SlideBrief brief;
    brief.id = "exploit";
    brief.topic = "Renewable Energy Adoption Trends";
    brief.audience = "executives";
    brief.num_slides = 7;
    brief.confidence = 0.4;

    SlideEnv env;
    env.reset(brief);
    int turns = 0;
    while (!env.state().terminated) {
        env.step(ToolCall{"review_deck", json::object()});
        ++turns;
    }
    const double cumulative = env.state().cumulative_reward;
    const double quality = env.current_quality();
    std::ostringstream out;
    out << turns << " turns, cumulative " << cumulative << ", quality " << quality;
    detail = out.str();
    return turns == 35 && std::abs(cumulative - 0.35) < 1e-12 && quality == 0.0;
}

// 4. Potential-based shaping telescopes over >= 1000 randomized episodes.
bool shaping_telescopes(std::string& detail) {
    std::mt19937_64 rng(424242);
    SlideBrief brief;
    brief.id = "telescope";
    brief.topic = "Cloud Cost Optimization";
    brief.audience = "executives";
    brief.num_slides = 4;
    brief.confidence = 0.8;
    brief.targets.max_turns = 8;

    std::uniform_int_distribution<int> tool_pick(0, 13);
    std::uniform_int_distribution<int> idx_pick(0, 3);
    double worst = 0.0;

    for (int episode = 0; episode < 1000; ++episode) {
        SlideEnv env;
        env.reset(brief);
        const double q_initial = env.current_quality();
        double action_sum = 0.0;
        while (!env.state().terminated) {
            const std::string& tool = tool_names()[static_cast<std::size_t>(tool_pick(rng))];
            json params;
            if (tool == "web_search") params["query"] = "cloud cost savings";
            if (tool == "fetch_url") params["url"] = "https://research.example/cloud/1";
            if (tool == "create_outline") {
                params["sections"] = json::array({json{{"title", "Cloud spend"}}});
            }
            if (tool == "revise_outline" || tool == "edit_slide") {
                params["slide_idx"] = idx_pick(rng);
            }
            if (tool == "generate_slide") {
                params["slide_idx"] = idx_pick(rng);
                params["title"] = "Cloud cost slide";
                params["sections"] =
                    json::array({json{{"heading", "H"}, {"body", "cloud rightsizing detail"}}});
            }
            if (tool == "set_theme") params["theme"] = episode % 2 ? "dark" : "neon";
            if (tool == "get_slide_content" || tool == "delete_slide" ||
                tool == "duplicate_slide") {
                params["idx"] = idx_pick(rng);
            }
            if (tool == "insert_slide") params["pos"] = idx_pick(rng);
            if (tool == "reorder_slides") {
                json order = json::array();
                for (int i = env.state().slide_count() - 1; i >= 0; --i) order.push_back(i);
                params["order"] = order;
            }
            action_sum += env.step(ToolCall{tool, params}).info.action_reward;
        }
        const double expected = (env.current_quality() - q_initial) + action_sum;
        worst = std::max(worst, std::abs(env.state().cumulative_reward - expected));
        if (worst > 1e-9) break;
    }
    std::ostringstream out;
    out << "1000 episodes, max |cumulative - ((Q_f - Q_i) + sum r_action)| = " << worst;
    detail = out.str();
    return worst <= 1e-9;
}

// 5. Brute-force oracle equivalence for the structural scores.
bool oracle_equivalence(std::string& detail) {
    const auto specs = oracle_grid_specs();
    SlideBrief brief = make_brief("grid", 3);
    double worst = 0.0;
    long decks = 0;

    auto check_render = [&](const std::vector<OracleSlide>& deck) {
        const EnvState state = make_state(brief, deck);
        worst = std::max(worst, std::abs(score_render_quality(state) -
                                         oracle_render_quality(deck, brief.num_slides)));
    };
    auto check_deck = [&](const std::vector<OracleSlide>& deck) {
        const EnvState state = make_state(brief, deck);
        worst = std::max(worst, std::abs(score_code_rules(state) -
                                         oracle_code_rules(deck, brief.targets)));
        worst = std::max(worst, std::abs(score_render_quality(state) -
                                         oracle_render_quality(deck, brief.num_slides)));
        ++decks;
    };

    for (const auto& a : specs) check_deck({{a, true, true}});
    for (const auto& a : specs) {
        for (const auto& b : specs) check_deck({{a, true, true}, {b, true, true}});
    }
    for (std::size_t off = 0; off < specs.size(); ++off) {
        std::vector<OracleSlide> deck3, deck4;
        for (std::size_t j = 0; j < 3; ++j) {
            deck3.push_back({specs[(off + j) % specs.size()], true, true});
        }
        for (std::size_t j = 0; j < 4; ++j) {
            deck4.push_back({specs[(off + j * 7) % specs.size()], true, true});
        }
        check_deck(deck3);
        check_deck(deck4);
    }
    // Rendered/validity variations feed the render-quality oracle only:
    // the deliberately corrupted markup has no spec-side word truth.
    for (int n = 1; n <= 4; ++n) {
        for (int rendered = 0; rendered <= n; ++rendered) {
            std::vector<OracleSlide> deck;
            for (int i = 0; i < n; ++i) {
                deck.push_back({specs[static_cast<std::size_t>(i * 13) % specs.size()],
                                i < rendered, i % 2 == 0});
            }
            check_render(deck);
            ++decks;
        }
    }

    std::ostringstream out;
    out << decks << " decks, max |impl - oracle| = " << worst;
    detail = out.str();
    return worst <= 1e-12;
}

// 6. GRPO numerics: gradient check, K=2 dichotomy, clip bound.
bool grpo_numerics(std::string& detail) {
    std::ostringstream out;
    bool ok = true;

    std::mt19937_64 rng(1618);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst_fd = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        grpo::ToyPolicy policy(8, 5);
        policy.randomize(rng, 0.6);
        std::vector<grpo::GrpoGroup> batch;
        std::uniform_int_distribution<int> action_dist(0, 7);
        for (int g = 0; g < 2; ++g) {
            grpo::GrpoGroup group;
            std::vector<double> rewards;
            for (int k = 0; k < 3; ++k) {
                grpo::Completion completion;
                completion.reward = unit(rng);
                rewards.push_back(completion.reward);
                for (int t = 0; t < 4; ++t) {
                    grpo::TokenRecord token;
                    token.features.resize(5);
                    for (double& f : token.features) f = unit(rng);
                    token.action = action_dist(rng);
                    token.old_logprob =
                        policy.logprob(token.features, token.action) + 0.3 * unit(rng);
                    completion.tokens.push_back(std::move(token));
                }
                group.completions.push_back(std::move(completion));
            }
            const auto advantages = grpo::compute_advantages(rewards, 1e-4);
            for (std::size_t i = 0; i < advantages.size(); ++i) {
                group.completions[i].advantage = advantages[i];
            }
            batch.push_back(std::move(group));
        }
        worst_fd = std::max(worst_fd, grpo::finite_difference_check(
                                          policy, batch, 1e-5, 0.0, nullptr, 0.2, 120,
                                          static_cast<std::uint64_t>(trial)));
    }
    out << "fd max rel err " << worst_fd;
    if (worst_fd > 1e-4) ok = false;

    // K=2 dichotomy.
    const auto adv = grpo::compute_advantages(std::vector<double>{0.9, 0.1}, 1e-4);
    if (std::abs(adv[0] - 1.0) > 1e-3 || std::abs(adv[1] + 1.0) > 1e-3) ok = false;
    const auto zero = grpo::compute_advantages(std::vector<double>{0.4, 0.4}, 1e-4);
    if (zero[0] != 0.0 || zero[1] != 0.0) ok = false;

    // Clip bound on 10^6 random inputs: the loss never undercuts
    // -(1+eps)|A|, and is two-sided for nonnegative advantages.
    std::uniform_real_distribution<double> ratio_dist(0.0, 4.0);
    std::uniform_real_distribution<double> adv_dist(-3.0, 3.0);
    int violations = 0;
    for (int i = 0; i < 1000000; ++i) {
        const double rho = ratio_dist(rng);
        const double a = adv_dist(rng);
        const double loss = grpo::clipped_token_loss(rho, a, 0.2);
        if (loss < -1.2 * std::abs(a) - 1e-12) ++violations;
        if (a >= 0.0 && std::abs(loss) > 1.2 * std::abs(a) + 1e-12) ++violations;
    }
    out << ", clip violations " << violations << "/1e6";
    if (violations != 0) ok = false;

    detail = out.str();
    return ok;
}

// 7. Graduated penalties.
bool graduated_penalties(std::string& detail) {
    SlideBrief brief;
    brief.id = "penalties";
    brief.topic = "MLOps Platform Review";
    brief.audience = "engineers";
    brief.num_slides = 6;
    brief.confidence = 0.7;

    const double no_json = grpo::completion_reward("We should research the topic first.", brief);
    const double failing =
        grpo::completion_reward(R"({"tool":"edit_slide","slide_idx":5})", brief);
    const double succeeding = grpo::completion_reward(
        json{{"tool", "create_outline"},
             {"sections", json::array({json{{"title", "MLOps intro"}}})}}.dump(),
        brief);
    std::ostringstream out;
    out << "no-json " << no_json << ", failing " << failing << ", succeeding " << succeeding;
    detail = out.str();
    return no_json == -2.0 && failing == -1.0 && succeeding >= 0.0;
}

// 8. Collapse reproduction and mitigation.
bool collapse_reproduction(std::string& detail) {
    grpo::CollapseConfig config;
    const grpo::CollapseReport report = grpo::run_collapse_experiment(config);

    bool ok = true;
    std::ostringstream out;
    out << "terminal P(review_deck) = " << report.terminal_p_review_deck;
    if (report.terminal_p_review_deck <= 0.9) ok = false;

    // Window averages trend upward toward the exploit value.
    for (std::size_t i = 1; i < report.windows.size(); ++i) {
        if (report.windows[i].avg < report.windows[i - 1].avg - 0.05) {
            ok = false;
            out << "; window " << i << " fell by more than 0.05";
        }
    }
    if (!report.windows.empty()) {
        const double first = report.windows.front().avg;
        const double last = report.windows.back().avg;
        out << ", window avg " << first << " -> " << last;
        if (last <= first || last <= 0.0) ok = false;
    }
    if (std::abs(report.scripted_cumulative_reward - 0.35) > 1e-12 ||
        report.scripted_aggregate_quality != 0.0) {
        ok = false;
        out << "; scripted exploit agent mismatch";
    }

    grpo::CollapseConfig mitigated = config;
    mitigated.review_deck_decay = 0.5;
    const grpo::CollapseReport mitigation = grpo::run_collapse_experiment(mitigated);
    out << "; mitigated P(review_deck) = " << mitigation.terminal_p_review_deck;
    if (mitigation.terminal_p_review_deck >= 0.5) ok = false;

    detail = out.str();
    return ok;
}

// 9. Hermetic 48-brief evaluation sweep.
bool hermetic_sweep(std::string& detail) {
    const auto started = std::chrono::steady_clock::now();

    const fs::path briefs_dir = fs::path(SLIDEGYM_SOURCE_DIR) / "data" / "briefs";
    const BriefCatalog catalog = load_catalog(briefs_dir);
    if (catalog.briefs.size() != 48) {
        detail = "expected 48 briefs, got " + std::to_string(catalog.briefs.size());
        return false;
    }

    const fs::path out_dir =
        fs::temp_directory_path() / ("slidegym-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(out_dir);

    EvalConfig config;
    config.run.export_dir = out_dir;
    const EvalReport report = evaluate({scripted_competent_spec()}, catalog, config);

    bool ok = true;
    std::ostringstream out;
    if (report.agents[0].completion_rate != 1.0) {
        ok = false;
        out << "completion rate " << report.agents[0].completion_rate << "; ";
    }

    // Every exported deck.html must validate.
    int decks = 0;
    for (const auto& brief : catalog.briefs) {
        const fs::path deck_path = out_dir / "scripted-competent" / brief.id / "deck.html";
        if (!fs::exists(deck_path)) {
            ok = false;
            out << "missing " << deck_path << "; ";
            continue;
        }
        std::ifstream in(deck_path);
        const std::string deck((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        if (!validate_html(deck).valid) {
            ok = false;
            out << brief.id << " deck.html invalid; ";
        }
        ++decks;
    }

    // Round-trippable rollouts.
    const fs::path rollouts = export_rollouts(report.trajectories, out_dir / "rollouts.jsonl");
    const auto imported = import_rollouts(rollouts);
    if (imported.size() != report.trajectories.size()) {
        ok = false;
        out << "rollout round trip lost records; ";
    } else {
        for (std::size_t i = 0; i < imported.size(); ++i) {
            if (!(imported[i] == report.trajectories[i])) {
                ok = false;
                out << "rollout " << i << " not identical after round trip; ";
                break;
            }
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out << decks << "/48 decks valid, overall quality " << report.agents[0].overall_quality
        << ", " << elapsed << "s";
    if (elapsed >= 60.0) ok = false;

    fs::remove_all(out_dir);
    detail = out.str();
    return ok;
}

// 10. Inverse-spec sanity.
bool inverse_spec_sanity(std::string& detail) {
    SlideBrief brief = make_brief("Series B Funding Pitch - AI-Powered Supply Chain Platform", 6,
                                  "venture capitalists");
    JudgeGateway judge;

    std::vector<OracleSlide> verbatim;
    for (int i = 0; i < brief.num_slides; ++i) {
        SlideSpec spec;
        spec.title = brief.topic;
        spec.sections = {{"Audience", i == 0 ? "Prepared for venture capitalists."
                                             : "Supply chain platform detail " +
                                                   std::to_string(i)}};
        verbatim.push_back({spec, true, true});
    }
    const double embedded =
        score_spec_reconstruction(make_state(brief, verbatim), judge).total;

    std::vector<OracleSlide> lorem;
    for (int i = 0; i < brief.num_slides; ++i) {
        SlideSpec spec;
        spec.title = "Lorem Ipsum Dolor";
        spec.sections = {{"Sit Amet", "consectetur adipiscing elit sed " + std::to_string(i)}};
        lorem.push_back({spec, true, true});
    }
    const double confused = score_spec_reconstruction(make_state(brief, lorem), judge).total;

    std::ostringstream out;
    out << "verbatim deck " << embedded << ", lorem deck " << confused;
    detail = out.str();
    return embedded >= 0.95 && confused <= 0.30;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Published overall-quality cross-check", table_consistency},
        {2, "Noise diversification", noise_diversification},
        {3, "Collapse arithmetic (scripted exploit agent)", collapse_arithmetic},
        {4, "Shaping telescoping over 1000 random episodes", shaping_telescopes},
        {5, "Reward oracle equivalence", oracle_equivalence},
        {6, "GRPO numerics", grpo_numerics},
        {7, "Graduated penalties", graduated_penalties},
        {8, "Collapse reproduction and mitigation", collapse_reproduction},
        {9, "Hermetic 48-brief sweep", hermetic_sweep},
        {10, "Inverse-spec sanity", inverse_spec_sanity},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto started = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::printf("[%s] %2d. %s (%.2fs) - %s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.name.c_str(), elapsed, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
