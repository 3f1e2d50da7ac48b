#include "slidegym/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "slidegym/text.hpp"

namespace slidegym::grpo {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

std::vector<double> policy_features(const EnvState& state) {
    std::vector<double> f(kFeatureDim, 0.0);

    f[static_cast<std::size_t>(static_cast<int>(state.phase))] = 1.0;

    const int n = state.slide_count();
    int slide_bucket;
    if (n == 0) slide_bucket = 0;
    else if (n == 1) slide_bucket = 1;
    else if (n == 2) slide_bucket = 2;
    else if (n <= 5) slide_bucket = 3;
    else slide_bucket = 4;
    f[static_cast<std::size_t>(5 + slide_bucket)] = 1.0;

    const double remaining = std::max(0, state.step_budget - state.step_count);
    const double frac = state.step_budget > 0 ? remaining / state.step_budget : 0.0;
    int turns_bucket;
    if (frac >= 0.75) turns_bucket = 0;
    else if (frac >= 0.5) turns_bucket = 1;
    else if (frac >= 0.25) turns_bucket = 2;
    else turns_bucket = 3;
    f[static_cast<std::size_t>(10 + turns_bucket)] = 1.0;

    f[14] = 1.0;  // bias
    return f;
}

// ---------------------------------------------------------------------------
// Template vocabulary
// ---------------------------------------------------------------------------

namespace {

std::vector<ActionTemplate> build_vocab() {
    std::vector<ActionTemplate> vocab;
    auto add = [&vocab](std::string name, std::string tool, int slot) {
        vocab.push_back({std::move(name), std::move(tool), slot});
    };

    add("web_search_topic", "web_search", 0);
    add("web_search_stats", "web_search", 1);
    add("web_search_market", "web_search", 2);
    add("web_search_audience", "web_search", 3);
    add("web_search_trends", "web_search", 4);
    add("web_search_forecast", "web_search", 5);
    add("web_search_news", "web_search", 6);    // generic: provider misses
    add("web_search_trivia", "web_search", 7);  // generic: provider misses
    for (int i = 0; i < 3; ++i) add("fetch_url_" + std::to_string(i), "fetch_url", i);
    add("fetch_url_bad", "fetch_url", 9);
    add("create_outline_3", "create_outline", 3);
    add("create_outline_5", "create_outline", 5);
    add("create_outline_target", "create_outline", 0);
    add("create_outline_research", "create_outline", -1);
    for (int i = 0; i < 5; ++i) add("revise_outline_" + std::to_string(i), "revise_outline", i);
    add("generate_slide_next", "generate_slide", -1);
    add("generate_slide_next_cited", "generate_slide", -2);
    for (int i = 0; i < 5; ++i) add("generate_slide_at_" + std::to_string(i), "generate_slide", i);
    for (int i = 0; i < 5; ++i) add("edit_slide_" + std::to_string(i), "edit_slide", i);
    {
        int slot = 0;
        for (const auto& name : theme_names()) add("set_theme_" + name, "set_theme", slot++);
    }
    add("set_theme_hint", "set_theme", -1);
    for (int i = 0; i < 4; ++i) add("get_slide_content_" + std::to_string(i), "get_slide_content", i);
    for (int i = 0; i < 4; ++i) add("delete_slide_" + std::to_string(i), "delete_slide", i);
    for (int i = 0; i < 4; ++i) add("duplicate_slide_" + std::to_string(i), "duplicate_slide", i);
    for (int i = 0; i < 4; ++i) add("insert_slide_" + std::to_string(i), "insert_slide", i);
    add("reorder_reverse", "reorder_slides", 0);
    add("reorder_swap01", "reorder_slides", 1);
    add("review_deck", "review_deck", 0);
    add("finalize", "finalize", 0);
    return vocab;
}

const std::vector<std::string>& canned_headings() {
    static const std::vector<std::string> kHeadings = {
        "Overview", "Key Points", "Analysis", "Outlook",  "Risks",
        "Timeline", "Metrics",    "Strategy", "Findings", "Summary",
    };
    return kHeadings;
}

std::string take_words(const std::string& source, std::size_t offset_words, std::size_t count) {
    std::istringstream in(source);
    std::string word, out;
    std::size_t idx = 0;
    while (in >> word) {
        if (idx >= offset_words && idx < offset_words + count) {
            if (!out.empty()) out += ' ';
            out += word;
        }
        ++idx;
    }
    return out;
}

std::vector<std::string> research_urls(const EnvState& state) {
    std::vector<std::string> urls;
    for (const auto& record : state.research_context) {
        std::size_t pos = 0;
        while ((pos = record.result.find("https://", pos)) != std::string::npos) {
            std::size_t end = pos;
            while (end < record.result.size() &&
                   !std::isspace(static_cast<unsigned char>(record.result[end]))) {
                ++end;
            }
            urls.push_back(record.result.substr(pos, end - pos));
            pos = end;
        }
    }
    return urls;
}

json outline_sections_from_brief(const EnvState& state, int count) {
    const std::string facts = state.brief.flatten_content().empty()
                                  ? state.brief.topic + " context for " + state.brief.audience
                                  : state.brief.flatten_content();
    json sections = json::array();
    for (int i = 0; i < count; ++i) {
        const std::string& heading =
            canned_headings()[static_cast<std::size_t>(i) % canned_headings().size()];
        sections.push_back(
            json{{"title", heading + ": " + state.brief.topic},
                 {"bullet_points",
                  json::array({take_words(facts, static_cast<std::size_t>(i) * 6, 8)})}});
    }
    return sections;
}

json slide_sections(const EnvState& state, int slide_idx, bool cited) {
    const int target = std::max(1, state.brief.targets.sections_per_slide);
    const int words_per_body =
        std::max(4, state.brief.targets.words_per_slide / std::max(1, target) - 4);

    json sections = json::array();
    for (int s = 0; s < target; ++s) {
        std::string heading;
        if (slide_idx < static_cast<int>(state.outline.size())) {
            const auto& entry = state.outline[static_cast<std::size_t>(slide_idx)];
            heading = s < static_cast<int>(entry.bullet_points.size())
                          ? take_words(entry.bullet_points[static_cast<std::size_t>(s)], 0, 4)
                          : canned_headings()[static_cast<std::size_t>(s) % canned_headings().size()];
        } else {
            heading = canned_headings()[static_cast<std::size_t>(s) % canned_headings().size()];
        }

        std::string body;
        if (cited && !state.research_context.empty()) {
            const auto& record = state.research_context[static_cast<std::size_t>(slide_idx + s) %
                                                        state.research_context.size()];
            body = take_words(record.result, static_cast<std::size_t>(s) * 3,
                              static_cast<std::size_t>(words_per_body));
        } else {
            const std::string facts = state.brief.topic + " for " + state.brief.audience + ". " +
                                      state.brief.flatten_content();
            body = take_words(facts, static_cast<std::size_t>((slide_idx + s) * 5),
                              static_cast<std::size_t>(words_per_body));
            if (body.empty()) body = take_words(facts, 0, static_cast<std::size_t>(words_per_body));
        }
        sections.push_back(json{{"heading", heading}, {"body", body}});
    }
    return sections;
}

std::string slide_title(const EnvState& state, int slide_idx) {
    if (slide_idx < static_cast<int>(state.outline.size())) {
        return state.outline[static_cast<std::size_t>(slide_idx)].title;
    }
    return state.brief.topic + " (part " + std::to_string(slide_idx + 1) + ")";
}

}  // namespace

const std::vector<ActionTemplate>& template_vocab() {
    static const std::vector<ActionTemplate> kVocab = build_vocab();
    return kVocab;
}

int review_deck_template_index() {
    const auto& vocab = template_vocab();
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        if (vocab[i].tool == "review_deck") return static_cast<int>(i);
    }
    return -1;
}

ToolCall expand_template(const ActionTemplate& tmpl, const EnvState& state) {
    ToolCall call;
    call.tool = tmpl.tool;
    json& p = call.params;

    if (tmpl.tool == "web_search") {
        static const char* kSuffixes[] = {"",        " statistics", " market analysis",
                                          "",        " trends",     " forecast 2026"};
        switch (tmpl.slot) {
            case 3: p["query"] = state.brief.topic + " for " + state.brief.audience; break;
            case 6: p["query"] = "latest breaking news today"; break;
            case 7: p["query"] = "celebrity gossip roundup"; break;
            default: p["query"] = state.brief.topic + kSuffixes[tmpl.slot % 6]; break;
        }
    } else if (tmpl.tool == "fetch_url") {
        if (tmpl.slot == 9) {
            p["url"] = "ftp://nowhere.invalid/doc";
        } else {
            const auto urls = research_urls(state);
            p["url"] = tmpl.slot < static_cast<int>(urls.size())
                           ? urls[static_cast<std::size_t>(tmpl.slot)]
                           : "https://missing.example/" + std::to_string(tmpl.slot);
        }
    } else if (tmpl.tool == "create_outline") {
        if (tmpl.slot == -1) {
            json sections = json::array();
            int used = 0;
            for (const auto& record : state.research_context) {
                if (used++ == 5) break;
                sections.push_back(
                    json{{"title", take_words(record.query_or_url, 0, 6)},
                         {"bullet_points", json::array({take_words(record.result, 0, 12)})}});
            }
            p["sections"] = sections;  // empty without research: a failing call
        } else {
            const int count = tmpl.slot == 0 ? state.brief.num_slides : tmpl.slot;
            p["sections"] = outline_sections_from_brief(state, count);
        }
    } else if (tmpl.tool == "revise_outline") {
        p["slide_idx"] = tmpl.slot;
        p["title"] = "Revised: " + slide_title(state, tmpl.slot);
    } else if (tmpl.tool == "generate_slide") {
        const int idx = tmpl.slot < 0 ? state.slide_count() : tmpl.slot;
        p["slide_idx"] = idx;
        p["title"] = slide_title(state, idx);
        p["sections"] = slide_sections(state, idx, tmpl.slot == -2);
    } else if (tmpl.tool == "edit_slide") {
        p["slide_idx"] = tmpl.slot;
    } else if (tmpl.tool == "set_theme") {
        if (tmpl.slot == -1) {
            p["theme"] = state.brief.theme_hint.value_or("");
        } else {
            p["theme"] = theme_names()[static_cast<std::size_t>(tmpl.slot)];
        }
    } else if (tmpl.tool == "get_slide_content" || tmpl.tool == "delete_slide" ||
               tmpl.tool == "duplicate_slide") {
        p["idx"] = tmpl.slot;
    } else if (tmpl.tool == "insert_slide") {
        p["pos"] = tmpl.slot;
    } else if (tmpl.tool == "reorder_slides") {
        const int n = state.slide_count();
        json order = json::array();
        if (tmpl.slot == 0) {
            for (int i = n - 1; i >= 0; --i) order.push_back(i);
        } else if (n >= 2) {
            order.push_back(1);
            order.push_back(0);
            for (int i = 2; i < n; ++i) order.push_back(i);
        } else {
            order.push_back(99);  // invalid on purpose
        }
        p["order"] = order;
    }
    // review_deck and finalize take no parameters.
    return call;
}

// ---------------------------------------------------------------------------
// ToyPolicy
// ---------------------------------------------------------------------------

ToyPolicy::ToyPolicy(int vocab_size, int feature_dim)
    : vocab_size_(vocab_size),
      feature_dim_(feature_dim),
      weights_(static_cast<std::size_t>(vocab_size) * feature_dim, 0.0) {}

std::vector<double> ToyPolicy::logits(std::span<const double> features) const {
    std::vector<double> z(static_cast<std::size_t>(vocab_size_), 0.0);
    for (int v = 0; v < vocab_size_; ++v) {
        double acc = 0.0;
        const double* row = weights_.data() + index(v, 0);
        for (int f = 0; f < feature_dim_; ++f) acc += row[f] * features[static_cast<std::size_t>(f)];
        z[static_cast<std::size_t>(v)] = acc;
    }
    return z;
}

std::vector<double> ToyPolicy::probs(std::span<const double> features) const {
    std::vector<double> z = logits(features);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

double ToyPolicy::logprob(std::span<const double> features, int action) const {
    const std::vector<double> z = logits(features);
    return token_logprob(z, action);
}

int ToyPolicy::sample(std::span<const double> features, std::mt19937_64& rng) const {
    const std::vector<double> p = probs(features);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(rng);
    for (int v = 0; v < vocab_size_; ++v) {
        u -= p[static_cast<std::size_t>(v)];
        if (u <= 0.0) return v;
    }
    return vocab_size_ - 1;
}

void ToyPolicy::apply_gradient(std::span<const double> grad, double learning_rate) {
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] -= learning_rate * grad[i];
}

void ToyPolicy::randomize(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> dist(0.0, scale);
    for (double& w : weights_) w = dist(rng);
}

// ---------------------------------------------------------------------------
// GRPO math
// ---------------------------------------------------------------------------

std::vector<double> compute_advantages(std::span<const double> rewards, double eps_adv) {
    if (rewards.size() < 2) throw std::invalid_argument("advantage groups need K >= 2");
    const double k = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / k;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double stddev = std::sqrt(var / k);  // population standard deviation
    std::vector<double> advantages(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        advantages[i] = (rewards[i] - mean) / (stddev + eps_adv);
    }
    return advantages;
}

double token_logprob(std::span<const double> logits, int token) {
    if (token < 0 || token >= static_cast<int>(logits.size())) {
        throw std::out_of_range("token index out of range");
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    return logits[static_cast<std::size_t>(token)] - zmax - std::log(sum);
}

double importance_ratio(double logp_new, double logp_old) {
    return std::exp(logp_new - logp_old);
}

double clipped_token_loss(double ratio, double advantage, double eps_clip) {
    const double clipped = std::clamp(ratio, 1.0 - eps_clip, 1.0 + eps_clip);
    return -std::min(ratio * advantage, clipped * advantage);
}

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double lse = zmax + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

// Loss (and optionally its analytic gradient) for one batch. The policy
// term is the mean over included completions of the mask-weighted mean
// token loss; the optional KL term is averaged over the batch's masked
// tokens.
double eval_loss(const std::vector<GrpoGroup>& batch, const ToyPolicy& policy, double beta,
                 const ToyPolicy* reference, double eps_clip, std::vector<double>* grad) {
    if (beta > 0.0 && reference == nullptr) {
        throw std::invalid_argument("beta > 0 requires a reference policy");
    }
    if (grad) grad->assign(policy.weights().size(), 0.0);

    int included = 0;
    long kl_tokens = 0;
    for (const auto& group : batch) {
        for (const auto& completion : group.completions) {
            int mask_sum = 0;
            for (const auto& token : completion.tokens) mask_sum += token.mask != 0 ? 1 : 0;
            if (mask_sum > 0) {
                ++included;
                kl_tokens += mask_sum;
            } else if (!completion.tokens.empty()) {
                std::cerr << "slidegym: grpo_loss skipping completion with all-zero mask"
                          << std::endl;
            }
        }
    }
    if (included == 0) return 0.0;

    const int feat_dim = policy.feature_dim();
    const int vocab = policy.vocab_size();
    double policy_term = 0.0;

    for (const auto& group : batch) {
        for (const auto& completion : group.completions) {
            int mask_sum = 0;
            for (const auto& token : completion.tokens) mask_sum += token.mask != 0 ? 1 : 0;
            if (mask_sum == 0) continue;

            double completion_loss = 0.0;
            for (const auto& token : completion.tokens) {
                if (token.mask == 0) continue;
                const std::vector<double> lsm = log_softmax(policy.logits(token.features));
                const double lp_new = lsm[static_cast<std::size_t>(token.action)];
                const double rho = importance_ratio(lp_new, token.old_logprob);
                const double advantage = completion.advantage;
                completion_loss += clipped_token_loss(rho, advantage, eps_clip);

                // The clip zeroes the gradient whenever the clipped branch
                // is strictly smaller.
                const double unclipped = rho * advantage;
                const double clipped =
                    std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip) * advantage;
                if (grad && unclipped <= clipped) {
                    const double scale =
                        -advantage * rho / (static_cast<double>(mask_sum) * included);
                    for (int v = 0; v < vocab; ++v) {
                        const double p_v = std::exp(lsm[static_cast<std::size_t>(v)]);
                        const double coeff =
                            scale * ((v == token.action ? 1.0 : 0.0) - p_v);
                        if (coeff == 0.0) continue;
                        double* row = grad->data() + static_cast<std::size_t>(v) * feat_dim;
                        for (int f = 0; f < feat_dim; ++f) {
                            row[f] += coeff * token.features[static_cast<std::size_t>(f)];
                        }
                    }
                }
            }
            policy_term += completion_loss / mask_sum;
        }
    }

    double loss = policy_term / included;

    if (beta > 0.0 && kl_tokens > 0) {
        double kl_sum = 0.0;
        for (const auto& group : batch) {
            for (const auto& completion : group.completions) {
                for (const auto& token : completion.tokens) {
                    if (token.mask == 0) continue;
                    const std::vector<double> lsm_p = log_softmax(policy.logits(token.features));
                    const std::vector<double> lsm_q =
                        log_softmax(reference->logits(token.features));
                    double kl_t = 0.0;
                    for (int v = 0; v < vocab; ++v) {
                        kl_t += std::exp(lsm_p[static_cast<std::size_t>(v)]) *
                                (lsm_p[static_cast<std::size_t>(v)] -
                                 lsm_q[static_cast<std::size_t>(v)]);
                    }
                    kl_sum += kl_t;
                    if (grad) {
                        const double token_scale = beta / static_cast<double>(kl_tokens);
                        for (int v = 0; v < vocab; ++v) {
                            const double p_v = std::exp(lsm_p[static_cast<std::size_t>(v)]);
                            const double dkl_dz =
                                p_v * ((lsm_p[static_cast<std::size_t>(v)] -
                                        lsm_q[static_cast<std::size_t>(v)]) -
                                       kl_t);
                            double* row = grad->data() + static_cast<std::size_t>(v) * feat_dim;
                            for (int f = 0; f < feat_dim; ++f) {
                                row[f] += token_scale * dkl_dz *
                                          token.features[static_cast<std::size_t>(f)];
                            }
                        }
                    }
                }
            }
        }
        loss += beta * (kl_sum / static_cast<double>(kl_tokens));
    }
    return loss;
}

}  // namespace

double grpo_loss(const std::vector<GrpoGroup>& batch, const ToyPolicy& policy, double beta,
                 const ToyPolicy* reference, double eps_clip) {
    return eval_loss(batch, policy, beta, reference, eps_clip, nullptr);
}

LossAndGrad grpo_loss_with_grad(const std::vector<GrpoGroup>& batch, const ToyPolicy& policy,
                                double beta, const ToyPolicy* reference, double eps_clip) {
    LossAndGrad result;
    result.loss = eval_loss(batch, policy, beta, reference, eps_clip, &result.grad);
    return result;
}

double finite_difference_check(ToyPolicy& policy, const std::vector<GrpoGroup>& batch, double h,
                               double beta, const ToyPolicy* reference, double eps_clip,
                               int sample_coords, std::uint64_t seed) {
    if (h <= 0.0) throw std::invalid_argument("finite_difference_check requires h > 0");
    const LossAndGrad analytic = grpo_loss_with_grad(batch, policy, beta, reference, eps_clip);

    std::vector<std::size_t> coords(policy.weights().size());
    std::iota(coords.begin(), coords.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    if (static_cast<int>(coords.size()) > sample_coords) {
        coords.resize(static_cast<std::size_t>(sample_coords));
    }

    double max_rel_error = 0.0;
    auto& weights = policy.weights();
    for (std::size_t idx : coords) {
        const double original = weights[idx];
        weights[idx] = original + h;
        const double loss_plus = grpo_loss(batch, policy, beta, reference, eps_clip);
        weights[idx] = original - h;
        const double loss_minus = grpo_loss(batch, policy, beta, reference, eps_clip);
        weights[idx] = original;

        const double numeric = (loss_plus - loss_minus) / (2.0 * h);
        const double a = analytic.grad[idx];
        const double denom = std::max(std::abs(a), std::abs(numeric));
        if (denom < 1e-7) continue;  // both effectively zero
        max_rel_error = std::max(max_rel_error, std::abs(a - numeric) / denom);
    }
    return max_rel_error;
}

// ---------------------------------------------------------------------------
// Completion reward (graduated penalties)
// ---------------------------------------------------------------------------

double completion_reward(std::string_view completion, const SlideBrief& brief,
                         const EnvConfig& env_config) {
    SlideEnv env(env_config);
    env.reset(brief);
    const auto call = SlideEnv::parse_tool_call(completion);
    if (!call) return -2.0;  // no valid JSON tool call
    const StepResult result = env.step(*call);
    if (!result.observation.success) return -1.0;  // valid call, failed execution
    return env.current_quality();
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

json TrainRecord::to_json() const {
    return json{{"step", step},           {"avg", avg},
                {"min", min},             {"max", max},
                {"entropy", entropy},     {"p_review_deck", p_review_deck}};
}

namespace {

// Deterministically corrupt a call the way a sloppy emitter would: bad
// indices, empty queries, unknown themes. Zero-parameter tools never reach
// here.
ToolCall corrupt_call(const ToolCall& call) {
    ToolCall bad = call;
    if (bad.tool == "web_search") {
        bad.params["query"] = "";
    } else if (bad.tool == "fetch_url") {
        bad.params["url"] = "https://missing.example/slipped";
    } else if (bad.tool == "create_outline") {
        bad.params["sections"] = json::array();
    } else if (bad.tool == "set_theme") {
        bad.params["theme"] = "neon";
    } else if (bad.tool == "reorder_slides") {
        bad.params["order"] = json::array({97});
    } else if (bad.params.contains("slide_idx")) {
        bad.params["slide_idx"] = 97;
    } else if (bad.params.contains("idx")) {
        bad.params["idx"] = 97;
    } else if (bad.params.contains("pos")) {
        bad.params["pos"] = 97;
    }
    return bad;
}

// The slip model gives productive tools their failure risk: zero-parameter
// meta tools cannot slip, read-only and research calls slip rarely, and
// every state-mutating call carries the full base rate.
double slip_probability(const std::string& tool, double base) {
    if (tool == "review_deck" || tool == "finalize") return 0.0;
    if (tool == "web_search" || tool == "fetch_url" || tool == "get_slide_content") {
        return base * 0.2;
    }
    return base;
}

}  // namespace

std::vector<TrainRecord> train(ToyPolicy& policy, const std::vector<SlideBrief>& briefs,
                               const TrainOptions& options) {
    if (briefs.empty()) throw std::invalid_argument("train requires at least one brief");
    const auto& vocab = template_vocab();
    if (policy.vocab_size() != static_cast<int>(vocab.size()) ||
        policy.feature_dim() != kFeatureDim) {
        throw std::invalid_argument("policy dimensions do not match the template vocabulary");
    }

    std::mt19937_64 rng(options.grpo.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int review_idx = review_deck_template_index();

    std::optional<ToyPolicy> reference;
    if (options.grpo.beta > 0.0) reference = policy;  // frozen snapshot

    EnvConfig env_config = options.env_config;
    env_config.review_deck_decay = options.review_deck_decay;

    std::vector<TrainRecord> log;
    log.reserve(static_cast<std::size_t>(options.grpo.steps));

    for (int step = 0; step < options.grpo.steps; ++step) {
        std::vector<GrpoGroup> batch;
        std::vector<double> all_rewards;
        std::map<int, int> action_counts;
        long total_actions = 0;
        long review_actions = 0;

        for (int g = 0; g < options.groups_per_step; ++g) {
            const SlideBrief& brief =
                briefs[static_cast<std::size_t>(step * options.groups_per_step + g) %
                       briefs.size()];
            GrpoGroup group;
            std::vector<double> rewards;

            for (int k = 0; k < options.grpo.k; ++k) {
                Completion completion;
                SlideEnv env(env_config);
                env.reset(brief);

                if (options.signal == RewardSignal::CompletionLadder) {
                    const auto features = policy_features(env.state());
                    const int action = policy.sample(features, rng);
                    TokenRecord token{features, action, policy.logprob(features, action), 1};
                    completion.tokens.push_back(std::move(token));
                    ++action_counts[action];
                    ++total_actions;
                    if (action == review_idx) ++review_actions;

                    std::string text;
                    const bool slip =
                        unit(rng) < slip_probability(vocab[static_cast<std::size_t>(action)].tool,
                                                     options.param_slip_prob);
                    const ToolCall call =
                        expand_template(vocab[static_cast<std::size_t>(action)], env.state());
                    if (slip && unit(rng) < 0.5) {
                        text = "Let me think about what to do next.";  // no JSON: -2.0
                    } else if (slip) {
                        json obj = corrupt_call(call).params;
                        obj["tool"] = call.tool;
                        text = obj.dump();
                    } else {
                        json obj = call.params;
                        obj["tool"] = call.tool;
                        text = obj.dump();
                    }
                    completion.reward = completion_reward(text, brief, env_config);
                } else {
                    double total = 0.0;
                    for (int t = 0; t < options.seq_len && !env.state().terminated; ++t) {
                        const auto features = policy_features(env.state());
                        const int action = policy.sample(features, rng);
                        TokenRecord token{features, action, policy.logprob(features, action), 1};
                        completion.tokens.push_back(std::move(token));
                        ++action_counts[action];
                        ++total_actions;
                        if (action == review_idx) ++review_actions;

                        ToolCall call =
                            expand_template(vocab[static_cast<std::size_t>(action)], env.state());
                        if (unit(rng) < slip_probability(call.tool, options.param_slip_prob)) {
                            call = corrupt_call(call);
                        }
                        total += env.step(call).reward;
                    }
                    completion.reward = total;
                }
                rewards.push_back(completion.reward);
                all_rewards.push_back(completion.reward);
                group.completions.push_back(std::move(completion));
            }

            const auto advantages = compute_advantages(rewards, options.grpo.eps_adv);
            for (std::size_t i = 0; i < group.completions.size(); ++i) {
                group.completions[i].advantage = advantages[i];
            }
            batch.push_back(std::move(group));
        }

        const LossAndGrad step_loss = grpo_loss_with_grad(
            batch, policy, options.grpo.beta, reference ? &*reference : nullptr,
            options.grpo.eps_clip);
        if (!std::isfinite(step_loss.loss)) {
            std::ostringstream diag;
            diag << "non-finite grpo loss at step " << step << "; rewards:";
            for (double r : all_rewards) diag << ' ' << r;
            throw std::runtime_error(diag.str());
        }
        policy.apply_gradient(step_loss.grad, options.grpo.learning_rate);

        TrainRecord record;
        record.step = step;
        record.avg = std::accumulate(all_rewards.begin(), all_rewards.end(), 0.0) /
                     static_cast<double>(all_rewards.size());
        record.min = *std::min_element(all_rewards.begin(), all_rewards.end());
        record.max = *std::max_element(all_rewards.begin(), all_rewards.end());
        double entropy = 0.0;
        for (const auto& [action, count] : action_counts) {
            const double p = static_cast<double>(count) / static_cast<double>(total_actions);
            entropy -= p * std::log(p);
        }
        record.entropy = entropy;
        record.p_review_deck =
            total_actions > 0 ? static_cast<double>(review_actions) / total_actions : 0.0;
        log.push_back(record);
    }
    return log;
}

// ---------------------------------------------------------------------------
// Collapse experiment
// ---------------------------------------------------------------------------

CollapseConfig::CollapseConfig() {
    brief.id = "collapse-lab";
    brief.topic = "Renewable Energy Adoption Trends";
    brief.audience = "executives";
    brief.num_slides = 7;
    brief.confidence = 0.4;
    brief.content = json::object();  // open-ended: research is the only source
}

std::string CollapseReport::format_window_table() const {
    std::ostringstream out;
    out << "Steps      Avg      Min      Max      P(review_deck)\n";
    for (const auto& w : windows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%3d-%-5d  %+.3f   %+.3f   %+.3f   %.3f\n",
                      w.first_step, w.last_step, w.avg, w.min, w.max, w.p_review_deck);
        out << line;
    }
    return out.str();
}

CollapseReport run_collapse_experiment(const CollapseConfig& config) {
    CollapseReport report;

    // The scripted exploit agent: review_deck on all 35 turns.
    {
        SlideEnv env;
        env.reset(config.brief);
        while (!env.state().terminated) {
            env.step(ToolCall{"review_deck", json::object()});
        }
        report.scripted_cumulative_reward = env.state().cumulative_reward;
        report.scripted_aggregate_quality = env.current_quality();
        report.scripted_turns = env.state().step_count;
    }

    ToyPolicy policy(static_cast<int>(template_vocab().size()), kFeatureDim);
    TrainOptions options;
    options.grpo = config.grpo;
    options.signal = RewardSignal::EnvSteps;
    options.groups_per_step = config.groups_per_step;
    options.seq_len = config.seq_len;
    options.param_slip_prob = config.param_slip_prob;
    options.review_deck_decay = config.review_deck_decay;
    report.log = train(policy, {config.brief}, options);

    for (int begin = 0; begin < static_cast<int>(report.log.size()); begin += config.window) {
        const int end = std::min(begin + config.window, static_cast<int>(report.log.size()));
        WindowStat window;
        window.first_step = begin;
        window.last_step = end - 1;
        window.min = report.log[static_cast<std::size_t>(begin)].min;
        window.max = report.log[static_cast<std::size_t>(begin)].max;
        double avg = 0.0, p_review = 0.0;
        for (int i = begin; i < end; ++i) {
            const auto& rec = report.log[static_cast<std::size_t>(i)];
            avg += rec.avg;
            p_review += rec.p_review_deck;
            window.min = std::min(window.min, rec.min);
            window.max = std::max(window.max, rec.max);
        }
        window.avg = avg / (end - begin);
        window.p_review_deck = p_review / (end - begin);
        report.windows.push_back(window);
    }
    if (!report.windows.empty()) {
        report.terminal_p_review_deck = report.windows.back().p_review_deck;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Noise analysis
// ---------------------------------------------------------------------------

SnrResult snr(double sigma_true, double sigma_eta) {
    if (sigma_true < 0.0 || sigma_eta < 0.0) {
        throw std::invalid_argument("snr requires nonnegative sigmas");
    }
    if (sigma_eta == 0.0) {
        return {std::numeric_limits<double>::infinity(), true};
    }
    return {(sigma_true * sigma_true) / (sigma_eta * sigma_eta), false};
}

double aggregate_noise(std::span<const double> weights, std::span<const double> sigmas) {
    if (weights.size() != sigmas.size()) {
        throw std::invalid_argument("aggregate_noise requires matching spans");
    }
    double weight_sum = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0 || sigmas[i] < 0.0) {
            throw std::invalid_argument("aggregate_noise requires nonnegative inputs");
        }
        weight_sum += weights[i];
        acc += weights[i] * weights[i] * sigmas[i] * sigmas[i];
    }
    if (weight_sum <= 0.0) throw std::invalid_argument("aggregate_noise requires positive weight sum");
    return std::sqrt(acc) / weight_sum;
}

}  // namespace slidegym::grpo
