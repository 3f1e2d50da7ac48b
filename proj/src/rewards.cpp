#include "slidegym/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "slidegym/text.hpp"

namespace slidegym {

using nlohmann::json;

json RewardBreakdown::to_json() const {
    return json{{"code_rules", code_rules},
                {"render_quality", render_quality},
                {"aesthetic_html", aesthetic_html},
                {"aesthetic_visual", aesthetic_visual},
                {"content_quality", content_quality},
                {"spec_reconstruction", spec_reconstruction},
                {"aggregate", aggregate}};
}

RewardBreakdown RewardBreakdown::from_json(const json& doc) {
    RewardBreakdown b;
    b.code_rules = doc.value("code_rules", 0.0);
    b.render_quality = doc.value("render_quality", 0.0);
    b.aesthetic_html = doc.value("aesthetic_html", 0.0);
    b.aesthetic_visual = doc.value("aesthetic_visual", 0.0);
    b.content_quality = doc.value("content_quality", 0.0);
    b.spec_reconstruction = doc.value("spec_reconstruction", 0.0);
    b.aggregate = doc.value("aggregate", 0.0);
    return b;
}

double score_code_rules(const EnvState& state) {
    const int n = state.slide_count();
    if (n == 0) return 0.0;

    const int target_sections = state.brief.targets.sections_per_slide;
    const int target_words = state.brief.targets.words_per_slide;

    double total = 0.0;
    for (const auto& html : state.slides_html) {
        const SlideStats stats = inspect_slide(html);
        double slide_score = 0.0;
        if (stats.has_title_text) slide_score += 0.25;

        if (stats.section_count == target_sections) {
            slide_score += 0.25;
        } else if (stats.section_count >= 1) {
            slide_score += 0.10;  // sections exist but count differs
        }

        const double w = static_cast<double>(stats.word_count);
        const double wt = static_cast<double>(target_words);
        if (std::max(w, wt) > 0.0) slide_score += 0.25 * std::min(w, wt) / std::max(w, wt);

        if (stats.section_count > 0) {
            slide_score += 0.25 * static_cast<double>(stats.filled_sections) /
                           static_cast<double>(stats.section_count);
        }
        total += slide_score;
    }
    return total / static_cast<double>(n);
}

double score_render_quality(const EnvState& state) {
    const int n = state.slide_count();
    if (n == 0) return 0.0;

    const int target = std::max(1, state.brief.num_slides);
    int rendered = 0;
    for (const auto& png : state.slides_png) {
        if (png.has_value()) ++rendered;
    }
    bool all_valid = true;
    for (const auto& html : state.slides_html) {
        if (!validate_html(html).valid) {
            all_valid = false;
            break;
        }
    }

    const double count_term =
        std::min(static_cast<double>(n) / static_cast<double>(target), 1.0);
    const double rendered_term = static_cast<double>(rendered) / static_cast<double>(n);
    return 0.4 * count_term + 0.3 * rendered_term + 0.3 * (all_valid ? 1.0 : 0.0);
}

double score_content_quality(const EnvState& state) {
    const int n = state.slide_count();
    if (n == 0) return 0.0;

    std::vector<SlideStats> stats;
    stats.reserve(static_cast<std::size_t>(n));
    for (const auto& html : state.slides_html) stats.push_back(inspect_slide(html));

    // Topic relevance: slides mentioning at least one topic content word.
    const auto topic_words = text::content_word_set(state.brief.topic);
    int on_topic = 0;
    for (const auto& s : stats) {
        const auto slide_words = text::content_word_set(s.visible_text);
        for (const auto& w : topic_words) {
            if (slide_words.count(w)) {
                ++on_topic;
                break;
            }
        }
    }
    const double topic_frac = static_cast<double>(on_topic) / n;

    // Grounding: a slide counts as grounded when it shares a content-word
    // 4-gram with some research record, or contains a token that appears in
    // exactly one research record (a rare, copied fact). Zero without
    // research.
    double grounded_frac = 0.0;
    if (!state.research_context.empty()) {
        std::vector<std::set<std::string>> research_grams;
        std::map<std::string, int> doc_freq;
        for (const auto& record : state.research_context) {
            const auto words = text::content_words(record.result);
            const auto grams = text::ngrams(words, 4);
            research_grams.emplace_back(grams.begin(), grams.end());
            const std::set<std::string> unique_words(words.begin(), words.end());
            for (const auto& w : unique_words) ++doc_freq[w];
        }
        std::set<std::string> rare_tokens;
        for (const auto& [word, df] : doc_freq) {
            if (df == 1) rare_tokens.insert(word);
        }

        int grounded = 0;
        for (const auto& s : stats) {
            const auto words = text::content_words(s.visible_text);
            const auto grams = text::ngrams(words, 4);
            bool hit = false;
            for (const auto& g : grams) {
                for (const auto& rg : research_grams) {
                    if (rg.count(g)) {
                        hit = true;
                        break;
                    }
                }
                if (hit) break;
            }
            if (!hit) {
                for (const auto& w : words) {
                    if (rare_tokens.count(w)) {
                        hit = true;
                        break;
                    }
                }
            }
            if (hit) ++grounded;
        }
        grounded_frac = static_cast<double>(grounded) / n;
    }

    // Uniqueness by normalized visible text.
    std::set<std::string> unique_texts;
    for (const auto& s : stats) {
        unique_texts.insert(text::lowercase(text::normalize_whitespace(s.visible_text)));
    }
    const double unique_frac = static_cast<double>(unique_texts.size()) / n;

    // Narrative flow: outline entries whose title words made it into some
    // slide. Entries without content words count as covered.
    double flow_frac = 0.0;
    if (!state.outline.empty()) {
        std::vector<std::set<std::string>> slide_words;
        for (const auto& s : stats) slide_words.push_back(text::content_word_set(s.visible_text));
        int covered = 0;
        for (const auto& entry : state.outline) {
            const auto entry_words = text::content_word_set(entry.title);
            if (entry_words.empty()) {
                ++covered;
                continue;
            }
            bool hit = false;
            for (const auto& sw : slide_words) {
                for (const auto& w : entry_words) {
                    if (sw.count(w)) {
                        hit = true;
                        break;
                    }
                }
                if (hit) break;
            }
            if (hit) ++covered;
        }
        flow_frac = static_cast<double>(covered) / static_cast<double>(state.outline.size());
    }

    return 0.35 * topic_frac + 0.25 * grounded_frac + 0.20 * unique_frac + 0.20 * flow_frac;
}

double score_aesthetic_html(const EnvState& state, JudgeGateway& judge) {
    const int n = state.slide_count();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (const auto& html : state.slides_html) {
        total += judge.judge_slide(JudgeKind::HtmlAesthetic, SlidePayload{html, std::nullopt});
    }
    return total / n;
}

double score_aesthetic_visual(const EnvState& state, JudgeGateway& judge) {
    const int n = state.slide_count();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& png = state.slides_png[static_cast<std::size_t>(i)];
        if (!png) continue;  // unrendered slides contribute 0
        total += judge.judge_slide(JudgeKind::VisualAesthetic,
                                   SlidePayload{state.slides_html[static_cast<std::size_t>(i)], png});
    }
    return total / n;
}

DeckSummary deck_summary(const EnvState& state) {
    DeckSummary deck;
    for (const auto& html : state.slides_html) {
        const SlideStats stats = inspect_slide(html);
        deck.slide_titles.push_back(stats.title_text);
        deck.slide_texts.push_back(stats.visible_text);
    }
    return deck;
}

ReconScore score_recon_prediction(const ReconPrediction& prediction, const SlideBrief& brief) {
    ReconScore score;

    const auto topic_actual = text::content_word_set(brief.topic);
    const auto topic_pred = text::content_word_set(prediction.topic);
    score.topic = text::jaccard(topic_actual, topic_pred);

    const std::string audience_actual = text::lowercase(text::trim(brief.audience));
    const std::string audience_pred = text::lowercase(text::trim(prediction.audience));
    if (audience_actual == audience_pred) {
        score.audience = 1.0;
    } else if (!audience_actual.empty() && !audience_pred.empty() &&
               (audience_actual.find(audience_pred) != std::string::npos ||
                audience_pred.find(audience_actual) != std::string::npos)) {
        score.audience = 0.5;
    } else {
        score.audience = text::jaccard(text::content_word_set(audience_actual),
                                       text::content_word_set(audience_pred));
    }

    if (prediction.num_slides > 0 && brief.num_slides > 0) {
        const double lo = std::min(prediction.num_slides, brief.num_slides);
        const double hi = std::max(prediction.num_slides, brief.num_slides);
        score.count = lo / hi;
    }

    if (!prediction.key_themes.empty()) {
        int matched = 0;
        for (const auto& theme : prediction.key_themes) {
            const auto theme_words = text::content_word_set(theme);
            bool hit = false;
            for (const auto& w : theme_words) {
                if (topic_actual.count(w)) {
                    hit = true;
                    break;
                }
            }
            if (hit) ++matched;
        }
        score.themes = static_cast<double>(matched) / static_cast<double>(prediction.key_themes.size());
    }

    score.total = 0.40 * score.topic + 0.25 * score.audience + 0.15 * score.count +
                  0.20 * score.themes;
    return score;
}

ReconScore score_spec_reconstruction(const EnvState& state, JudgeGateway& judge) {
    if (state.slide_count() == 0) {
        ReconScore score;
        score.diagnostic = "empty deck";
        return score;
    }
    ReconPrediction prediction;
    try {
        prediction = judge.reconstruct_brief(deck_summary(state));
    } catch (const ReconstructionError& e) {
        ReconScore score;
        score.diagnostic = e.what();
        return score;  // a deck that defeats reconstruction scores 0
    }
    return score_recon_prediction(prediction, state.brief);
}

double weighted_aggregate(const RewardBreakdown& components, const ComponentWeights& weights) {
    const double sum = weights.sum();
    if (sum <= 0.0) return 0.0;
    return (weights.code_rules * components.code_rules +
            weights.render_quality * components.render_quality +
            weights.aesthetic_html * components.aesthetic_html +
            weights.aesthetic_visual * components.aesthetic_visual +
            weights.content_quality * components.content_quality +
            weights.spec_reconstruction * components.spec_reconstruction) /
           sum;
}

RewardBreakdown aggregate_rewards(const EnvState& state, JudgeGateway& judge,
                                  const ComponentWeights& weights,
                                  const AggregateOptions& options) {
    RewardBreakdown breakdown;
    breakdown.code_rules = score_code_rules(state);
    breakdown.render_quality = score_render_quality(state);
    breakdown.content_quality = score_content_quality(state);

    ComponentWeights effective = weights;
    auto judged = [&](double (*scorer)(const EnvState&, JudgeGateway&), double& slot,
                      double& weight_slot) {
        try {
            slot = scorer(state, judge);
        } catch (const JudgeUnavailableError&) {
            if (!options.renormalize_on_unavailable) throw;  // fail closed by default
            slot = 0.0;
            weight_slot = 0.0;
        }
    };
    judged(score_aesthetic_html, breakdown.aesthetic_html, effective.aesthetic_html);
    judged(score_aesthetic_visual, breakdown.aesthetic_visual, effective.aesthetic_visual);
    try {
        breakdown.spec_reconstruction = score_spec_reconstruction(state, judge).total;
    } catch (const JudgeUnavailableError&) {
        if (!options.renormalize_on_unavailable) throw;
        breakdown.spec_reconstruction = 0.0;
        effective.spec_reconstruction = 0.0;
    }

    breakdown.aggregate = weighted_aggregate(breakdown, effective);
    return breakdown;
}

}  // namespace slidegym
