#pragma once

#include "slidegym/judge.hpp"
#include "slidegym/state.hpp"

namespace slidegym {

/// Weights for the six quality components.
struct ComponentWeights {
    double code_rules = 1.0;
    double render_quality = 2.0;
    double aesthetic_html = 1.5;
    double aesthetic_visual = 1.5;
    double content_quality = 2.0;
    double spec_reconstruction = 2.0;

    double sum() const {
        return code_rules + render_quality + aesthetic_html + aesthetic_visual + content_quality +
               spec_reconstruction;
    }
};

struct RewardBreakdown {
    double code_rules = 0.0;
    double render_quality = 0.0;
    double aesthetic_html = 0.0;
    double aesthetic_visual = 0.0;
    double content_quality = 0.0;
    double spec_reconstruction = 0.0;
    double aggregate = 0.0;

    nlohmann::json to_json() const;
    static RewardBreakdown from_json(const nlohmann::json& doc);
};

/// Sub-scores of the inverse specification reward.
struct ReconScore {
    double topic = 0.0;
    double audience = 0.0;
    double count = 0.0;
    double themes = 0.0;
    double total = 0.0;
    std::string diagnostic;
};

struct AggregateOptions {
    /// When a judge-backed component is unavailable, renormalize over the
    /// rest instead of failing closed.
    bool renormalize_on_unavailable = false;
};

/// Structural conventions score (empty deck scores 0).
double score_code_rules(const EnvState& state);

/// Slide count vs target, render success rate, and HTML validity.
double score_render_quality(const EnvState& state);

/// Topic relevance, research grounding, uniqueness, outline coverage.
double score_content_quality(const EnvState& state);

double score_aesthetic_html(const EnvState& state, JudgeGateway& judge);
double score_aesthetic_visual(const EnvState& state, JudgeGateway& judge);

/// Inverse specification reward: ask the judge to reconstruct the brief
/// from slide content alone, then score the prediction against the brief.
ReconScore score_spec_reconstruction(const EnvState& state, JudgeGateway& judge);

/// Score a reconstruction prediction against the actual brief.
ReconScore score_recon_prediction(const ReconPrediction& prediction, const SlideBrief& brief);

/// Slide-only view of the deck for the reconstruction judge.
DeckSummary deck_summary(const EnvState& state);

RewardBreakdown aggregate_rewards(const EnvState& state, JudgeGateway& judge,
                                  const ComponentWeights& weights = {},
                                  const AggregateOptions& options = {});

/// Weighted mean of the six component scores.
double weighted_aggregate(const RewardBreakdown& components, const ComponentWeights& weights);

}  // namespace slidegym
