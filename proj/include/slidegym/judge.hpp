#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace slidegym {

enum class JudgeKind { HtmlAesthetic, VisualAesthetic, Reconstruct };
std::string_view to_string(JudgeKind kind);

/// What the judge sees for one slide.
struct SlidePayload {
    std::string html;
    std::optional<std::string> png;  // raw bytes
};

/// Slide-only view of a deck handed to the reconstruction judge; never
/// contains the brief.
struct DeckSummary {
    std::vector<std::string> slide_titles;
    std::vector<std::string> slide_texts;
    std::string to_text() const;
    int slide_count() const { return static_cast<int>(slide_titles.size()); }
};

/// The judge's guess at the original brief, from slides alone.
struct ReconPrediction {
    std::string topic;
    std::string audience;
    int num_slides = 0;
    std::vector<std::string> key_themes;
};

class JudgeUnavailableError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ReconstructionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct JudgeConfig {
    enum class Mode { Offline, Remote };
    std::string endpoint;
    std::string model_name = "offline-heuristic";
    int timeout_ms = 10000;
    int max_retries = 2;
    int max_inflight = 4;  // concurrent remote calls
    std::filesystem::path cache_path;  // empty = in-memory cache only
    Mode mode = Mode::Offline;

    /// Reads JUDGE_ENDPOINT, JUDGE_MODE and JUDGE_CACHE.
    static JudgeConfig from_env();
};

/// Persistent score cache. In memory it is a plain map; on disk it is an
/// append-only record log, one JSON record per line, last write wins.
/// A corrupt file is rebuilt empty with a warning on stderr.
class ScoreCache {
  public:
    explicit ScoreCache(std::filesystem::path path = {});

    std::optional<double> lookup(const std::string& key) const;
    void store(const std::string& key, double score);
    std::optional<std::string> lookup_text(const std::string& key) const;
    void store_text(const std::string& key, const std::string& value);
    std::size_t size() const;

  private:
    void append_record(const nlohmann::json& record);

    mutable std::shared_mutex map_mutex_;
    std::unordered_map<std::string, double> scores_;
    std::unordered_map<std::string, std::string> texts_;
    std::filesystem::path path_;
    std::mutex io_mutex_;
    std::ofstream log_;
};

/// The LLM-as-judge boundary. Offline mode runs deterministic heuristic
/// judges so stepping and the entire test suite need no network; remote
/// mode POSTs {kind, prompt, payload} and parses the {reply} envelope.
class JudgeGateway {
  public:
    explicit JudgeGateway(JudgeConfig config = {});

    /// Aesthetic score in [0,1] for one slide; cached by content hash.
    /// Throws JudgeUnavailableError when the remote backend stays
    /// unreachable after retries.
    double judge_slide(JudgeKind kind, const SlidePayload& payload);

    /// Predict the original brief from slide content alone. Throws
    /// ReconstructionError when a remote reply cannot be parsed.
    ReconPrediction reconstruct_brief(const DeckSummary& deck);

    static std::string content_hash(JudgeKind kind, std::string_view payload_bytes);

    // Deterministic offline judges, exposed for the test oracles.
    static double offline_html_score(std::string_view html);
    static double offline_visual_score(const SlidePayload& payload);
    static ReconPrediction offline_reconstruct(const DeckSummary& deck);

    static const std::string& inverse_spec_prompt();
    static const std::string& html_rubric_prompt();
    static const std::string& visual_rubric_prompt();

    const JudgeConfig& config() const { return config_; }
    ScoreCache& cache() { return cache_; }
    std::uint64_t backend_calls() const { return backend_calls_.load(); }

  private:
    std::string remote_reply(std::string_view kind, std::string_view prompt,
                             std::string_view payload);

    JudgeConfig config_;
    ScoreCache cache_;
    std::atomic<std::uint64_t> backend_calls_{0};

    // Bounds concurrent remote calls at config_.max_inflight.
    std::mutex inflight_mutex_;
    std::condition_variable inflight_cv_;
    int inflight_ = 0;
};

}  // namespace slidegym
