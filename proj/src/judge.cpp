#include "slidegym/judge.hpp"

#include <httplib.h>

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "slidegym/renderer.hpp"
#include "slidegym/sha256.hpp"
#include "slidegym/text.hpp"
#include "slidegym/util.hpp"

namespace slidegym {

using nlohmann::json;

std::string_view to_string(JudgeKind kind) {
    switch (kind) {
        case JudgeKind::HtmlAesthetic: return "html_aesthetic";
        case JudgeKind::VisualAesthetic: return "visual_aesthetic";
        case JudgeKind::Reconstruct: return "reconstruct";
    }
    return "unknown";
}

std::string DeckSummary::to_text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < slide_titles.size(); ++i) {
        out << "Slide " << (i + 1) << ": " << slide_titles[i] << "\n";
        if (i < slide_texts.size() && !slide_texts[i].empty()) out << slide_texts[i] << "\n";
        out << "\n";
    }
    return out.str();
}

JudgeConfig JudgeConfig::from_env() {
    JudgeConfig config;
    if (const char* endpoint = std::getenv("JUDGE_ENDPOINT")) config.endpoint = endpoint;
    if (const char* mode = std::getenv("JUDGE_MODE")) {
        config.mode = std::string_view(mode) == "remote" ? Mode::Remote : Mode::Offline;
    }
    if (const char* cache = std::getenv("JUDGE_CACHE")) config.cache_path = cache;
    return config;
}

// ---------------------------------------------------------------------------
// ScoreCache
// ---------------------------------------------------------------------------

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.empty()) return;

    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_);
        std::string line;
        std::size_t corrupt = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json record = json::parse(line, nullptr, false);
            if (record.is_discarded() || !record.is_object() || !record.contains("k")) {
                ++corrupt;
                continue;
            }
            const std::string key = record.value("k", std::string{});
            if (record.contains("v") && record["v"].is_number()) {
                scores_[key] = record["v"].get<double>();
            } else if (record.contains("t") && record["t"].is_string()) {
                texts_[key] = record["t"].get<std::string>();
            } else {
                ++corrupt;
            }
        }
        if (corrupt > 0) {
            std::cerr << "slidegym: score cache " << path_ << ": skipped " << corrupt
                      << " corrupt record(s)" << std::endl;
        }
    }
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    log_.open(path_, std::ios::app);
    if (!log_) {
        std::cerr << "slidegym: score cache " << path_ << " is not writable; running in-memory"
                  << std::endl;
    }
}

std::optional<double> ScoreCache::lookup(const std::string& key) const {
    std::shared_lock lock(map_mutex_);
    auto it = scores_.find(key);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> ScoreCache::lookup_text(const std::string& key) const {
    std::shared_lock lock(map_mutex_);
    auto it = texts_.find(key);
    if (it == texts_.end()) return std::nullopt;
    return it->second;
}

void ScoreCache::store(const std::string& key, double score) {
    {
        std::unique_lock lock(map_mutex_);
        scores_[key] = score;
    }
    append_record(json{{"k", key}, {"v", score}});
}

void ScoreCache::store_text(const std::string& key, const std::string& value) {
    {
        std::unique_lock lock(map_mutex_);
        texts_[key] = value;
    }
    append_record(json{{"k", key}, {"t", value}});
}

std::size_t ScoreCache::size() const {
    std::shared_lock lock(map_mutex_);
    return scores_.size() + texts_.size();
}

void ScoreCache::append_record(const json& record) {
    std::lock_guard lock(io_mutex_);
    if (!log_.is_open() || !log_) return;
    log_ << record.dump() << '\n';
    log_.flush();
}

// ---------------------------------------------------------------------------
// Offline judges
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> extract_style_texts(std::string_view html) {
    std::vector<std::string> styles;
    std::size_t pos = 0;
    while ((pos = html.find("style=", pos)) != std::string_view::npos) {
        const std::size_t q = pos + 6;
        if (q < html.size() && (html[q] == '"' || html[q] == '\'')) {
            const std::size_t end = html.find(html[q], q + 1);
            if (end == std::string_view::npos) break;
            styles.emplace_back(html.substr(q + 1, end - q - 1));
            pos = end + 1;
        } else {
            pos = q;
        }
    }
    pos = 0;
    while ((pos = html.find("<style", pos)) != std::string_view::npos) {
        const std::size_t open = html.find('>', pos);
        const std::size_t close = html.find("</style>", pos);
        if (open == std::string_view::npos || close == std::string_view::npos) break;
        styles.emplace_back(html.substr(open + 1, close - open - 1));
        pos = close + 8;
    }
    return styles;
}

std::set<std::string> distinct_css_properties(const std::vector<std::string>& styles) {
    std::set<std::string> properties;
    for (const auto& style : styles) {
        std::size_t pos = 0;
        while (pos < style.size()) {
            std::size_t semi = style.find(';', pos);
            if (semi == std::string::npos) semi = style.size();
            const std::string decl(style.substr(pos, semi - pos));
            const std::size_t colon = decl.find(':');
            if (colon != std::string::npos) {
                std::string name = text::trim(decl.substr(0, colon));
                if (!name.empty() && name.find('{') == std::string::npos) {
                    properties.insert(text::lowercase(name));
                }
            }
            pos = semi + 1;
        }
    }
    return properties;
}

std::vector<Rgb> extract_colors(const std::vector<std::string>& styles) {
    std::vector<Rgb> colors;
    for (const auto& style : styles) {
        std::size_t pos = 0;
        while ((pos = style.find("rgb(", pos)) != std::string::npos) {
            int r = 0, g = 0, b = 0;
            if (std::sscanf(style.c_str() + pos, "rgb(%d,%d,%d", &r, &g, &b) == 3 ||
                std::sscanf(style.c_str() + pos, "rgb(%d, %d, %d", &r, &g, &b) == 3) {
                colors.push_back({r, g, b});
            }
            pos += 4;
        }
        pos = 0;
        while ((pos = style.find('#', pos)) != std::string::npos) {
            if (pos + 7 <= style.size()) {
                bool hex = true;
                for (std::size_t i = pos + 1; i < pos + 7; ++i) {
                    if (!std::isxdigit(static_cast<unsigned char>(style[i]))) {
                        hex = false;
                        break;
                    }
                }
                if (hex) {
                    const int v = static_cast<int>(std::strtol(style.substr(pos + 1, 6).c_str(), nullptr, 16));
                    colors.push_back({(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff});
                }
            }
            ++pos;
        }
    }
    return colors;
}

bool uses_non_default_palette(const std::vector<Rgb>& colors) {
    const ThemePalette* def = find_theme("default");
    const std::vector<Rgb> allowed = {def->bg, def->text, def->accent, def->secondary,
                                      {0, 0, 0}, {255, 255, 255}};
    for (const auto& c : colors) {
        if (std::find(allowed.begin(), allowed.end(), c) == allowed.end()) return true;
    }
    return false;
}

const std::vector<std::string>& audience_lexicon() {
    static const std::vector<std::string> kLexicon = {
        "board of directors", "venture capitalists", "potential investors", "product managers",
        "executive team",     "engineering team",    "investors",           "executives",
        "engineers",          "analysts",            "managers",            "customers",
        "stakeholders",       "employees",           "researchers",         "students",
        "board",              "vcs",
    };
    return kLexicon;
}

}  // namespace

double JudgeGateway::offline_html_score(std::string_view html) {
    const auto styles = extract_style_texts(html);
    const SlideStats stats = inspect_slide(html);

    double score = 0.0;
    if (distinct_css_properties(styles).size() >= 3) score += 0.25;
    if (stats.has_title_text && !stats.heading_texts.empty()) score += 0.25;

    // Section balance: every section's text length within +/-50% of the mean.
    if (!stats.section_texts.empty()) {
        double mean = 0.0;
        for (const auto& s : stats.section_texts) mean += static_cast<double>(s.size());
        mean /= static_cast<double>(stats.section_texts.size());
        if (mean > 0.0) {
            bool balanced = true;
            for (const auto& s : stats.section_texts) {
                const double len = static_cast<double>(s.size());
                if (len < 0.5 * mean || len > 1.5 * mean) {
                    balanced = false;
                    break;
                }
            }
            if (balanced) score += 0.25;
        }
    }

    if (uses_non_default_palette(extract_colors(styles))) score += 0.25;
    return score;
}

double JudgeGateway::offline_visual_score(const SlidePayload& payload) {
    double score = payload.png.has_value() ? 0.5 : 0.0;
    score += 0.5 * offline_html_score(payload.html);
    return score;
}

ReconPrediction JudgeGateway::offline_reconstruct(const DeckSummary& deck) {
    ReconPrediction prediction;
    prediction.num_slides = deck.slide_count();

    // Topic: the slide title that carries the most frequent content-word
    // bigram across all titles; falls back to the first nonempty title.
    std::map<std::string, int> bigram_counts;
    for (const auto& title : deck.slide_titles) {
        for (const auto& gram : text::ngrams(text::content_words(title), 2)) {
            ++bigram_counts[gram];
        }
    }
    std::string best_bigram;
    int best_count = 0;
    for (const auto& [gram, count] : bigram_counts) {
        if (count > best_count) {
            best_bigram = gram;
            best_count = count;
        }
    }
    if (!best_bigram.empty()) {
        for (const auto& title : deck.slide_titles) {
            const auto grams = text::ngrams(text::content_words(title), 2);
            if (std::find(grams.begin(), grams.end(), best_bigram) != grams.end()) {
                prediction.topic = text::trim(title);
                break;
            }
        }
    } else {
        for (const auto& title : deck.slide_titles) {
            if (!text::trim(title).empty()) {
                prediction.topic = text::trim(title);
                break;
            }
        }
    }

    // Audience: first lexicon entry contained in the deck text.
    std::string deck_text;
    for (const auto& t : deck.slide_titles) {
        deck_text += t;
        deck_text += ' ';
    }
    for (const auto& t : deck.slide_texts) {
        deck_text += t;
        deck_text += ' ';
    }
    const std::string lowered = text::lowercase(deck_text);
    prediction.audience = "general";
    for (const auto& entry : audience_lexicon()) {
        if (lowered.find(entry) != std::string::npos) {
            prediction.audience = entry;
            break;
        }
    }

    // Themes: top-3 content words by frequency, ties broken lexicographically.
    std::map<std::string, int> word_counts;
    for (const auto& word : text::content_words(deck_text)) ++word_counts[word];
    for (int rank = 0; rank < 3; ++rank) {
        std::string best;
        int count = 0;
        for (const auto& [word, c] : word_counts) {
            if (c > count) {
                best = word;
                count = c;
            }
        }
        if (best.empty()) break;
        prediction.key_themes.push_back(best);
        word_counts.erase(best);
    }
    return prediction;
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

const std::string& JudgeGateway::inverse_spec_prompt() {
    static const std::string kPrompt =
        "You are analyzing a slide deck presentation. Based ONLY on the slide content, "
        "predict what the original brief/requirements were.\n"
        "\n"
        "Return a JSON object with:\n"
        "{\n"
        "  \"topic\": \"The main topic or title\",\n"
        "  \"audience\": \"Who this targets\",\n"
        "  \"num_slides\": <intended count>,\n"
        "  \"key_themes\": [\"theme1\", \"theme2\", \"theme3\"]\n"
        "}\n"
        "\n"
        "Return ONLY the JSON object.\n"
        "No explanation.";
    return kPrompt;
}

const std::string& JudgeGateway::html_rubric_prompt() {
    static const std::string kPrompt =
        "You are evaluating the raw HTML/CSS of a single presentation slide. Score four "
        "dimensions, each worth up to 0.25: (1) layout and structure, including clear "
        "title/section hierarchy and logical organization; (2) content balance and appropriate "
        "density; (3) visual styling with modern CSS, color harmony, and typography; "
        "(4) professional polish with executive-ready, consistent formatting. Reply with a "
        "single number between 0.0 and 1.0, the sum of the four dimension scores.";
    return kPrompt;
}

const std::string& JudgeGateway::visual_rubric_prompt() {
    static const std::string kPrompt =
        "You are evaluating a rendered screenshot of a single presentation slide. Score four "
        "dimensions, each worth up to 0.25: (1) visual design with color harmony, contrast, and "
        "modern aesthetics; (2) layout and spacing, including whitespace, alignment, and "
        "organization; (3) typography with font hierarchy, readability, and density; "
        "(4) professional polish with executive-ready appearance and consistency. Reply with a "
        "single number between 0.0 and 1.0, the sum of the four dimension scores.";
    return kPrompt;
}

// ---------------------------------------------------------------------------
// JudgeGateway
// ---------------------------------------------------------------------------

JudgeGateway::JudgeGateway(JudgeConfig config)
    : config_(std::move(config)), cache_(config_.cache_path) {}

std::string JudgeGateway::content_hash(JudgeKind kind, std::string_view payload_bytes) {
    return std::string(to_string(kind)) + ":" + sha256_hex(payload_bytes);
}

double JudgeGateway::judge_slide(JudgeKind kind, const SlidePayload& payload) {
    if (kind == JudgeKind::Reconstruct) {
        throw std::invalid_argument("judge_slide expects an aesthetic kind");
    }

    // HTML payloads are whitespace-normalized before hashing.
    std::string payload_bytes;
    if (kind == JudgeKind::HtmlAesthetic) {
        payload_bytes = text::normalize_whitespace(payload.html);
    } else if (payload.png) {
        payload_bytes = *payload.png;
    } else {
        payload_bytes = "nopng:" + text::normalize_whitespace(payload.html);
    }
    const std::string key = content_hash(kind, payload_bytes);
    if (auto hit = cache_.lookup(key)) return *hit;

    ++backend_calls_;
    double score;
    if (config_.mode == JudgeConfig::Mode::Offline) {
        score = kind == JudgeKind::HtmlAesthetic ? offline_html_score(payload.html)
                                                 : offline_visual_score(payload);
    } else {
        const std::string& prompt =
            kind == JudgeKind::HtmlAesthetic ? html_rubric_prompt() : visual_rubric_prompt();
        const std::string wire_payload = kind == JudgeKind::HtmlAesthetic
                                             ? payload.html
                                             : util::base64_encode(payload.png.value_or(""));
        const std::string reply = remote_reply(to_string(kind), prompt, wire_payload);
        const auto parsed = util::first_unit_number(reply);
        if (!parsed) throw JudgeUnavailableError("judge reply contained no score in [0,1]");
        score = *parsed;
    }

    score = std::clamp(score, 0.0, 1.0);
    cache_.store(key, score);
    return score;
}

ReconPrediction JudgeGateway::reconstruct_brief(const DeckSummary& deck) {
    if (config_.mode == JudgeConfig::Mode::Offline) {
        ++backend_calls_;
        return offline_reconstruct(deck);
    }

    const std::string deck_text = deck.to_text();
    const std::string key = content_hash(JudgeKind::Reconstruct, deck_text);
    std::string reply;
    if (auto cached = cache_.lookup_text(key)) {
        reply = *cached;
    } else {
        ++backend_calls_;
        reply = remote_reply(to_string(JudgeKind::Reconstruct), inverse_spec_prompt(), deck_text);
        cache_.store_text(key, reply);
    }

    const auto object = util::first_json_object(reply);
    if (!object) throw ReconstructionError("no JSON object in reconstruction reply");
    ReconPrediction prediction;
    try {
        prediction.topic = object->value("topic", std::string{});
        prediction.audience = object->value("audience", std::string{});
        prediction.num_slides = object->value("num_slides", 0);
        if (object->contains("key_themes") && (*object)["key_themes"].is_array()) {
            for (const auto& theme : (*object)["key_themes"]) {
                if (theme.is_string()) prediction.key_themes.push_back(theme.get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ReconstructionError(std::string("malformed reconstruction reply: ") + e.what());
    }
    return prediction;
}

namespace {

class InflightGuard {
  public:
    InflightGuard(std::mutex& mutex, std::condition_variable& cv, int& count, int limit)
        : mutex_(mutex), cv_(cv), count_(count) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return count_ < std::max(1, limit); });
        ++count_;
    }
    ~InflightGuard() {
        {
            std::lock_guard lock(mutex_);
            --count_;
        }
        cv_.notify_one();
    }

  private:
    std::mutex& mutex_;
    std::condition_variable& cv_;
    int& count_;
};

}  // namespace

std::string JudgeGateway::remote_reply(std::string_view kind, std::string_view prompt,
                                       std::string_view payload) {
    const InflightGuard guard(inflight_mutex_, inflight_cv_, inflight_, config_.max_inflight);
    // endpoint is scheme://host[:port][/path]
    const std::string& endpoint = config_.endpoint;
    if (endpoint.empty()) throw JudgeUnavailableError("remote judge configured without endpoint");
    std::string base = endpoint;
    std::string path = "/";
    const std::size_t scheme_end = endpoint.find("://");
    if (scheme_end != std::string::npos) {
        const std::size_t slash = endpoint.find('/', scheme_end + 3);
        if (slash != std::string::npos) {
            base = endpoint.substr(0, slash);
            path = endpoint.substr(slash);
        }
    }

    const json body{{"kind", kind}, {"model", config_.model_name}, {"prompt", prompt},
                    {"payload", payload}};
    const std::string body_text = body.dump();

    httplib::Client client(base);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        }
        auto result = client.Post(path, body_text, "application/json");
        if (!result || result->status != 200) continue;
        const json envelope = json::parse(result->body, nullptr, false);
        if (envelope.is_discarded() || !envelope.contains("reply") ||
            !envelope["reply"].is_string()) {
            continue;
        }
        return envelope["reply"].get<std::string>();
    }
    throw JudgeUnavailableError("judge endpoint unreachable after retries: " + endpoint);
}

}  // namespace slidegym
