#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "slidegym/brief.hpp"

using namespace slidegym;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kBriefsDir = fs::path(SLIDEGYM_SOURCE_DIR) / "data" / "briefs";

SlideBrief appendix_brief() {
    SlideBrief brief;
    brief.id = "series-b";
    brief.topic = "Series B Funding Pitch - AI-Powered Supply Chain Platform";
    brief.audience = "venture capitalists";
    brief.num_slides = 10;
    brief.confidence = 1.0;
    brief.content = json{{"company", "ChainMind AI"},
                         {"problem", "Supply chain disruptions cost $184B annually"},
                         {"solution", "AI predicting disruptions 14 days ahead"},
                         {"traction", json{{"arr", "$4.2M"}, {"growth", "312% YoY"}}},
                         {"ask", "$25M at $100M pre-money"}};
    return brief;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("slidegym-brief-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("shipped catalog loads 48 briefs in id order") {
    const BriefCatalog catalog = load_catalog(kBriefsDir);
    CHECK(catalog.briefs.size() == 48);
    CHECK(catalog.issues.empty());
    for (std::size_t i = 1; i < catalog.briefs.size(); ++i) {
        CHECK(catalog.briefs[i - 1].id < catalog.briefs[i].id);
    }
    for (const auto& brief : catalog.briefs) {
        const auto report = validate_brief(brief);
        INFO(brief.id);
        CHECK(report.ok);
        CHECK(brief.num_slides >= 6);
        CHECK(brief.num_slides <= 10);
        CHECK(brief.confidence >= 0.3);
        CHECK(brief.confidence <= 1.0);
    }
    CHECK(catalog.find("q4-2025-financial-results") != nullptr);
    CHECK(catalog.find("nope") == nullptr);
}

TEST_CASE("catalog loading is deterministic") {
    const BriefCatalog a = load_catalog(kBriefsDir);
    const BriefCatalog b = load_catalog(kBriefsDir);
    REQUIRE(a.briefs.size() == b.briefs.size());
    for (std::size_t i = 0; i < a.briefs.size(); ++i) {
        CHECK(brief_to_json(a.briefs[i]) == brief_to_json(b.briefs[i]));
    }
}

TEST_CASE("empty directory loads an empty catalog") {
    TempDir dir;
    const BriefCatalog catalog = load_catalog(dir.path);
    CHECK(catalog.briefs.empty());
    CHECK(catalog.issues.empty());
}

TEST_CASE("missing path is an input error") {
    CHECK_THROWS_AS(load_catalog("/nonexistent/briefs"), CatalogError);
}

TEST_CASE("duplicate ids are a validation error naming both sources") {
    TempDir dir;
    std::ofstream(dir.path / "a.json") << R"({"id":"q4","topic":"t","num_slides":6})";
    std::ofstream(dir.path / "b.json") << R"({"id":"q4","topic":"t","num_slides":6})";
    try {
        load_catalog(dir.path);
        FAIL("expected CatalogError");
    } catch (const CatalogError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("q4") != std::string::npos);
        CHECK(msg.find("a.json") != std::string::npos);
        CHECK(msg.find("b.json") != std::string::npos);
    }
}

TEST_CASE("unparseable entries are reported, not dropped") {
    TempDir dir;
    std::ofstream(dir.path / "good.json") << R"({"topic":"t","num_slides":6})";
    std::ofstream(dir.path / "bad.json") << "{not json";
    const BriefCatalog catalog = load_catalog(dir.path);
    CHECK(catalog.briefs.size() == 1);
    REQUIRE(catalog.issues.size() == 1);
    CHECK(catalog.issues[0].find("bad.json") != std::string::npos);
}

TEST_CASE("targets default when omitted") {
    const SlideBrief brief = brief_from_json(json{{"topic", "t"}, {"num_slides", 7}}, "x");
    CHECK(brief.targets.sections_per_slide == 3);
    CHECK(brief.targets.words_per_slide == 60);
    CHECK(brief.targets.max_turns == 35);
}

TEST_CASE("appendix example brief validates") {
    CHECK(validate_brief(appendix_brief()).ok);
}

TEST_CASE("out-of-range fields are named violations") {
    SlideBrief brief = appendix_brief();
    brief.num_slides = 0;
    auto report = validate_brief(brief);
    CHECK_FALSE(report.ok);
    CHECK(report.violations == std::vector<std::string>{"num_slides out of range"});

    brief = appendix_brief();
    brief.confidence = 1.5;
    report = validate_brief(brief);
    CHECK_FALSE(report.ok);
    CHECK(report.violations == std::vector<std::string>{"confidence out of range"});

    brief = appendix_brief();
    brief.topic = "   ";
    CHECK_FALSE(validate_brief(brief).ok);
}

TEST_CASE("validate_brief matches the stated invariants on random briefs") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> slides(-2, 70);
    std::uniform_real_distribution<double> conf(-0.5, 1.5);
    std::uniform_int_distribution<int> target(-1, 5);
    std::uniform_int_distribution<int> topic_pick(0, 2);

    for (int trial = 0; trial < 500; ++trial) {
        SlideBrief brief;
        brief.id = "r" + std::to_string(trial);
        brief.topic = std::vector<std::string>{"", "  ", "Edge Computing"}[static_cast<std::size_t>(
            topic_pick(rng))];
        brief.num_slides = slides(rng);
        brief.confidence = conf(rng);
        brief.targets.sections_per_slide = target(rng);
        brief.targets.words_per_slide = target(rng) * 20 + 1;
        brief.targets.max_turns = target(rng) * 10 + 1;

        const bool invariants_hold =
            !brief.topic.empty() && brief.topic.find_first_not_of(" \t") != std::string::npos &&
            brief.num_slides >= 1 && brief.num_slides <= 64 && brief.confidence >= 0.0 &&
            brief.confidence <= 1.0 && brief.targets.sections_per_slide >= 1 &&
            brief.targets.words_per_slide >= 1 && brief.targets.max_turns >= 1;
        CHECK(validate_brief(brief).ok == invariants_hold);
    }
}

TEST_CASE("flatten_content walks nested structures") {
    const std::string flat = appendix_brief().flatten_content();
    CHECK(flat.find("ChainMind AI") != std::string::npos);
    CHECK(flat.find("312% YoY") != std::string::npos);
    CHECK(flat.find("traction") != std::string::npos);
}

TEST_CASE("brief json round trip") {
    const SlideBrief brief = appendix_brief();
    const SlideBrief back = brief_from_json(brief_to_json(brief), "fallback");
    CHECK(back.id == brief.id);
    CHECK(back.topic == brief.topic);
    CHECK(back.num_slides == brief.num_slides);
    CHECK(back.content == brief.content);
}
