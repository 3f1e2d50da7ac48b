#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "slidegym/pngcodec.hpp"
#include "slidegym/renderer.hpp"
#include "slidegym/zipfile.hpp"

using namespace slidegym;
namespace fs = std::filesystem;

namespace {

SlideSpec q4_spec() {
    SlideSpec spec;
    spec.slide_idx = 0;
    spec.title = "Q4 2025 Financial Results";
    spec.sections = {{"Revenue Milestone", "$142.3M in Q4 revenue, up 23% YoY."},
                     {"ARR & Retention", "ARR: $156.8M | NRR: 118% | Churn: 4.2%"}};
    return spec;
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               fs::path("slidegym-render-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SlideSpec random_spec(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> sections(0, 5);
    std::uniform_int_distribution<int> words(0, 30);
    std::uniform_int_distribution<int> chars('a', 'z');
    auto word = [&]() {
        std::string w;
        for (int i = 0; i < 5; ++i) w.push_back(static_cast<char>(chars(rng)));
        return w;
    };
    auto sentence = [&](int n) {
        std::string s;
        for (int i = 0; i < n; ++i) {
            if (!s.empty()) s += ' ';
            s += word();
        }
        return s;
    };
    SlideSpec spec;
    spec.title = sentence(words(rng) % 8);
    const int n = sections(rng);
    for (int i = 0; i < n; ++i) spec.sections.push_back({sentence(2), sentence(words(rng))});
    return spec;
}

}  // namespace

TEST_CASE("themes match the published palettes byte for byte") {
    REQUIRE(builtin_themes().size() == 5);
    const ThemePalette* def = find_theme("default");
    REQUIRE(def != nullptr);
    CHECK(def->bg == Rgb{255, 255, 255});
    CHECK(def->text == Rgb{33, 33, 33});
    CHECK(def->accent == Rgb{41, 98, 255});
    CHECK(def->secondary == Rgb{100, 181, 246});

    const ThemePalette* tech = find_theme("tech");
    REQUIRE(tech != nullptr);
    CHECK(tech->bg == Rgb{18, 18, 18});
    CHECK(tech->accent == Rgb{0, 229, 255});
    CHECK(tech->secondary == Rgb{29, 233, 182});

    const ThemePalette* dark = find_theme("dark");
    REQUIRE(dark != nullptr);
    CHECK(dark->bg == Rgb{30, 30, 30});
    CHECK(dark->text == Rgb{240, 240, 240});
    CHECK(dark->accent == Rgb{0, 200, 83});

    const ThemePalette* corporate = find_theme("corporate");
    REQUIRE(corporate != nullptr);
    CHECK(corporate->text == Rgb{44, 62, 80});
    CHECK(corporate->secondary == Rgb{149, 165, 166});

    const ThemePalette* creative = find_theme("creative");
    REQUIRE(creative != nullptr);
    CHECK(creative->bg == Rgb{255, 253, 231});
    CHECK(creative->accent == Rgb{255, 87, 34});

    CHECK(find_theme("neon") == nullptr);
}

TEST_CASE("palette interpolation endpoints") {
    // colors=1.0 reproduces the palette exactly.
    for (const auto& theme : builtin_themes()) {
        const ConcretePalette pal = interpolate_palette(theme);
        CHECK(pal.bg == theme.bg);
        CHECK(pal.text == theme.text);
        CHECK(pal.accent == theme.accent);
        CHECK(pal.secondary == theme.secondary);
    }
    // colors=0.0 is grayscale: r=g=b everywhere.
    for (const auto& theme : builtin_themes()) {
        ThemePalette gray = theme;
        gray.colors = 0.0;
        const ConcretePalette pal = interpolate_palette(gray);
        for (const Rgb& c : {pal.bg, pal.text, pal.accent, pal.secondary}) {
            CHECK(c.r == c.g);
            CHECK(c.g == c.b);
        }
    }
}

TEST_CASE("palette midpoint rounds half-up from the luma gray") {
    // default accent (41,98,255): luma = 0.299*41 + 0.587*98 + 0.114*255
    // = 98.855 -> gray 99; midpoint channels (70, 99, 177).
    CHECK(luma_gray(Rgb{41, 98, 255}) == 99);
    ThemePalette theme = *find_theme("default");
    theme.colors = 0.5;
    const ConcretePalette pal = interpolate_palette(theme);
    CHECK(pal.accent == Rgb{70, 99, 177});
}

TEST_CASE("colors outside [0,1] is a validation error") {
    ThemePalette theme = *find_theme("default");
    theme.colors = 1.5;
    CHECK_THROWS_AS(interpolate_palette(theme), std::invalid_argument);
    theme.colors = -0.1;
    CHECK_THROWS_AS(interpolate_palette(theme), std::invalid_argument);
}

TEST_CASE("render_slide produces the class contract") {
    const RenderedSlide slide = render_slide(q4_spec(), *find_theme("default"));
    CHECK(count_occurrences(slide.html, "class=\"slide\"") == 1);
    CHECK(count_occurrences(slide.html, "class=\"title\"") == 1);
    CHECK(count_occurrences(slide.html, "class=\"section\"") == 2);
    CHECK(slide.section_count == 2);
    CHECK(slide.filled_sections == 2);
    CHECK(slide.valid_html);
    CHECK(slide.html.find("Q4 2025 Financial Results") != std::string::npos);
}

TEST_CASE("degenerate specs still render valid markup") {
    const RenderedSlide slide = render_slide(SlideSpec{}, *find_theme("default"));
    CHECK(slide.valid_html);
    CHECK(slide.word_count == 0);
    CHECK(slide.section_count == 0);
    CHECK(slide.filled_sections == 0);
}

TEST_CASE("rendering is deterministic") {
    const RenderedSlide a = render_slide(q4_spec(), *find_theme("tech"));
    const RenderedSlide b = render_slide(q4_spec(), *find_theme("tech"));
    CHECK(a.html == b.html);
}

TEST_CASE("html escaping round-trips through inspection") {
    SlideSpec spec;
    spec.title = "Risks & Mitigations <2026>";
    spec.sections = {{"a \"quote\"", "x < y > z & w"}};
    const RenderedSlide slide = render_slide(spec, *find_theme("default"));
    CHECK(slide.valid_html);
    const SlideStats stats = inspect_slide(slide.html);
    CHECK(stats.title_text == "Risks & Mitigations <2026>");
    CHECK(stats.heading_texts.at(0) == "a \"quote\"");
}

TEST_CASE("word count is the whitespace-token count of visible text") {
    SlideSpec spec;
    spec.title = "one two";                       // 2
    spec.sections = {{"three", "four five six"}}; // 4
    const RenderedSlide slide = render_slide(spec, *find_theme("default"));
    CHECK(slide.word_count == 6);
}

TEST_CASE("renderer/validator closure on random specs") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        const RenderedSlide slide = render_slide(random_spec(rng), builtin_themes()[i % 5]);
        INFO(slide.html);
        CHECK(validate_html(slide.html).valid);
    }
}

TEST_CASE("validate_html findings") {
    const auto missing = validate_html("<div>hello</div>");
    CHECK_FALSE(missing.valid);
    REQUIRE(missing.findings.size() == 2);
    CHECK(missing.findings[0].find(".slide") != std::string::npos);
    CHECK(missing.findings[1].find(".title") != std::string::npos);

    // Truncated renderer output: parse finding.
    const RenderedSlide slide = render_slide(q4_spec(), *find_theme("default"));
    const std::string truncated = slide.html.substr(0, slide.html.size() / 2);
    const auto report = validate_html(truncated);
    CHECK_FALSE(report.valid);
    REQUIRE_FALSE(report.findings.empty());
    CHECK(report.findings[0].find("parse") != std::string::npos);

    const auto soup = validate_html("<div class=\"slide\"><span>x</div></span>");
    CHECK_FALSE(soup.valid);
}

TEST_CASE("stub renderer returns a marker iff the html validates") {
    StubPngRenderer stub;
    const RenderedSlide slide = render_slide(q4_spec(), *find_theme("default"));
    auto png_bytes = stub.render(slide.html);
    REQUIRE(png_bytes.has_value());
    CHECK(*png_bytes == png::marker_png());
    CHECK_FALSE(stub.render("<div>nope</div>").has_value());
}

TEST_CASE("subprocess renderer speaks the stdin/stdout protocol") {
    TempDir dir;
    const fs::path script = dir.path / "fake_renderer.py";
    {
        std::ofstream out(script);
        out << "import sys, struct, zlib\n"
               "html = sys.stdin.read()\n"
               "if not html: sys.exit(2)\n"
               "w, h = 1280, 720\n"
               "raw = b''.join(b'\\x00' + b'\\xee' * (w * 3) for _ in range(h))\n"
               "def chunk(tag, data):\n"
               "    c = struct.pack('>I', len(data)) + tag + data\n"
               "    return c + struct.pack('>I', zlib.crc32(tag + data) & 0xffffffff)\n"
               "png = b'\\x89PNG\\r\\n\\x1a\\n'\n"
               "png += chunk(b'IHDR', struct.pack('>IIBBBBB', w, h, 8, 2, 0, 0, 0))\n"
               "png += chunk(b'IDAT', zlib.compress(raw))\n"
               "png += chunk(b'IEND', b'')\n"
               "sys.stdout.buffer.write(png)\n";
    }

    SubprocessPngRenderer renderer({"python3", script.string()}, 20000);
    const auto png_bytes = renderer.render("<div class=\"slide\"></div>");
    REQUIRE(png_bytes.has_value());
    const auto dims = png::probe(*png_bytes);
    REQUIRE(dims.has_value());
    CHECK(dims->width == 1280);
    CHECK(dims->height == 720);
}

TEST_CASE("subprocess renderer failure paths") {
    SubprocessPngRenderer failing({"false"}, 5000);
    CHECK_FALSE(failing.render("<div/>").has_value());

    SubprocessPngRenderer missing({"/nonexistent/renderer"}, 5000);
    CHECK_FALSE(missing.render("<div/>").has_value());

    // A renderer that hangs is killed at the timeout.
    SubprocessPngRenderer hanging({"sleep", "30"}, 400);
    CHECK_FALSE(hanging.render("<div/>").has_value());
}

TEST_CASE("export_deck writes deck.html and deck.pptx") {
    TempDir dir;
    std::vector<std::string> slides;
    for (int i = 0; i < 7; ++i) {
        SlideSpec spec = q4_spec();
        spec.title += " " + std::to_string(i);
        slides.push_back(render_slide(spec, *find_theme("corporate")).html);
    }

    const DeckExport exported = export_deck(slides, dir.path);
    REQUIRE(fs::exists(exported.deck_html));
    REQUIRE(fs::exists(exported.deck_pptx));

    std::ifstream in(exported.deck_html);
    std::string deck((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(count_occurrences(deck, "class=\"slide\"") == 7);
    CHECK(validate_html(deck).valid);

    // Re-parsing the export recovers the slide fragments byte for byte.
    const auto fragments = split_deck_html(deck);
    REQUIRE(fragments.size() == 7);
    for (std::size_t i = 0; i < fragments.size(); ++i) CHECK(fragments[i] == slides[i]);
}

TEST_CASE("deck.pptx lists exactly one slide part per slide") {
    TempDir dir;
    const std::vector<std::string> one = {render_slide(q4_spec(), *find_theme("default")).html};
    const DeckExport exported = export_deck(one, dir.path);
    const auto names = zipfile::list_entries_file(exported.deck_pptx);

    int slide_parts = 0;
    bool has_content_types = false, has_presentation = false;
    for (const auto& name : names) {
        if (name.rfind("ppt/slides/slide", 0) == 0 && name.find(".rels") == std::string::npos) {
            ++slide_parts;
        }
        if (name == "[Content_Types].xml") has_content_types = true;
        if (name == "ppt/presentation.xml") has_presentation = true;
    }
    CHECK(slide_parts == 1);
    CHECK(has_content_types);
    CHECK(has_presentation);
}

TEST_CASE("exporting an empty deck is a precondition error") {
    TempDir dir;
    CHECK_THROWS_AS(export_deck({}, dir.path), std::invalid_argument);
}
