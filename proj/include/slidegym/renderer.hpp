#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slidegym {

struct SlideSection {
    std::string heading;
    std::string body;
};

struct SlideSpec {
    int slide_idx = 0;
    std::string title;
    std::vector<SlideSection> sections;
};

struct Rgb {
    int r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// A named theme plus the color-intensity knob (1.0 = full palette,
/// 0.0 = grayscale).
struct ThemePalette {
    std::string name;
    Rgb bg, text, accent, secondary;
    double colors = 1.0;
};

/// The five built-in palettes.
const std::vector<ThemePalette>& builtin_themes();
const ThemePalette* find_theme(std::string_view name);
std::vector<std::string> theme_names();

struct ConcretePalette {
    Rgb bg, text, accent, secondary;
};

/// Per-channel linear interpolation between each color's luma gray
/// (colors=0) and the palette value (colors=1), rounding half-up.
/// Throws std::invalid_argument when colors is outside [0,1].
ConcretePalette interpolate_palette(const ThemePalette& theme);

/// Luma gray of one color, rounded half-up.
int luma_gray(const Rgb& c);

struct RenderedSlide {
    std::string html;
    std::optional<std::string> png;  // bytes; nullopt = not rendered
    bool valid_html = false;
    int word_count = 0;
    int section_count = 0;
    int filled_sections = 0;
};

struct HtmlValidation {
    bool valid = false;
    std::vector<std::string> findings;
};

/// Structural facts extracted from slide HTML; the reward metrics read
/// slides only through this.
struct SlideStats {
    std::string title_text;
    std::vector<std::string> heading_texts;
    std::vector<std::string> section_texts;  // heading + body per section
    std::string visible_text;                // title + headings + bodies
    int word_count = 0;
    int section_count = 0;
    int filled_sections = 0;
    bool has_title_text = false;
};

/// PNG rendering boundary. The stub adapter keeps the whole test suite
/// browser-free; the subprocess adapter shells out to a real renderer.
class PngRenderer {
  public:
    virtual ~PngRenderer() = default;
    virtual std::optional<std::string> render(std::string_view html) = 0;
};

/// Returns a marker PNG iff the HTML validates, else nullopt.
class StubPngRenderer : public PngRenderer {
  public:
    std::optional<std::string> render(std::string_view html) override;
};

/// Runs `command`, writes HTML to its stdin, reads PNG bytes from its
/// stdout. Nonzero exit, timeout, or empty output count as render failure.
class SubprocessPngRenderer : public PngRenderer {
  public:
    explicit SubprocessPngRenderer(std::vector<std::string> command, int timeout_ms = 20000);
    std::optional<std::string> render(std::string_view html) override;

  private:
    std::vector<std::string> command_;
    int timeout_ms_;
};

/// Deterministic HTML for one slide under the given theme.
RenderedSlide render_slide(const SlideSpec& spec, const ThemePalette& theme,
                           PngRenderer* png_renderer = nullptr);

/// True iff the document parses (balanced tags) and contains .slide and
/// .title elements; findings name each failed requirement.
HtmlValidation validate_html(std::string_view html);

SlideStats inspect_slide(std::string_view html);

struct DeckExport {
    std::filesystem::path deck_html;
    std::filesystem::path deck_pptx;
};

/// Write deck.html (slides concatenated with minimal navigation) and a
/// text-only deck.pptx into out_dir, atomically. Throws
/// std::invalid_argument on an empty deck and std::runtime_error on I/O
/// failure.
DeckExport export_deck(std::span<const std::string> slides_html,
                       const std::filesystem::path& out_dir);

/// Slide fragments of a deck.html produced by export_deck.
std::vector<std::string> split_deck_html(std::string_view deck_html);

}  // namespace slidegym
