#include "slidegym/renderer.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "slidegym/pngcodec.hpp"
#include "slidegym/text.hpp"
#include "slidegym/zipfile.hpp"

namespace slidegym {

namespace {

std::string escape_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string unescape_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '&') {
            auto matches = [&](std::string_view ent) { return s.substr(i, ent.size()) == ent; };
            if (matches("&amp;")) { out += '&'; i += 5; continue; }
            if (matches("&lt;")) { out += '<'; i += 4; continue; }
            if (matches("&gt;")) { out += '>'; i += 4; continue; }
            if (matches("&quot;")) { out += '"'; i += 6; continue; }
            if (matches("&#39;") || matches("&apos;")) { out += '\''; i += 5 + (s[i + 1] == 'a'); continue; }
        }
        out.push_back(s[i++]);
    }
    return out;
}

std::string rgb_css(const Rgb& c) {
    return "rgb(" + std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b) + ")";
}

}  // namespace

const std::vector<ThemePalette>& builtin_themes() {
    static const std::vector<ThemePalette> kThemes = {
        {"default", {255, 255, 255}, {33, 33, 33}, {41, 98, 255}, {100, 181, 246}, 1.0},
        {"dark", {30, 30, 30}, {240, 240, 240}, {0, 200, 83}, {76, 175, 80}, 1.0},
        {"corporate", {245, 245, 245}, {44, 62, 80}, {52, 73, 94}, {149, 165, 166}, 1.0},
        {"creative", {255, 253, 231}, {33, 33, 33}, {255, 87, 34}, {255, 167, 38}, 1.0},
        {"tech", {18, 18, 18}, {224, 224, 224}, {0, 229, 255}, {29, 233, 182}, 1.0},
    };
    return kThemes;
}

const ThemePalette* find_theme(std::string_view name) {
    for (const auto& t : builtin_themes()) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::vector<std::string> theme_names() {
    std::vector<std::string> names;
    for (const auto& t : builtin_themes()) names.push_back(t.name);
    return names;
}

int luma_gray(const Rgb& c) {
    return static_cast<int>(std::floor(0.299 * c.r + 0.587 * c.g + 0.114 * c.b + 0.5));
}

ConcretePalette interpolate_palette(const ThemePalette& theme) {
    if (!(theme.colors >= 0.0 && theme.colors <= 1.0)) {
        throw std::invalid_argument("colors intensity must be in [0,1]");
    }
    auto interp = [&theme](const Rgb& c) {
        const int gray = luma_gray(c);
        auto channel = [&](int v) {
            return static_cast<int>(std::floor(gray + (v - gray) * theme.colors + 0.5));
        };
        return Rgb{channel(c.r), channel(c.g), channel(c.b)};
    };
    return {interp(theme.bg), interp(theme.text), interp(theme.accent), interp(theme.secondary)};
}

// ---------------------------------------------------------------------------
// HTML parsing (lightweight, enough for the class/structure contract)
// ---------------------------------------------------------------------------

namespace {

struct HtmlNode {
    std::string tag;
    std::string class_attr;
    std::string text;
    std::vector<HtmlNode> children;
};

const std::set<std::string>& void_elements() {
    static const std::set<std::string> kVoid = {"meta", "br", "hr", "img", "link", "input", "source", "wbr"};
    return kVoid;
}

std::string extract_class_attr(std::string_view tag_body) {
    const std::size_t pos = tag_body.find("class=");
    if (pos == std::string_view::npos) return {};
    std::size_t i = pos + 6;
    if (i >= tag_body.size()) return {};
    const char quote = tag_body[i];
    if (quote != '"' && quote != '\'') return {};
    const std::size_t end = tag_body.find(quote, i + 1);
    if (end == std::string_view::npos) return {};
    return std::string(tag_body.substr(i + 1, end - i - 1));
}

// Returns a synthetic root node or nullopt when the markup is unbalanced.
std::optional<HtmlNode> parse_html(std::string_view html) {
    HtmlNode root;
    std::vector<HtmlNode*> stack = {&root};
    std::size_t i = 0;

    while (i < html.size()) {
        if (html[i] != '<') {
            const std::size_t next = html.find('<', i);
            const std::size_t end = next == std::string_view::npos ? html.size() : next;
            stack.back()->text += unescape_html(html.substr(i, end - i));
            stack.back()->text += ' ';
            i = end;
            continue;
        }
        if (html.substr(i, 4) == "<!--") {
            const std::size_t end = html.find("-->", i);
            if (end == std::string_view::npos) return std::nullopt;
            i = end + 3;
            continue;
        }
        if (html.substr(i, 2) == "<!") {
            const std::size_t end = html.find('>', i);
            if (end == std::string_view::npos) return std::nullopt;
            i = end + 1;
            continue;
        }
        if (html.substr(i, 2) == "</") {
            const std::size_t end = html.find('>', i);
            if (end == std::string_view::npos) return std::nullopt;
            std::string name = text::lowercase(text::trim(html.substr(i + 2, end - i - 2)));
            if (stack.size() < 2 || stack.back()->tag != name) return std::nullopt;
            stack.pop_back();
            i = end + 1;
            continue;
        }

        // Opening tag; find the closing '>' outside quoted attribute values.
        std::size_t j = i + 1;
        char quote = '\0';
        while (j < html.size()) {
            const char c = html[j];
            if (quote != '\0') {
                if (c == quote) quote = '\0';
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                break;
            }
            ++j;
        }
        if (j >= html.size()) return std::nullopt;

        std::string_view body = html.substr(i + 1, j - i - 1);
        bool self_closing = false;
        if (!body.empty() && body.back() == '/') {
            self_closing = true;
            body.remove_suffix(1);
        }
        std::size_t name_end = 0;
        while (name_end < body.size() && !std::isspace(static_cast<unsigned char>(body[name_end]))) {
            ++name_end;
        }
        const std::string name = text::lowercase(body.substr(0, name_end));
        if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) {
            // Not markup (e.g. a lone '<'); treat as text.
            stack.back()->text += '<';
            ++i;
            continue;
        }

        HtmlNode node;
        node.tag = name;
        node.class_attr = extract_class_attr(body);
        stack.back()->children.push_back(std::move(node));
        if (!self_closing && !void_elements().count(name)) {
            stack.push_back(&stack.back()->children.back());
        }
        i = j + 1;
    }

    if (stack.size() != 1) return std::nullopt;  // unclosed tags
    return root;
}

bool has_class(const HtmlNode& node, std::string_view cls) {
    std::size_t pos = 0;
    const std::string& attr = node.class_attr;
    while (pos < attr.size()) {
        std::size_t end = attr.find(' ', pos);
        if (end == std::string::npos) end = attr.size();
        if (attr.substr(pos, end - pos) == cls) return true;
        pos = end + 1;
    }
    return false;
}

void collect_by_class(const HtmlNode& node, std::string_view cls, std::vector<const HtmlNode*>& out) {
    if (has_class(node, cls)) out.push_back(&node);
    for (const auto& child : node.children) collect_by_class(child, cls, out);
}

void subtree_text_into(const HtmlNode& node, std::string& out) {
    out += node.text;
    for (const auto& child : node.children) subtree_text_into(child, out);
}

std::string subtree_text(const HtmlNode& node) {
    std::string raw;
    subtree_text_into(node, raw);
    return text::normalize_whitespace(raw);
}

}  // namespace

HtmlValidation validate_html(std::string_view html) {
    HtmlValidation report;
    auto root = parse_html(html);
    if (!root) {
        report.findings.push_back("markup does not parse (unbalanced or truncated tags)");
        return report;
    }
    std::vector<const HtmlNode*> slides, titles;
    collect_by_class(*root, "slide", slides);
    collect_by_class(*root, "title", titles);
    if (slides.empty()) report.findings.push_back("missing .slide element");
    if (titles.empty()) report.findings.push_back("missing .title element");
    report.valid = report.findings.empty();
    return report;
}

SlideStats inspect_slide(std::string_view html) {
    SlideStats stats;
    auto root = parse_html(html);
    if (!root) return stats;

    std::vector<const HtmlNode*> titles, sections, headings, bodies;
    collect_by_class(*root, "title", titles);
    collect_by_class(*root, "section", sections);
    collect_by_class(*root, "heading", headings);
    collect_by_class(*root, "body", bodies);

    if (!titles.empty()) stats.title_text = subtree_text(*titles.front());
    stats.has_title_text = !stats.title_text.empty();
    for (const auto* h : headings) stats.heading_texts.push_back(subtree_text(*h));
    for (const auto* s : sections) stats.section_texts.push_back(subtree_text(*s));

    std::string visible = stats.title_text;
    for (const auto* h : headings) {
        visible += ' ';
        visible += subtree_text(*h);
    }
    for (const auto* b : bodies) {
        visible += ' ';
        visible += subtree_text(*b);
    }
    stats.visible_text = text::normalize_whitespace(visible);
    stats.word_count = static_cast<int>(text::count_words(stats.visible_text));
    stats.section_count = static_cast<int>(sections.size());
    for (const auto& s : stats.section_texts) {
        if (!s.empty()) ++stats.filled_sections;
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

RenderedSlide render_slide(const SlideSpec& spec, const ThemePalette& theme,
                           PngRenderer* png_renderer) {
    const ConcretePalette pal = interpolate_palette(theme);

    const std::string slide_style =
        "background:" + rgb_css(pal.bg) + ";color:" + rgb_css(pal.text) +
        ";width:1280px;height:720px;box-sizing:border-box;padding:48px 64px;"
        "font-family:'Segoe UI',Arial,sans-serif;display:flex;flex-direction:column;overflow:hidden";
    const std::string title_style =
        "font-size:44px;font-weight:600;color:" + rgb_css(pal.accent) +
        ";border-bottom:4px solid " + rgb_css(pal.secondary) +
        ";padding-bottom:12px;margin-bottom:28px";
    const std::string heading_style =
        "font-size:26px;font-weight:600;color:" + rgb_css(pal.secondary) + ";margin-bottom:6px";

    std::string html;
    html += "<div class=\"slide\" style=\"" + slide_style + "\">\n";
    html += "  <div class=\"title\" style=\"" + title_style + "\">" +
            escape_html(text::trim(spec.title)) + "</div>\n";
    for (const auto& section : spec.sections) {
        html += "  <div class=\"section\" style=\"margin-bottom:22px\">\n";
        html += "    <div class=\"heading\" style=\"" + heading_style + "\">" +
                escape_html(text::trim(section.heading)) + "</div>\n";
        html += "    <div class=\"body\" style=\"font-size:20px;line-height:1.45\">" +
                escape_html(text::trim(section.body)) + "</div>\n";
        html += "  </div>\n";
    }
    html += "</div>";

    RenderedSlide rendered;
    rendered.html = html;
    const SlideStats stats = inspect_slide(html);
    rendered.valid_html = validate_html(html).valid;
    rendered.word_count = stats.word_count;
    rendered.section_count = stats.section_count;
    rendered.filled_sections = stats.filled_sections;
    if (png_renderer) rendered.png = png_renderer->render(html);
    return rendered;
}

std::optional<std::string> StubPngRenderer::render(std::string_view html) {
    if (!validate_html(html).valid) return std::nullopt;
    return png::marker_png();
}

// ---------------------------------------------------------------------------
// Subprocess PNG adapter: html on stdin, PNG on stdout, nonzero exit = fail
// ---------------------------------------------------------------------------

SubprocessPngRenderer::SubprocessPngRenderer(std::vector<std::string> command, int timeout_ms)
    : command_(std::move(command)), timeout_ms_(timeout_ms) {}

std::optional<std::string> SubprocessPngRenderer::render(std::string_view html) {
    if (command_.empty()) return std::nullopt;

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0) return std::nullopt;
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        return std::nullopt;
    }

    const pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        return std::nullopt;
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        std::vector<char*> argv;
        for (auto& arg : command_) argv.push_back(arg.data());
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);

    // Feed the HTML; the child may exit early, so ignore EPIPE.
    signal(SIGPIPE, SIG_IGN);
    std::size_t written = 0;
    while (written < html.size()) {
        const ssize_t n = write(in_pipe[1], html.data() + written, html.size() - written);
        if (n <= 0) break;
        written += static_cast<std::size_t>(n);
    }
    close(in_pipe[1]);

    std::string output;
    char buf[4096];
    int elapsed_ms = 0;
    bool timed_out = false;
    while (true) {
        pollfd pfd{out_pipe[0], POLLIN, 0};
        const int rc = poll(&pfd, 1, 100);
        if (rc > 0) {
            const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                output.append(buf, static_cast<std::size_t>(n));
                continue;
            }
            break;  // EOF
        }
        elapsed_ms += 100;
        if (elapsed_ms >= timeout_ms_) {
            timed_out = true;
            kill(pid, SIGKILL);
            break;
        }
    }
    close(out_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (timed_out || !WIFEXITED(status) || WEXITSTATUS(status) != 0 || output.empty()) {
        return std::nullopt;
    }
    return output;
}

// ---------------------------------------------------------------------------
// Deck export
// ---------------------------------------------------------------------------

namespace {

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

constexpr const char* kXmlDecl = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
constexpr const char* kNsA = "http://schemas.openxmlformats.org/drawingml/2006/main";
constexpr const char* kNsP = "http://schemas.openxmlformats.org/presentationml/2006/main";
constexpr const char* kNsR = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";

std::string empty_sp_tree() {
    return "<p:cSld><p:spTree><p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/>"
           "</p:nvGrpSpPr><p:grpSpPr/></p:spTree></p:cSld>";
}

std::string slide_xml(const SlideStats& stats) {
    std::ostringstream body;
    body << kXmlDecl;
    body << "<p:sld xmlns:a=\"" << kNsA << "\" xmlns:r=\"" << kNsR << "\" xmlns:p=\"" << kNsP
         << "\"><p:cSld><p:spTree>"
         << "<p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr><p:grpSpPr/>"
         << "<p:sp><p:nvSpPr><p:cNvPr id=\"2\" name=\"Title\"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr>"
         << "<p:spPr><a:xfrm><a:off x=\"457200\" y=\"274638\"/><a:ext cx=\"11277600\" cy=\"1143000\"/></a:xfrm>"
         << "<a:prstGeom prst=\"rect\"><a:avLst/></a:prstGeom></p:spPr>"
         << "<p:txBody><a:bodyPr/><a:lstStyle/><a:p><a:r><a:t>" << escape_xml(stats.title_text)
         << "</a:t></a:r></a:p></p:txBody></p:sp>"
         << "<p:sp><p:nvSpPr><p:cNvPr id=\"3\" name=\"Content\"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr>"
         << "<p:spPr><a:xfrm><a:off x=\"457200\" y=\"1600200\"/><a:ext cx=\"11277600\" cy=\"4800600\"/></a:xfrm>"
         << "<a:prstGeom prst=\"rect\"><a:avLst/></a:prstGeom></p:spPr>"
         << "<p:txBody><a:bodyPr/><a:lstStyle/>";
    if (stats.section_texts.empty()) {
        body << "<a:p><a:endParaRPr/></a:p>";
    } else {
        for (const auto& section : stats.section_texts) {
            body << "<a:p><a:r><a:t>" << escape_xml(section) << "</a:t></a:r></a:p>";
        }
    }
    body << "</p:txBody></p:sp></p:spTree></p:cSld>"
         << "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>";
    return body.str();
}

std::string theme_xml() {
    std::ostringstream out;
    out << kXmlDecl << "<a:theme xmlns:a=\"" << kNsA << "\" name=\"Office\"><a:themeElements>"
        << "<a:clrScheme name=\"Office\">"
        << "<a:dk1><a:sysClr val=\"windowText\" lastClr=\"000000\"/></a:dk1>"
        << "<a:lt1><a:sysClr val=\"window\" lastClr=\"FFFFFF\"/></a:lt1>"
        << "<a:dk2><a:srgbClr val=\"44546A\"/></a:dk2><a:lt2><a:srgbClr val=\"E7E6E6\"/></a:lt2>"
        << "<a:accent1><a:srgbClr val=\"4472C4\"/></a:accent1><a:accent2><a:srgbClr val=\"ED7D31\"/></a:accent2>"
        << "<a:accent3><a:srgbClr val=\"A5A5A5\"/></a:accent3><a:accent4><a:srgbClr val=\"FFC000\"/></a:accent4>"
        << "<a:accent5><a:srgbClr val=\"5B9BD5\"/></a:accent5><a:accent6><a:srgbClr val=\"70AD47\"/></a:accent6>"
        << "<a:hlink><a:srgbClr val=\"0563C1\"/></a:hlink><a:folHlink><a:srgbClr val=\"954F72\"/></a:folHlink>"
        << "</a:clrScheme>"
        << "<a:fontScheme name=\"Office\">"
        << "<a:majorFont><a:latin typeface=\"Calibri Light\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:majorFont>"
        << "<a:minorFont><a:latin typeface=\"Calibri\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:minorFont>"
        << "</a:fontScheme>"
        << "<a:fmtScheme name=\"Office\">";
    const char* solid = "<a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>";
    out << "<a:fillStyleLst>" << solid << solid << solid << "</a:fillStyleLst>"
        << "<a:lnStyleLst>"
        << "<a:ln>" << solid << "</a:ln><a:ln>" << solid << "</a:ln><a:ln>" << solid << "</a:ln>"
        << "</a:lnStyleLst>"
        << "<a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle>"
        << "<a:effectStyle><a:effectLst/></a:effectStyle><a:effectStyle><a:effectLst/></a:effectStyle>"
        << "</a:effectStyleLst>"
        << "<a:bgFillStyleLst>" << solid << solid << solid << "</a:bgFillStyleLst>"
        << "</a:fmtScheme></a:themeElements></a:theme>";
    return out.str();
}

std::string build_pptx(std::span<const std::string> slides_html) {
    const std::size_t n = slides_html.size();
    std::vector<zipfile::Entry> entries;

    {
        std::ostringstream ct;
        ct << kXmlDecl
           << "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
           << "<Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>"
           << "<Default Extension=\"xml\" ContentType=\"application/xml\"/>"
           << "<Override PartName=\"/ppt/presentation.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml\"/>"
           << "<Override PartName=\"/ppt/slideMasters/slideMaster1.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml\"/>"
           << "<Override PartName=\"/ppt/slideLayouts/slideLayout1.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml\"/>"
           << "<Override PartName=\"/ppt/theme/theme1.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.theme+xml\"/>";
        for (std::size_t i = 1; i <= n; ++i) {
            ct << "<Override PartName=\"/ppt/slides/slide" << i
               << ".xml\" ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.slide+xml\"/>";
        }
        ct << "</Types>";
        entries.push_back({"[Content_Types].xml", ct.str()});
    }

    entries.push_back(
        {"_rels/.rels",
         std::string(kXmlDecl) +
             "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
             "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument\" Target=\"ppt/presentation.xml\"/>"
             "</Relationships>"});

    {
        std::ostringstream pres, rels;
        pres << kXmlDecl << "<p:presentation xmlns:a=\"" << kNsA << "\" xmlns:r=\"" << kNsR
             << "\" xmlns:p=\"" << kNsP << "\">"
             << "<p:sldMasterIdLst><p:sldMasterId id=\"2147483648\" r:id=\"rId" << (n + 1)
             << "\"/></p:sldMasterIdLst><p:sldIdLst>";
        rels << kXmlDecl
             << "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">";
        for (std::size_t i = 1; i <= n; ++i) {
            pres << "<p:sldId id=\"" << (255 + i) << "\" r:id=\"rId" << i << "\"/>";
            rels << "<Relationship Id=\"rId" << i
                 << "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide\" Target=\"slides/slide"
                 << i << ".xml\"/>";
        }
        pres << "</p:sldIdLst><p:sldSz cx=\"12192000\" cy=\"6858000\"/>"
             << "<p:notesSz cx=\"6858000\" cy=\"9144000\"/></p:presentation>";
        rels << "<Relationship Id=\"rId" << (n + 1)
             << "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster\" Target=\"slideMasters/slideMaster1.xml\"/>"
             << "</Relationships>";
        entries.push_back({"ppt/presentation.xml", pres.str()});
        entries.push_back({"ppt/_rels/presentation.xml.rels", rels.str()});
    }

    entries.push_back(
        {"ppt/slideMasters/slideMaster1.xml",
         std::string(kXmlDecl) + "<p:sldMaster xmlns:a=\"" + kNsA + "\" xmlns:r=\"" + kNsR +
             "\" xmlns:p=\"" + kNsP + "\">" + empty_sp_tree() +
             "<p:clrMap bg1=\"lt1\" tx1=\"dk1\" bg2=\"lt2\" tx2=\"dk2\" accent1=\"accent1\""
             " accent2=\"accent2\" accent3=\"accent3\" accent4=\"accent4\" accent5=\"accent5\""
             " accent6=\"accent6\" hlink=\"hlink\" folHlink=\"folHlink\"/>"
             "<p:sldLayoutIdLst><p:sldLayoutId id=\"2147483649\" r:id=\"rId1\"/></p:sldLayoutIdLst>"
             "</p:sldMaster>"});
    entries.push_back(
        {"ppt/slideMasters/_rels/slideMaster1.xml.rels",
         std::string(kXmlDecl) +
             "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
             "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout\" Target=\"../slideLayouts/slideLayout1.xml\"/>"
             "<Relationship Id=\"rId2\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme\" Target=\"../theme/theme1.xml\"/>"
             "</Relationships>"});
    entries.push_back(
        {"ppt/slideLayouts/slideLayout1.xml",
         std::string(kXmlDecl) + "<p:sldLayout xmlns:a=\"" + kNsA + "\" xmlns:r=\"" + kNsR +
             "\" xmlns:p=\"" + kNsP + "\" type=\"blank\">" + empty_sp_tree() +
             "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>"});
    entries.push_back(
        {"ppt/slideLayouts/_rels/slideLayout1.xml.rels",
         std::string(kXmlDecl) +
             "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
             "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster\" Target=\"../slideMasters/slideMaster1.xml\"/>"
             "</Relationships>"});
    entries.push_back({"ppt/theme/theme1.xml", theme_xml()});

    const std::string slide_rels =
        std::string(kXmlDecl) +
        "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
        "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout\" Target=\"../slideLayouts/slideLayout1.xml\"/>"
        "</Relationships>";
    for (std::size_t i = 0; i < n; ++i) {
        entries.push_back({"ppt/slides/slide" + std::to_string(i + 1) + ".xml",
                           slide_xml(inspect_slide(slides_html[i]))});
        entries.push_back({"ppt/slides/_rels/slide" + std::to_string(i + 1) + ".xml.rels", slide_rels});
    }

    return zipfile::write_archive(entries);
}

}  // namespace

DeckExport export_deck(std::span<const std::string> slides_html,
                       const std::filesystem::path& out_dir) {
    if (slides_html.empty()) throw std::invalid_argument("cannot export an empty deck");
    std::filesystem::create_directories(out_dir);

    std::ostringstream doc;
    doc << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Slide Deck</title>\n"
        << "<style>\nbody { margin: 0; background: #555; }\n"
        << ".deck-nav { text-align: center; padding: 12px; }\n"
        << ".deck-nav a { color: #fff; margin: 0 6px; font-family: sans-serif; }\n"
        << ".deck-slide { display: block; margin: 24px auto; width: 1280px; }\n</style>\n"
        << "</head>\n<body>\n<nav class=\"deck-nav\">";
    for (std::size_t i = 0; i < slides_html.size(); ++i) {
        doc << "<a href=\"#slide-" << i << "\">" << (i + 1) << "</a>";
    }
    doc << "</nav>\n";
    for (std::size_t i = 0; i < slides_html.size(); ++i) {
        doc << "<section class=\"deck-slide\" id=\"slide-" << i << "\">\n"
            << slides_html[i] << "\n</section>\n";
    }
    doc << "</body>\n</html>\n";

    DeckExport result;
    result.deck_html = out_dir / "deck.html";
    result.deck_pptx = out_dir / "deck.pptx";
    write_file_atomic(result.deck_html, doc.str());
    write_file_atomic(result.deck_pptx, build_pptx(slides_html));
    return result;
}

std::vector<std::string> split_deck_html(std::string_view deck_html) {
    std::vector<std::string> fragments;
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = deck_html.find("<section class=\"deck-slide\"", pos);
        if (open == std::string_view::npos) break;
        const std::size_t start = deck_html.find('>', open);
        const std::size_t end = deck_html.find("</section>", open);
        if (start == std::string_view::npos || end == std::string_view::npos) break;
        std::string_view body = deck_html.substr(start + 1, end - start - 1);
        // Strip the single newline of padding on each side.
        if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
        if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
        fragments.emplace_back(body);
        pos = end + 10;
    }
    return fragments;
}

}  // namespace slidegym
