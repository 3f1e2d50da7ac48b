#include "slidegym/util.hpp"

#include <cctype>
#include <cstdlib>

namespace slidegym::util {

namespace {
constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::string_view data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                           (static_cast<unsigned char>(data[i + 1]) << 8) |
                           static_cast<unsigned char>(data[i + 2]);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
        i += 3;
    }
    const std::size_t rem = data.size() - i;
    if (rem == 1) {
        const unsigned v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                           (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::optional<std::string> base64_decode(std::string_view data) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    int buffer = 0, bits = 0;
    for (char c : data) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = value_of(c);
        if (v < 0) return std::nullopt;
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buffer >> bits) & 0xff));
        }
    }
    return out;
}

std::optional<nlohmann::json> first_json_object(
    std::string_view text, const std::function<bool(const nlohmann::json&)>& pred) {
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
        // Balanced-brace extraction that respects string literals.
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string_view::npos;
        for (std::size_t i = pos; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    end = i;
                    break;
                }
            }
        }
        if (end == std::string_view::npos) return std::nullopt;  // no balanced close ahead

        nlohmann::json candidate = nlohmann::json::parse(text.substr(pos, end - pos + 1),
                                                         nullptr, /*allow_exceptions=*/false);
        if (!candidate.is_discarded() && candidate.is_object()) {
            if (!pred || pred(candidate)) return candidate;
            // Keep scanning inside this object for a nested match.
            ++pos;
            continue;
        }
        ++pos;
    }
    return std::nullopt;
}

std::optional<double> first_unit_number(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isdigit(static_cast<unsigned char>(text[i])) ||
            (text[i] == '.' && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t end = i;
            bool seen_dot = false;
            while (end < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[end])) ||
                    (text[end] == '.' && !seen_dot))) {
                if (text[end] == '.') seen_dot = true;
                ++end;
            }
            const std::string token(text.substr(i, end - i));
            char* parse_end = nullptr;
            const double value = std::strtod(token.c_str(), &parse_end);
            if (parse_end && *parse_end == '\0' && value >= 0.0 && value <= 1.0) return value;
            i = end;
        } else {
            ++i;
        }
    }
    return std::nullopt;
}

}  // namespace slidegym::util
