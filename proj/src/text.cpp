#include "slidegym/text.hpp"

#include <algorithm>
#include <cctype>

namespace slidegym::text {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

}  // namespace

const std::set<std::string>& stopwords() {
    static const std::set<std::string> kStopwords = {
        "the",  "and",   "for",   "are",   "but",  "not",  "you",  "all",
        "any",  "can",   "had",   "her",   "was",  "one",  "our",  "out",
        "has",  "have",  "him",   "his",   "how",  "its",  "may",  "new",
        "now",  "old",   "see",   "two",   "way",  "who",  "with", "this",
        "that", "they",  "them",  "then",  "will", "would", "there", "their",
        "what", "when",  "which", "while", "your", "from", "been", "were",
        "said", "each",  "she",   "more",  "some", "than", "into", "very",
        "just", "over",  "also",  "such",
    };
    return kStopwords;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // swallow leading whitespace
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : s) {
        if (is_word_byte(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::vector<std::string> content_words(std::string_view s) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(s)) {
        if (tok.size() < 3) continue;
        if (stopwords().count(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

std::set<std::string> content_word_set(std::string_view s) {
    auto words = content_words(s);
    return {words.begin(), words.end()};
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n) {
    std::vector<std::string> out;
    if (n == 0 || tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            gram += ' ';
            gram += tokens[i + j];
        }
        out.push_back(std::move(gram));
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& w : a) {
        if (b.count(w)) ++inter;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t count_words(std::string_view s) {
    std::size_t count = 0;
    bool in_token = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

}  // namespace slidegym::text
