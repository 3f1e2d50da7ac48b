#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

// Text utilities shared by the reward metrics and the offline judges.
// All overlap metrics in the project go through content_words() so that
// "word overlap" means exactly one thing everywhere: lowercase word
// tokens, length >= 3, minus a fixed stopword list.

namespace slidegym::text {

/// Lowercased word tokens. A word is a maximal run of ASCII alphanumerics
/// or non-ASCII bytes; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);

/// tokenize() minus stopwords and tokens shorter than 3 characters.
std::vector<std::string> content_words(std::string_view s);

std::set<std::string> content_word_set(std::string_view s);

/// Consecutive n-grams over a token list, joined with single spaces.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Whitespace-token count (the word-count metric for slides).
std::size_t count_words(std::string_view s);

std::string lowercase(std::string_view s);
std::string trim(std::string_view s);

/// Collapse whitespace runs to single spaces and trim the ends.
std::string normalize_whitespace(std::string_view s);

/// The fixed 60-entry stopword list used by content_words().
const std::set<std::string>& stopwords();

}  // namespace slidegym::text
