#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace slidegym::util {

std::string base64_encode(std::string_view data);
std::optional<std::string> base64_decode(std::string_view data);

/// Scans left to right for balanced {...} spans and returns the first one
/// that parses as JSON and satisfies pred. Tolerates surrounding prose and
/// code fences; descends into nested objects when the outer one does not
/// match.
std::optional<nlohmann::json> first_json_object(
    std::string_view text,
    const std::function<bool(const nlohmann::json&)>& pred = nullptr);

/// First real number in [0,1] appearing in the text, if any.
std::optional<double> first_unit_number(std::string_view text);

}  // namespace slidegym::util
