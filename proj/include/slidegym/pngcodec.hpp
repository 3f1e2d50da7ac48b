#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small PNG codec used for the stub renderer's marker images and for
// thumbnailing screenshots; handles 8-bit grayscale/RGB/RGBA,
// non-interlaced, which covers what screenshot tools emit.

namespace slidegym::png {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // packed RGB8, row-major
};

struct Dimensions {
    int width = 0;
    int height = 0;
};

/// Parse width/height from the IHDR chunk without decoding.
std::optional<Dimensions> probe(std::string_view bytes);

/// Decode a PNG into packed RGB8. Returns nullopt on unsupported input.
std::optional<Image> decode(std::string_view bytes);

/// Encode packed RGB8 as a PNG.
std::string encode(const Image& img);

/// Box-filter downscale to the given width, preserving aspect ratio.
Image scale_to_width(const Image& img, int target_width);

/// A fixed 4x4 PNG used by the stub renderer as a render-success marker.
const std::string& marker_png();

}  // namespace slidegym::png
