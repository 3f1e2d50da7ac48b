#include "slidegym/pngcodec.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>

namespace slidegym::png {

namespace {

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::uint32_t get32(std::string_view s, std::size_t off) {
    return (std::uint32_t(static_cast<unsigned char>(s[off])) << 24) |
           (std::uint32_t(static_cast<unsigned char>(s[off + 1])) << 16) |
           (std::uint32_t(static_cast<unsigned char>(s[off + 2])) << 8) |
           std::uint32_t(static_cast<unsigned char>(s[off + 3]));
}

void put32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

void append_chunk(std::string& out, const char type[4], std::string_view payload) {
    put32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.append(type, 4);
    out.append(payload);
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(out.data() + crc_start), static_cast<uInt>(out.size() - crc_start)));
    put32(out, crc);
}

std::optional<std::vector<std::uint8_t>> inflate_all(std::string_view data, std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    uLongf out_len = static_cast<uLongf>(expected);
    const int rc = uncompress(out.data(), &out_len, reinterpret_cast<const Bytef*>(data.data()),
                              static_cast<uLong>(data.size()));
    if (rc != Z_OK || out_len != expected) return std::nullopt;
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

std::optional<Dimensions> probe(std::string_view bytes) {
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kSignature, 8) != 0) return std::nullopt;
    if (bytes.substr(12, 4) != "IHDR") return std::nullopt;
    Dimensions d;
    d.width = static_cast<int>(get32(bytes, 16));
    d.height = static_cast<int>(get32(bytes, 20));
    return d;
}

std::optional<Image> decode(std::string_view bytes) {
    auto dims = probe(bytes);
    if (!dims) return std::nullopt;
    const int bit_depth = static_cast<unsigned char>(bytes[24]);
    const int color_type = static_cast<unsigned char>(bytes[25]);
    const int interlace = static_cast<unsigned char>(bytes[28]);
    if (bit_depth != 8 || interlace != 0) return std::nullopt;

    int channels;
    switch (color_type) {
        case 0: channels = 1; break;  // grayscale
        case 2: channels = 3; break;  // RGB
        case 6: channels = 4; break;  // RGBA
        default: return std::nullopt;
    }

    std::string idat;
    std::size_t off = 8;
    while (off + 8 <= bytes.size()) {
        const std::uint32_t len = get32(bytes, off);
        const std::string_view type = bytes.substr(off + 4, 4);
        if (off + 12 + len > bytes.size()) return std::nullopt;
        if (type == "IDAT") idat.append(bytes.substr(off + 8, len));
        if (type == "IEND") break;
        off += 12 + len;
    }
    if (idat.empty()) return std::nullopt;

    const std::size_t stride = std::size_t(dims->width) * channels;
    auto raw = inflate_all(idat, (stride + 1) * dims->height);
    if (!raw) return std::nullopt;

    // Undo per-row filters in place.
    std::vector<std::uint8_t> pixels(stride * dims->height);
    for (int y = 0; y < dims->height; ++y) {
        const std::uint8_t filter = (*raw)[(stride + 1) * y];
        const std::uint8_t* src = raw->data() + (stride + 1) * y + 1;
        std::uint8_t* dst = pixels.data() + stride * y;
        const std::uint8_t* prev = y > 0 ? pixels.data() + stride * (y - 1) : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x >= std::size_t(channels) ? dst[x - channels] : 0;
            const int b = prev ? prev[x] : 0;
            const int c = (prev && x >= std::size_t(channels)) ? prev[x - channels] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: return std::nullopt;
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xff);
        }
    }

    Image img;
    img.width = dims->width;
    img.height = dims->height;
    img.rgb.resize(std::size_t(dims->width) * dims->height * 3);
    for (std::size_t i = 0; i < std::size_t(dims->width) * dims->height; ++i) {
        const std::uint8_t* px = pixels.data() + i * channels;
        if (channels == 1) {
            img.rgb[i * 3] = img.rgb[i * 3 + 1] = img.rgb[i * 3 + 2] = px[0];
        } else {
            img.rgb[i * 3] = px[0];
            img.rgb[i * 3 + 1] = px[1];
            img.rgb[i * 3 + 2] = px[2];
        }
    }
    return img;
}

std::string encode(const Image& img) {
    const std::size_t stride = std::size_t(img.width) * 3;
    std::string raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back('\0');  // filter: none
        raw.append(reinterpret_cast<const char*>(img.rgb.data() + stride * y), stride);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
              reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()), 6);
    compressed.resize(bound);

    std::string out(reinterpret_cast<const char*>(kSignature), 8);
    std::string ihdr;
    put32(ihdr, static_cast<std::uint32_t>(img.width));
    put32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: RGB
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", "");
    return out;
}

Image scale_to_width(const Image& img, int target_width) {
    if (img.width <= 0 || img.height <= 0 || target_width <= 0) return {};
    if (img.width <= target_width) return img;
    const int target_height = std::max(1, static_cast<int>(std::lround(
        static_cast<double>(img.height) * target_width / img.width)));
    Image out;
    out.width = target_width;
    out.height = target_height;
    out.rgb.resize(std::size_t(target_width) * target_height * 3);
    for (int y = 0; y < target_height; ++y) {
        const int y0 = y * img.height / target_height;
        const int y1 = std::max(y0 + 1, (y + 1) * img.height / target_height);
        for (int x = 0; x < target_width; ++x) {
            const int x0 = x * img.width / target_width;
            const int x1 = std::max(x0 + 1, (x + 1) * img.width / target_width);
            unsigned long sum[3] = {0, 0, 0};
            for (int yy = y0; yy < y1; ++yy) {
                for (int xx = x0; xx < x1; ++xx) {
                    const std::uint8_t* px = img.rgb.data() + (std::size_t(yy) * img.width + xx) * 3;
                    sum[0] += px[0];
                    sum[1] += px[1];
                    sum[2] += px[2];
                }
            }
            const unsigned long n = static_cast<unsigned long>(y1 - y0) * (x1 - x0);
            std::uint8_t* dst = out.rgb.data() + (std::size_t(y) * target_width + x) * 3;
            dst[0] = static_cast<std::uint8_t>(sum[0] / n);
            dst[1] = static_cast<std::uint8_t>(sum[1] / n);
            dst[2] = static_cast<std::uint8_t>(sum[2] / n);
        }
    }
    return out;
}

const std::string& marker_png() {
    static const std::string kMarker = [] {
        Image img;
        img.width = 4;
        img.height = 4;
        img.rgb.assign(4 * 4 * 3, 0xee);
        return encode(img);
    }();
    return kMarker;
}

}  // namespace slidegym::png
