#include "slidegym/zipfile.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slidegym::zipfile {

namespace {

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get16(std::string_view s, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off])) |
           (static_cast<std::uint16_t>(static_cast<unsigned char>(s[off + 1])) << 8);
}

std::uint32_t get32(std::string_view s, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[off + i]);
    return v;
}

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

}  // namespace

std::string write_archive(const std::vector<Entry>& entries) {
    std::string out;
    struct Record {
        std::uint32_t crc;
        std::uint32_t size;
        std::uint32_t offset;
    };
    std::vector<Record> records;
    records.reserve(entries.size());

    for (const auto& e : entries) {
        Record rec;
        rec.offset = static_cast<std::uint32_t>(out.size());
        rec.size = static_cast<std::uint32_t>(e.data.size());
        rec.crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(e.data.data()), static_cast<uInt>(e.data.size())));

        put32(out, kLocalSig);
        put16(out, 20);  // version needed
        put16(out, 0);   // flags
        put16(out, 0);   // method: stored
        put16(out, 0);   // mod time
        put16(out, 0);   // mod date
        put32(out, rec.crc);
        put32(out, rec.size);
        put32(out, rec.size);
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);  // extra len
        out += e.name;
        out += e.data;
        records.push_back(rec);
    }

    const std::uint32_t central_offset = static_cast<std::uint32_t>(out.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto& rec = records[i];
        put32(out, kCentralSig);
        put16(out, 20);  // version made by
        put16(out, 20);  // version needed
        put16(out, 0);
        put16(out, 0);
        put16(out, 0);
        put16(out, 0);
        put32(out, rec.crc);
        put32(out, rec.size);
        put32(out, rec.size);
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);  // extra
        put16(out, 0);  // comment
        put16(out, 0);  // disk
        put16(out, 0);  // internal attrs
        put32(out, 0);  // external attrs
        put32(out, rec.offset);
        out += e.name;
    }
    const std::uint32_t central_size = static_cast<std::uint32_t>(out.size()) - central_offset;

    put32(out, kEndSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, central_size);
    put32(out, central_offset);
    put16(out, 0);  // comment length
    return out;
}

std::vector<std::string> list_entries(std::string_view archive) {
    if (archive.size() < 22) throw std::runtime_error("zip: archive too small");
    // End-of-central-directory has no comment in archives we write; still scan
    // backwards to stay tolerant of trailing data.
    std::size_t eocd = std::string_view::npos;
    for (std::size_t i = archive.size() - 22; ; --i) {
        if (get32(archive, i) == kEndSig) {
            eocd = i;
            break;
        }
        if (i == 0) break;
    }
    if (eocd == std::string_view::npos) throw std::runtime_error("zip: no end-of-central-directory");

    const std::uint16_t count = get16(archive, eocd + 10);
    std::size_t off = get32(archive, eocd + 16);
    std::vector<std::string> names;
    names.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
        if (off + 46 > archive.size() || get32(archive, off) != kCentralSig) {
            throw std::runtime_error("zip: corrupt central directory");
        }
        const std::uint16_t name_len = get16(archive, off + 28);
        const std::uint16_t extra_len = get16(archive, off + 30);
        const std::uint16_t comment_len = get16(archive, off + 32);
        names.emplace_back(archive.substr(off + 46, name_len));
        off += 46 + name_len + extra_len + comment_len;
    }
    return names;
}

std::vector<std::string> list_entries_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("zip: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return list_entries(buf.str());
}

std::string read_entry(std::string_view archive, std::string_view name) {
    std::size_t off = 0;
    while (off + 30 <= archive.size() && get32(archive, off) == kLocalSig) {
        const std::uint32_t size = get32(archive, off + 18);
        const std::uint16_t name_len = get16(archive, off + 26);
        const std::uint16_t extra_len = get16(archive, off + 28);
        const std::string_view entry_name = archive.substr(off + 30, name_len);
        const std::size_t data_off = off + 30 + name_len + extra_len;
        if (entry_name == name) return std::string(archive.substr(data_off, size));
        off = data_off + size;
    }
    throw std::runtime_error("zip: entry not found: " + std::string(name));
}

}  // namespace slidegym::zipfile
