#pragma once

// `.evt` container, all integers little-endian:
//   "SPDCEVT1"                       8-byte magic, last byte is the version
//   u32 channel count
//   per channel: u8 id, u64 event count, u64 duration (fs ticks),
//                then `count` u64 timestamps, ascending

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spdclab/errors.hpp"
#include "spdclab/event_sim.hpp"

namespace spdclab {

inline constexpr std::array<char, 8> evt_magic{'S', 'P', 'D', 'C', 'E', 'V', 'T', '1'};
inline constexpr std::size_t evt_header_bytes = 8 + 4;
inline constexpr std::size_t evt_channel_header_bytes = 1 + 8 + 8;

/// Exact file size for the given streams.
inline std::uint64_t evt_file_size(const std::vector<EventStream>& streams) {
    std::uint64_t n = evt_header_bytes;
    for (const auto& s : streams) n += evt_channel_header_bytes + 8 * static_cast<std::uint64_t>(s.size());
    return n;
}

namespace detail {

template <class UInt>
void put_le(std::vector<unsigned char>& buf, UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

template <class UInt>
UInt get_le(const unsigned char* p) {
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
    return v;
}

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw format_error("cannot open '" + path + "'");
    }
    void read(unsigned char* dst, std::size_t n, const char* what) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw format_error(std::string("truncated file while reading ") + what);
    }
    template <class UInt>
    UInt read_le(const char* what) {
        std::array<unsigned char, sizeof(UInt)> b{};
        read(b.data(), b.size(), what);
        return get_le<UInt>(b.data());
    }
    bool at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

private:
    std::ifstream in_;
};

} // namespace detail

/// Writes atomically: a temporary sibling file is renamed over `path`.
inline void write_events(const std::vector<EventStream>& streams, const std::filesystem::path& path) {
    for (const auto& s : streams) s.require_sorted();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        std::vector<unsigned char> buf;
        buf.insert(buf.end(), evt_magic.begin(), evt_magic.end());
        detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(streams.size()));
        for (const auto& s : streams) {
            buf.push_back(static_cast<unsigned char>(s.channel));
            detail::put_le<std::uint64_t>(buf, s.size());
            detail::put_le<std::uint64_t>(buf, s.duration);
            constexpr std::size_t block = 1 << 16;
            for (std::size_t i = 0; i < s.size(); ++i) {
                detail::put_le<std::uint64_t>(buf, s.timestamps[i]);
                if (buf.size() >= 8 * block) {
                    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
                    buf.clear();
                }
            }
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::vector<EventStream> read_events(const std::filesystem::path& path) {
    detail::Reader in(path.string());
    std::array<unsigned char, 8> magic{};
    in.read(magic.data(), magic.size(), "magic");
    for (std::size_t i = 0; i + 1 < magic.size(); ++i) {
        if (magic[i] != static_cast<unsigned char>(evt_magic[i])) throw format_error("not an .evt file (bad magic)");
    }
    if (magic.back() != static_cast<unsigned char>(evt_magic.back())) {
        throw format_error(std::string("unsupported .evt version '") + static_cast<char>(magic.back()) + "'");
    }
    const auto channels = in.read_le<std::uint32_t>("channel count");
    if (channels > 255) throw format_error("implausible channel count");
    const auto file_bytes = std::filesystem::file_size(path);

    std::vector<EventStream> out;
    std::uint64_t offset = evt_header_bytes;
    for (std::uint32_t c = 0; c < channels; ++c) {
        EventStream s;
        std::array<unsigned char, 1> id{};
        in.read(id.data(), 1, "channel id");
        if (id[0] > static_cast<unsigned char>(Channel::signal2)) throw format_error("unknown channel id " + std::to_string(id[0]));
        s.channel = static_cast<Channel>(id[0]);
        const auto count = in.read_le<std::uint64_t>("event count");
        s.duration = in.read_le<std::uint64_t>("duration");
        offset += evt_channel_header_bytes;
        if (count > (file_bytes - std::min(file_bytes, offset)) / 8) {
            throw format_error("truncated file: declared event count exceeds remaining bytes");
        }
        s.timestamps.resize(count);
        std::vector<unsigned char> raw(std::min<std::uint64_t>(count, 1 << 16) * 8);
        std::uint64_t done = 0;
        while (done < count) {
            const std::uint64_t n = std::min<std::uint64_t>(count - done, raw.size() / 8);
            in.read(raw.data(), n * 8, "timestamps");
            for (std::uint64_t k = 0; k < n; ++k) s.timestamps[done + k] = detail::get_le<std::uint64_t>(&raw[8 * k]);
            done += n;
        }
        offset += 8 * count;
        if (!s.is_sorted()) throw format_error("timestamps of channel " + std::string(channel_name(s.channel)) + " not ascending");
        out.push_back(std::move(s));
    }
    if (!in.at_end()) throw format_error("trailing bytes after the declared channels");
    return out;
}

} // namespace spdclab
