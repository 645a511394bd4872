// SPDX-License-Identifier: Apache-2.0
//
// Image persistence: 8-bit PNG (libpng simplified API), raw float32 dumps and
// SHA-256 file checksums.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <png.h>

#include "rainsynth/errors.hpp"
#include "rainsynth/face_crop.hpp"
#include "rainsynth/image.hpp"

namespace rainsynth {

namespace fs = std::filesystem;
using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open for reading");
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path.string(), "read failed");
    return data;
}

inline void write_file(const fs::path& path, const Bytes& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError(path.string(), "write failed");
}

inline std::string sha256_hex(const Bytes& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

inline std::uint8_t to_u8(double v) noexcept {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// Reduces an image to the values an 8-bit file can hold.
inline ImageTensor quantize8(ImageTensor img) {
    for (double& v : img.data()) v = to_u8(v) / 255.0;
    return img;
}

namespace detail {

inline Bytes png_encode_raw(const std::uint8_t* pixels, int h, int w, int channels) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr))
        throw std::runtime_error(std::string("png encode: ") + image.message);
    Bytes out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr))
        throw std::runtime_error(std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

struct DecodedPng {
    int height = 0, width = 0, channels = 0;
    Bytes pixels;
};

inline DecodedPng png_decode_raw(const Bytes& data, const std::string& name) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size()))
        throw IoError(name, std::string("not a decodable PNG: ") + image.message);
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    DecodedPng out;
    out.height = static_cast<int>(image.height);
    out.width = static_cast<int>(image.width);
    out.channels = color ? 3 : 1;
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError(name, std::string("PNG decode failed: ") + image.message);
    }
    return out;
}

} // namespace detail

/// Encodes to 8-bit PNG after clamping to [0,1] and rounding.
inline Bytes encode_png(const ImageTensor& img) {
    Bytes px(img.size());
    auto src = img.data();
    std::transform(src.begin(), src.end(), px.begin(), to_u8);
    return detail::png_encode_raw(px.data(), img.height(), img.width(), img.channels());
}

inline ImageTensor decode_png(const Bytes& data, const std::string& name = "<memory>") {
    const auto raw = detail::png_decode_raw(data, name);
    ImageTensor img(raw.height, raw.width, raw.channels);
    auto dst = img.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = raw.pixels[i] / 255.0;
    return img;
}

inline void write_png(const fs::path& path, const ImageTensor& img) { write_file(path, encode_png(img)); }

inline ImageTensor read_png(const fs::path& path) { return decode_png(read_file(path), path.string()); }

/// Parsing maps are stored as 8-bit grayscale whose value is the class index.
inline Bytes encode_parsed_png(const ParsedMap& map) {
    return detail::png_encode_raw(map.raw().data(), map.height(), map.width(), 1);
}

inline ParsedMap decode_parsed_png(const Bytes& data, const std::string& name = "<memory>") {
    const auto raw = detail::png_decode_raw(data, name);
    if (raw.channels != 1) throw IoError(name, "parsing map must be single-channel");
    ParsedMap map(raw.height, raw.width);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x) {
            const auto v = raw.pixels[static_cast<std::size_t>(y) * raw.width + x];
            if (v >= kFaceClassCount) throw CorruptionError(name + ": label " + std::to_string(v) + " outside class set");
            map.set_raw(y, x, v);
        }
    return map;
}

// Raw float dump: 16-byte header {magic "RSF1", u32 height, u32 width,
// u32 channels}, then height*width*channels float32, all little-endian.
inline constexpr std::array<std::uint8_t, 4> kRawMagic = {'R', 'S', 'F', '1'};
inline constexpr std::size_t kRawHeaderSize = 16;

namespace detail {

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const Bytes& in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
    return v;
}

} // namespace detail

inline Bytes encode_raw_f32(const ImageTensor& img) {
    Bytes out;
    out.reserve(kRawHeaderSize + 4 * img.size());
    out.insert(out.end(), kRawMagic.begin(), kRawMagic.end());
    detail::put_u32(out, static_cast<std::uint32_t>(img.height()));
    detail::put_u32(out, static_cast<std::uint32_t>(img.width()));
    detail::put_u32(out, static_cast<std::uint32_t>(img.channels()));
    for (double v : img.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

inline ImageTensor decode_raw_f32(const Bytes& data, const std::string& name = "<memory>") {
    if (data.size() < kRawHeaderSize || !std::equal(kRawMagic.begin(), kRawMagic.end(), data.begin()))
        throw CorruptionError(name + ": missing raw float header");
    const auto h = detail::get_u32(data, 4), w = detail::get_u32(data, 8), c = detail::get_u32(data, 12);
    if (h == 0 || w == 0 || (c != 1 && c != 3) || h > 1u << 16 || w > 1u << 16)
        throw CorruptionError(name + ": implausible raw float dimensions");
    const std::size_t n = static_cast<std::size_t>(h) * w * c;
    if (data.size() != kRawHeaderSize + 4 * n) throw CorruptionError(name + ": raw float payload size mismatch");
    ImageTensor img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    auto dst = img.data();
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = std::bit_cast<float>(detail::get_u32(data, kRawHeaderSize + 4 * i));
    return img;
}

} // namespace rainsynth
