#include "acs/data/io.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace acs::data {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<unsigned char, 4> kMagic = {'A', 'C', 'S', 'D'};
// 0x01020304 stored little-endian.
constexpr std::array<unsigned char, 4> kLittleMarker = {0x04, 0x03, 0x02, 0x01};
constexpr std::array<unsigned char, 4> kBigMarker = {0x01, 0x02, 0x03, 0x04};
constexpr std::size_t kPreambleBytes = 8;

void put_f32le(std::string& out, float v) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffU));
}

float get_f32le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    float v = 0.0F;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::string crc32_hex(const std::string& bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    std::ostringstream os;
    os << "crc32:" << std::hex << std::setw(8) << std::setfill('0') << static_cast<std::uint32_t>(crc);
    return os.str();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename T>
T require_key(const json& meta, const char* key) {
    if (!meta.contains(key)) throw HeaderError(std::string("meta.json is missing key '") + key + "'");
    try {
        return meta.at(key).get<T>();
    } catch (const json::exception& e) {
        throw HeaderError(std::string("meta.json key '") + key + "' has the wrong type: " + e.what());
    }
}

}  // namespace

void save_dataset(const Dataset& ds, const fs::path& dir) {
    std::int64_t height = 0;
    std::int64_t width = 0;
    if (!ds.slices.empty()) {
        height = ds.slices.front().image.height;
        width = ds.slices.front().image.width;
    }
    std::string blob;
    blob.append(kMagic.begin(), kMagic.end());
    blob.append(kLittleMarker.begin(), kLittleMarker.end());
    json subject_ids = json::array();
    for (const auto& s : ds.slices) {
        if (s.image.shape() != s.mask.shape()) throw ShapeMismatchError("slice image and mask shapes differ");
        if (s.image.height != height || s.image.width != width) {
            throw ShapeMismatchError("all slices in a dataset must share one shape");
        }
        for (float v : s.image.values) put_f32le(blob, v);
        for (auto m : s.mask.values) blob.push_back(static_cast<char>(m));
        subject_ids.push_back(s.subject_id);
    }

    json meta;
    meta["format_version"] = kDatasetFormatVersion;
    meta["name"] = ds.name;
    meta["domain_id"] = ds.domain_id;
    meta["n_slices"] = ds.slices.size();
    meta["height"] = height;
    meta["width"] = width;
    meta["dtype"] = "f32le";
    meta["subject_ids"] = std::move(subject_ids);
    meta["checksum"] = crc32_hex(blob);

    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream meta_out(dir / "meta.json", std::ios::binary | std::ios::trunc);
    std::ofstream data_out(dir / "data.bin", std::ios::binary | std::ios::trunc);
    if (!meta_out || !data_out) throw IoError("cannot write dataset to " + dir.string());
    meta_out << meta.dump(2) << '\n';
    data_out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!meta_out || !data_out) throw IoError("failed while writing dataset to " + dir.string());
}

Dataset load_dataset(const fs::path& dir) {
    json meta;
    try {
        meta = json::parse(read_file(dir / "meta.json"));
    } catch (const json::parse_error& e) {
        throw HeaderError(std::string("meta.json is not valid JSON: ") + e.what());
    }
    if (!meta.is_object()) throw HeaderError("meta.json must hold an object");

    const int version = require_key<int>(meta, "format_version");
    if (version != kDatasetFormatVersion) {
        throw HeaderError("unsupported dataset format_version " + std::to_string(version));
    }
    const auto dtype = require_key<std::string>(meta, "dtype");
    if (dtype == "f32be") throw EndiannessError("dataset declares big-endian floats (f32be); only f32le is supported");
    if (dtype != "f32le") throw HeaderError("unsupported dtype '" + dtype + "'");

    const auto n_slices = require_key<std::int64_t>(meta, "n_slices");
    const auto height = require_key<std::int64_t>(meta, "height");
    const auto width = require_key<std::int64_t>(meta, "width");
    if (n_slices < 0 || height < 0 || width < 0) throw HeaderError("negative size in meta.json");
    const auto mask_height = meta.value("mask_height", height);
    const auto mask_width = meta.value("mask_width", width);
    if (mask_height != height || mask_width != width) {
        throw ShapeMismatchError("mask shape " + std::to_string(mask_height) + "x" + std::to_string(mask_width) +
                                 " does not match image shape " + std::to_string(height) + "x" +
                                 std::to_string(width));
    }
    const auto subject_ids = require_key<std::vector<int>>(meta, "subject_ids");
    if (static_cast<std::int64_t>(subject_ids.size()) != n_slices) {
        throw HeaderError("subject_ids has " + std::to_string(subject_ids.size()) + " entries, n_slices is " +
                          std::to_string(n_slices));
    }
    const auto checksum = require_key<std::string>(meta, "checksum");

    const std::string blob = read_file(dir / "data.bin");
    if (blob.size() < kPreambleBytes) throw TruncationError("data.bin is shorter than its preamble");
    if (std::memcmp(blob.data(), kMagic.data(), kMagic.size()) != 0) {
        throw HeaderError("data.bin does not start with the ACSD magic");
    }
    if (std::memcmp(blob.data() + 4, kBigMarker.data(), 4) == 0) {
        throw EndiannessError("data.bin byte-order marker says big-endian; expected little-endian");
    }
    if (std::memcmp(blob.data() + 4, kLittleMarker.data(), 4) != 0) {
        throw HeaderError("data.bin byte-order marker is unrecognised");
    }

    const auto pixels = static_cast<std::size_t>(height * width);
    const std::size_t per_slice = pixels * 5;
    const std::size_t expected = kPreambleBytes + per_slice * static_cast<std::size_t>(n_slices);
    if (blob.size() < expected) {
        const std::size_t present = per_slice == 0 ? 0 : (blob.size() - kPreambleBytes) / per_slice;
        throw TruncationError("meta.json declares " + std::to_string(n_slices) + " slices but data.bin holds " +
                              std::to_string(present));
    }
    if (blob.size() > expected) throw FormatError("data.bin has trailing bytes beyond the declared slices");
    if (crc32_hex(blob) != checksum) throw ChecksumError("data.bin checksum does not match meta.json");

    Dataset ds;
    ds.name = require_key<std::string>(meta, "name");
    ds.domain_id = require_key<int>(meta, "domain_id");
    ds.slices.reserve(static_cast<std::size_t>(n_slices));
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data()) + kPreambleBytes;
    for (std::int64_t i = 0; i < n_slices; ++i) {
        LabeledSlice s;
        s.image = Image(height, width);
        s.mask = Mask(height, width);
        for (std::size_t k = 0; k < pixels; ++k, p += 4) s.image.values[k] = get_f32le(p);
        for (std::size_t k = 0; k < pixels; ++k, ++p) s.mask.values[k] = *p;
        s.domain_id = ds.domain_id;
        s.subject_id = subject_ids[static_cast<std::size_t>(i)];
        try {
            validate_slice(s);
        } catch (const Error& e) {
            throw FormatError("slice " + std::to_string(i) + " is invalid: " + e.what());
        }
        ds.slices.push_back(std::move(s));
    }
    return ds;
}

}  // namespace acs::data
