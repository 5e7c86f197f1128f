#include "acs/models/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace acs::models {
namespace {

namespace fs = std::filesystem;
constexpr std::size_t kBlock = 512;

void put_octal(char* field, std::size_t width, std::uint64_t value) {
    // width - 1 digits followed by NUL.
    std::string digits(width - 1, '0');
    for (std::size_t i = width - 1; i-- > 0;) {
        digits[i] = static_cast<char>('0' + (value & 7U));
        value >>= 3;
    }
    if (value != 0) throw CheckpointError("archive field overflow");
    std::memcpy(field, digits.data(), width - 1);
    field[width - 1] = '\0';
}

std::uint64_t get_octal(const char* field, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width && field[i] != '\0' && field[i] != ' '; ++i) {
        if (field[i] < '0' || field[i] > '7') throw CheckpointError("archive header has a non-octal size field");
        v = (v << 3) | static_cast<std::uint64_t>(field[i] - '0');
    }
    return v;
}

std::uint32_t header_checksum(const std::array<char, kBlock>& h) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
        const bool in_field = i >= 148 && i < 156;
        sum += in_field ? static_cast<std::uint32_t>(' ') : static_cast<unsigned char>(h[i]);
    }
    return sum;
}

void put_f32le(std::string& out, float v) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffU));
}

std::string blob_name(const std::string& tensor_name) { return "params/" + tensor_name + ".f32"; }

}  // namespace

void write_archive(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [name, data] : entries) {
        if (name.size() >= 100) throw CheckpointError("archive entry name too long: " + name);
        std::array<char, kBlock> h{};
        std::memcpy(h.data(), name.data(), name.size());
        put_octal(&h[100], 8, 0644);
        put_octal(&h[108], 8, 0);
        put_octal(&h[116], 8, 0);
        put_octal(&h[124], 12, data.size());
        put_octal(&h[136], 12, 0);
        h[156] = '0';
        std::memcpy(&h[257], "ustar", 6);
        h[263] = '0';
        h[264] = '0';
        put_octal(&h[148], 7, header_checksum(h));
        h[155] = ' ';
        out.write(h.data(), kBlock);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        const std::size_t pad = (kBlock - data.size() % kBlock) % kBlock;
        const std::string zeros(pad, '\0');
        out.write(zeros.data(), static_cast<std::streamsize>(pad));
    }
    const std::string end(2 * kBlock, '\0');
    out.write(end.data(), static_cast<std::streamsize>(end.size()));
    if (!out) throw IoError("failed while writing " + path.string());
}

std::map<std::string, std::string> read_archive(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();

    std::map<std::string, std::string> entries;
    std::size_t pos = 0;
    while (pos + kBlock <= bytes.size()) {
        std::array<char, kBlock> h{};
        std::memcpy(h.data(), bytes.data() + pos, kBlock);
        if (h[0] == '\0') return entries;
        if (get_octal(&h[148], 8) != header_checksum(h)) throw CheckpointError("archive header checksum mismatch");
        const std::string name(h.data(), strnlen(h.data(), 100));
        const auto size = static_cast<std::size_t>(get_octal(&h[124], 12));
        pos += kBlock;
        if (pos + size > bytes.size()) throw CheckpointError("archive entry '" + name + "' is truncated");
        entries[name] = bytes.substr(pos, size);
        pos += (size + kBlock - 1) / kBlock * kBlock;
    }
    throw CheckpointError("archive is missing its end-of-archive marker");
}

nlohmann::json layer_list(const NamedTensors& tensors) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& [name, t] : tensors) layers.push_back({{"name", name}, {"shape", t.sizes().vec()}});
    return layers;
}

void save_tensors(const fs::path& path, const nlohmann::json& manifest, const NamedTensors& tensors) {
    std::vector<std::pair<std::string, std::string>> entries;
    entries.emplace_back("manifest.json", manifest.dump(2) + "\n");
    for (const auto& [name, t] : tensors) {
        const auto flat = t.detach().to(torch::kFloat32).contiguous().view(-1);
        const float* data = flat.data_ptr<float>();
        std::string blob;
        blob.reserve(static_cast<std::size_t>(flat.numel()) * 4);
        for (std::int64_t i = 0; i < flat.numel(); ++i) put_f32le(blob, data[i]);
        entries.emplace_back(blob_name(name), std::move(blob));
    }
    write_archive(path, entries);
}

nlohmann::json load_tensors(const fs::path& path, NamedTensors& tensors) {
    const auto entries = read_archive(path);
    const auto it = entries.find("manifest.json");
    if (it == entries.end()) throw CheckpointError("checkpoint has no manifest.json");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(it->second);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("manifest.json is invalid: ") + e.what());
    }
    if (manifest.value("format_version", -1) != kCheckpointFormatVersion) {
        throw CheckpointError("unsupported checkpoint format_version");
    }

    std::map<std::string, std::vector<std::int64_t>> declared;
    for (const auto& layer : manifest.at("layers")) {
        declared[layer.at("name").get<std::string>()] = layer.at("shape").get<std::vector<std::int64_t>>();
    }
    if (declared.size() != tensors.size()) {
        throw CheckpointError("checkpoint declares " + std::to_string(declared.size()) + " tensors, model has " +
                              std::to_string(tensors.size()));
    }
    torch::NoGradGuard no_grad;
    for (auto& [name, t] : tensors) {
        const auto d = declared.find(name);
        if (d == declared.end()) throw CheckpointError("checkpoint is missing tensor '" + name + "'");
        if (d->second != t.sizes().vec()) throw CheckpointError("shape mismatch for tensor '" + name + "'");
        const auto blob = entries.find(blob_name(name));
        if (blob == entries.end()) throw CheckpointError("checkpoint has no blob for '" + name + "'");
        if (blob->second.size() != static_cast<std::size_t>(t.numel()) * 4) {
            throw CheckpointError("blob size mismatch for tensor '" + name + "'");
        }
        auto values = torch::empty({t.numel()}, torch::kFloat32);
        float* dst = values.data_ptr<float>();
        const auto* src = reinterpret_cast<const unsigned char*>(blob->second.data());
        for (std::int64_t i = 0; i < t.numel(); ++i, src += 4) {
            std::uint32_t bits = 0;
            for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(src[k]) << (8 * k);
            std::memcpy(&dst[i], &bits, sizeof bits);
        }
        t.copy_(values.view(t.sizes()));
    }
    return manifest;
}

}  // namespace acs::models
