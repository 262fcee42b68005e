#include "ccedit/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ccedit {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'K', 'P', 'T', '0', '0', '1'};

void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

float read_f32(std::istream& is) {
    uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
    os.write(kMagic, sizeof(kMagic));
    std::string cfg = config.dump();
    write_u32(os, static_cast<uint32_t>(cfg.size()));
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    write_u32(os, static_cast<uint32_t>(arrays.size()));
    for (const auto& [name, entry] : arrays) {
        write_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        os.put(entry.frozen ? 1 : 0);
        write_u32(os, static_cast<uint32_t>(entry.tensor.shape.size()));
        for (int d : entry.tensor.shape) write_u32(os, static_cast<uint32_t>(d));
        for (double v : entry.tensor.data) write_f32(os, static_cast<float>(v));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    Checkpoint ck;
    uint32_t cfg_len = read_u32(is);
    std::string cfg(cfg_len, '\0');
    is.read(cfg.data(), cfg_len);
    if (!is) throw std::runtime_error("checkpoint: truncated config in " + path);
    ck.config = nlohmann::json::parse(cfg);
    uint32_t count = read_u32(is);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        int frozen = is.get();
        if (!is || frozen < 0) throw std::runtime_error("checkpoint: truncated entry in " + path);
        uint32_t ndim = read_u32(is);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(read_u32(is));
        Tensor t(shape);
        for (double& v : t.data) v = static_cast<double>(read_f32(is));
        ck.arrays.emplace(std::move(name), Entry{std::move(t), frozen != 0});
    }
    return ck;
}

Checkpoint Checkpoint::from_store(const nn::ParamStore& store, nlohmann::json config) {
    Checkpoint ck;
    ck.config = std::move(config);
    for (const auto& name : store.names())
        ck.arrays.emplace(name, Entry{store.get(name).value(), store.frozen(name)});
    return ck;
}

void Checkpoint::into_store(nn::ParamStore& store) const {
    for (const auto& [name, entry] : arrays) {
        if (store.has(name))
            store.set(name, entry.tensor);
        else
            store.create(name, entry.tensor);
        store.set_frozen(name, entry.frozen);
    }
}

}  // namespace ccedit
