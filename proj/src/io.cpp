#include "ccedit/io.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace ccedit {

namespace {

uint8_t quantize(double v, double lo, double hi) {
    double u = (v - lo) / (hi - lo);
    if (u < 0.0) u = 0.0;
    if (u > 1.0) u = 1.0;
    return static_cast<uint8_t>(std::lround(u * 255.0));
}

double dequantize(uint8_t b, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(b) / 255.0);
}

// Reads a PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw std::runtime_error("pnm: truncated header");
    return tok;
}

std::string frame_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04d.ppm", i);
    return buf;
}

}  // namespace

void write_ppm(const std::string& path, const PixelFrame& frame) {
    int h = frame.height(), w = frame.width();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(w) * 3);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j)
            for (int c = 0; c < 3; ++c)
                row[static_cast<size_t>(j) * 3 + c] = quantize(frame.data.at3(c, i, j), -1.0, 1.0);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write_ppm: write failed for " + path);
}

PixelFrame read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open " + path);
    if (pnm_token(in) != "P6") throw std::runtime_error("read_ppm: not a binary PPM: " + path);
    int w = std::stoi(pnm_token(in));
    int h = std::stoi(pnm_token(in));
    int maxv = std::stoi(pnm_token(in));
    if (maxv != 255) throw std::runtime_error("read_ppm: expected maxval 255 in " + path);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error("read_ppm: truncated pixel data in " + path);
    Tensor t({3, h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int c = 0; c < 3; ++c)
                t.at3(c, i, j) = dequantize(raw[(static_cast<size_t>(i) * w + j) * 3 + c], -1.0, 1.0);
    return PixelFrame(std::move(t));
}

void write_pgm(const std::string& path, const Tensor& map) {
    if (map.ndim() != 2) throw std::invalid_argument("write_pgm: expects (h,w), got " + map.shape_str());
    int h = map.dim(0), w = map.dim(1);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << w << " " << h << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(w));
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) row[static_cast<size_t>(j)] = quantize(map.at2(i, j), 0.0, 1.0);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

Tensor read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
    if (pnm_token(in) != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
    int w = std::stoi(pnm_token(in));
    int h = std::stoi(pnm_token(in));
    int maxv = std::stoi(pnm_token(in));
    if (maxv != 255) throw std::runtime_error("read_pgm: expected maxval 255 in " + path);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw std::runtime_error("read_pgm: truncated pixel data in " + path);
    Tensor t({h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) t.at2(i, j) = dequantize(raw[static_cast<size_t>(i) * w + j], 0.0, 1.0);
    return t;
}

void write_clip(const std::string& dir, const VideoClip& clip) {
    clip.validate();
    fs::create_directories(dir);
    for (int i = 0; i < clip.length(); ++i)
        write_ppm((fs::path(dir) / frame_name(i)).string(), clip.frames[static_cast<size_t>(i)]);
    nlohmann::json meta{{"fps", clip.fps},
                        {"frames", clip.length()},
                        {"height", clip.frames[0].height()},
                        {"width", clip.frames[0].width()}};
    save_json((fs::path(dir) / "metadata.json").string(), meta);
}

VideoClip read_clip(const std::string& dir) {
    auto meta = load_json((fs::path(dir) / "metadata.json").string());
    VideoClip clip;
    clip.fps = meta.at("fps").get<double>();
    int n = meta.at("frames").get<int>();
    for (int i = 0; i < n; ++i)
        clip.frames.push_back(read_ppm((fs::path(dir) / frame_name(i)).string()));
    clip.validate();
    if (clip.frames[0].height() != meta.at("height").get<int>() ||
        clip.frames[0].width() != meta.at("width").get<int>())
        throw std::runtime_error("read_clip: metadata/frame size mismatch in " + dir);
    return clip;
}

void write_structure_sequence(const std::string& dir, const StructureSequence& seq) {
    fs::create_directories(dir);
    for (size_t i = 0; i < seq.maps.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "map_%04zu.pgm", i);
        write_pgm((fs::path(dir) / buf).string(), seq.maps[i]);
    }
    nlohmann::json meta{{"kind", to_string(seq.kind)}, {"maps", seq.maps.size()}};
    save_json((fs::path(dir) / "metadata.json").string(), meta);
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_json: cannot open " + path);
    return nlohmann::json::parse(in);
}

void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_json: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("save_json: write failed for " + path);
}

uint64_t fnv1a(const void* data, size_t n, uint64_t seed) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t hash_tensor(const Tensor& t) {
    uint64_t h = fnv1a(t.shape.data(), t.shape.size() * sizeof(int));
    return fnv1a(t.data.data(), t.data.size() * sizeof(double), h);
}

uint64_t hash_clip(const VideoClip& clip) {
    uint64_t h = fnv1a(&clip.fps, sizeof(clip.fps));
    for (const auto& f : clip.frames) h = fnv1a(f.data.data.data(), f.data.data.size() * sizeof(double), h);
    return h;
}

}  // namespace ccedit
