#pragma once

#include <string>

#include <json.hpp>

#include "ccedit/conditioning.hpp"
#include "ccedit/types.hpp"

namespace ccedit {

// Clip directory layout: frame_0000.ppm ... frame_NNNN.ppm (binary 8-bit
// PPM, [-1,1] mapped to 0..255) plus metadata.json (fps, frame count,
// height, width).
void write_clip(const std::string& dir, const VideoClip& clip);
VideoClip read_clip(const std::string& dir);

void write_ppm(const std::string& path, const PixelFrame& frame);
PixelFrame read_ppm(const std::string& path);

// Structure maps export as binary 8-bit PGM, [0,1] mapped to 0..255.
void write_pgm(const std::string& path, const Tensor& map);
Tensor read_pgm(const std::string& path);
void write_structure_sequence(const std::string& dir, const StructureSequence& seq);

nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

// FNV-1a over a byte view; used for provenance hashes.
uint64_t fnv1a(const void* data, size_t n, uint64_t seed = 1469598103934665603ull);
uint64_t hash_tensor(const Tensor& t);
uint64_t hash_clip(const VideoClip& clip);

}  // namespace ccedit
