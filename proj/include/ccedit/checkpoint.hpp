#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "ccedit/nn.hpp"
#include "ccedit/tensor.hpp"

namespace ccedit {

// Single-file archive of named parameter arrays plus a JSON config record.
// Arrays are stored as little-endian 32-bit floats with shape headers;
// each entry carries its freeze flag. Shared by codec and trident models.
struct Checkpoint {
    struct Entry {
        Tensor tensor;
        bool frozen = false;
    };

    nlohmann::json config;
    std::map<std::string, Entry> arrays;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    static Checkpoint from_store(const nn::ParamStore& store, nlohmann::json config);
    // Creates params in an empty store (or overwrites matching ones) and
    // applies the stored freeze flags.
    void into_store(nn::ParamStore& store) const;
};

}  // namespace ccedit
