#pragma once

#include <cstdint>
#include <string>

namespace mipred::artifact {

// Reproducibility stamp carried by every artifact file the CLI writes.
struct Stamp {
    int format_version = 1;
    std::uint64_t seed = 0;
    std::string config_hash;  // hex fnv1a64 of the effective config
};

std::string hex64(std::uint64_t value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace mipred::artifact
