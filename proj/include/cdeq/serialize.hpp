#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace cdeq {

using json = nlohmann::json;

std::uint64_t fnv1a64(const void* bytes, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull);

// Container layout: magic "CDEQBIN1" | u64 manifest length | manifest JSON |
// float64 LE blocks in manifest["blocks"] order | u64 FNV-1a of everything
// before the checksum. A corrupted or truncated file fails before any payload
// is handed back.
struct Container {
    json manifest;
    std::map<std::string, std::vector<double>> blocks;
};

void write_container(const std::string& path, const json& manifest,
                     const std::vector<std::pair<std::string, const std::vector<double>*>>& blocks);
Container read_container(const std::string& path);

}  // namespace cdeq
