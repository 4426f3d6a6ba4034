#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace distill {

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Streaming digest of a file's bytes; nullopt when unreadable.
std::optional<std::string> file_digest_hex(const std::string& path);

std::string iso8601_utc_now();

// Audit record written next to every primary output. Identical inputs
// and effective configuration yield identical digests; only the
// timestamps vary between runs.
struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    std::string config_hash;
    std::string input_digest;
    std::string started_at;
    std::string finished_at;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();

    nlohmann::ordered_json to_json() const;
};

} // namespace distill
