#pragma once

// Result cache: payloads are keyed by the FNV-1a hash of the tool version
// plus a canonical request string, so any change to either invalidates the
// entry.  The payload file holds exactly the bytes the command would write;
// the store timestamp lives in a sidecar to keep payload bytes reproducible.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>

#include "udw/io.hpp"
#include "udw/numeric.hpp"
#include "udw/version.hpp"

namespace udw {

[[nodiscard]] inline std::string cache_key(const std::string& request) {
    const std::uint64_t h = fnv1a64(std::string(kVersion) + '\n' + request);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

[[nodiscard]] inline std::optional<std::string> cache_lookup(
    const std::filesystem::path& root, const std::string& request) {
    const auto path = root / (cache_key(request) + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || ec) return std::nullopt;
    try {
        return read_text_file(path);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline void cache_store(const std::filesystem::path& root, const std::string& request,
                        const std::string& payload) {
    const std::string key = cache_key(request);
    try {
        write_text_file(root / (key + ".json"), payload);
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        write_text_file(root / (key + ".meta"),
                        std::string(stamp) + "\n" + request + "\n");
    } catch (const std::exception&) {
        // cache is best-effort; failure to store must never fail the command
    }
}

}  // namespace udw
