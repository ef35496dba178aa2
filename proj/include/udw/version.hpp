#pragma once

namespace udw {

// Tool version; participates in the result-cache content hash so stale
// payloads from older numerics never satisfy a lookup.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace udw
