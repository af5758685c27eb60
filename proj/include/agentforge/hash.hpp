#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agentforge {

// Hex SHA-256 digest, truncated to 32 hex chars (128 bits). Used for
// seed fingerprints and record ids; truncation keeps ids readable while
// leaving collision probability negligible at dataset scale.
std::string content_digest(std::string_view data);

// Digest of several fields with an unambiguous length-prefixed framing,
// so ("ab","c") and ("a","bc") never collide.
std::string content_digest(std::initializer_list<std::string_view> fields);

// FNV-1a 64-bit. Cheap stable hash for shingles and rng stream keys.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace agentforge
