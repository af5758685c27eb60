#include "agentforge/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace agentforge {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

std::string sha256_hex_truncated(const unsigned char* data, std::size_t len) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int digest_len = 0;
  if (EVP_Digest(data, len, digest.data(), &digest_len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(32);
  for (unsigned int i = 0; i < 16 && i < digest_len; ++i) {
    hex.push_back(kHexDigits[digest[i] >> 4]);
    hex.push_back(kHexDigits[digest[i] & 0xf]);
  }
  return hex;
}

}  // namespace

std::string content_digest(std::string_view data) {
  return sha256_hex_truncated(reinterpret_cast<const unsigned char*>(data.data()), data.size());
}

std::string content_digest(std::initializer_list<std::string_view> fields) {
  std::string framed;
  for (const auto& field : fields) {
    framed += std::to_string(field.size());
    framed.push_back(':');
    framed.append(field);
  }
  return content_digest(framed);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace agentforge
