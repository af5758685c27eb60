#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace agentforge {

enum class SeedKind { text, code };

std::string to_string(SeedKind kind);
SeedKind seed_kind_from_string(const std::string& text);

struct SeedDocument {
  std::string id;  // content digest of (kind, content)
  SeedKind kind = SeedKind::text;
  std::string content;
  std::string source;  // provenance label; chunked docs carry a "#chunkN" suffix
  std::uint64_t byte_length = 0;
};

SeedDocument make_seed_document(SeedKind kind, std::string content, std::string source);

struct IngestConfig {
  std::uint64_t min_bytes = 200;
  std::uint64_t max_bytes = 64 * 1024;
  // extension (with dot) -> kind; files with unlisted extensions are skipped.
  std::map<std::string, SeedKind> extension_kinds = default_extension_kinds();

  static std::map<std::string, SeedKind> default_extension_kinds();
};

struct CorpusManifest {
  std::vector<SeedDocument> documents;  // canonical order: sorted by id
  std::uint64_t text_count = 0;
  std::uint64_t code_count = 0;
  // Bookkeeping: the seed of the last sampling run over this manifest.
  std::uint64_t sampling_seed = 0;

  std::size_t size() const { return documents.size(); }
  const SeedDocument* find(const std::string& id) const;
};

// Walks the given files/directories, admits documents within the size
// bounds (oversized ones are split on paragraph boundaries into chunks),
// drops duplicate fingerprints and returns the manifest in canonical order.
// Throws UnreadablePath for missing inputs and EmptyCorpus when nothing
// was admitted.
CorpusManifest ingest(const std::vector<std::filesystem::path>& paths,
                      const IngestConfig& config = {});

// Deterministic sampling without replacement: a pure function of
// (manifest order, n, rng_seed).
std::vector<SeedDocument> sample(const CorpusManifest& manifest, std::size_t n,
                                 std::uint64_t rng_seed);

// Manifest file: JSON Lines of document metadata; contents stored next to
// it in a content/ directory, one file per fingerprint.
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& manifest_file);
CorpusManifest load_manifest(const std::filesystem::path& manifest_file);

}  // namespace agentforge
