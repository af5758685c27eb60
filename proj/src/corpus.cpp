#include "agentforge/corpus.hpp"

#include "agentforge/error.hpp"
#include "agentforge/hash.hpp"
#include "agentforge/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace agentforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(SeedKind kind) {
  return kind == SeedKind::text ? "text" : "code";
}

SeedKind seed_kind_from_string(const std::string& text) {
  if (text == "text") return SeedKind::text;
  if (text == "code") return SeedKind::code;
  throw ConfigError("unknown seed kind: " + text);
}

SeedDocument make_seed_document(SeedKind kind, std::string content, std::string source) {
  SeedDocument doc;
  doc.kind = kind;
  doc.id = content_digest({to_string(kind), content});
  doc.byte_length = content.size();
  doc.content = std::move(content);
  doc.source = std::move(source);
  return doc;
}

std::map<std::string, SeedKind> IngestConfig::default_extension_kinds() {
  return {
      {".txt", SeedKind::text}, {".md", SeedKind::text},   {".rst", SeedKind::text},
      {".tex", SeedKind::text}, {".html", SeedKind::text}, {".py", SeedKind::code},
      {".c", SeedKind::code},   {".h", SeedKind::code},    {".cpp", SeedKind::code},
      {".hpp", SeedKind::code}, {".cc", SeedKind::code},   {".js", SeedKind::code},
      {".ts", SeedKind::code},  {".java", SeedKind::code}, {".go", SeedKind::code},
      {".rs", SeedKind::code},  {".rb", SeedKind::code},   {".sh", SeedKind::code},
  };
}

const SeedDocument* CorpusManifest::find(const std::string& id) const {
  auto it = std::lower_bound(
      documents.begin(), documents.end(), id,
      [](const SeedDocument& doc, const std::string& key) { return doc.id < key; });
  if (it == documents.end() || it->id != id) return nullptr;
  return &*it;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw UnreadablePath("cannot read file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Splits on blank-line paragraph boundaries into pieces of at most
// max_bytes. A single paragraph larger than max_bytes is hard-split.
std::vector<std::string> chunk_content(const std::string& content, std::uint64_t max_bytes) {
  std::vector<std::string> paragraphs;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t boundary = content.find("\n\n", start);
    if (boundary == std::string::npos) {
      paragraphs.push_back(content.substr(start));
      break;
    }
    paragraphs.push_back(content.substr(start, boundary + 2 - start));
    start = boundary + 2;
  }

  std::vector<std::string> chunks;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      chunks.push_back(std::move(current));
      current.clear();
    }
  };
  for (auto& paragraph : paragraphs) {
    while (paragraph.size() > max_bytes) {
      flush();
      chunks.push_back(paragraph.substr(0, max_bytes));
      paragraph = paragraph.substr(max_bytes);
    }
    if (current.size() + paragraph.size() > max_bytes) flush();
    current += paragraph;
  }
  flush();
  return chunks;
}

void collect_files(const fs::path& path, std::vector<fs::path>& files) {
  if (!fs::exists(path)) {
    throw UnreadablePath("path does not exist: " + path.string());
  }
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
  } else {
    files.push_back(path);
  }
}

}  // namespace

CorpusManifest ingest(const std::vector<fs::path>& paths, const IngestConfig& config) {
  if (config.min_bytes > config.max_bytes) {
    throw ConfigError("ingest config: min_bytes exceeds max_bytes");
  }
  std::vector<fs::path> files;
  for (const auto& path : paths) {
    collect_files(path, files);
  }
  std::sort(files.begin(), files.end());

  CorpusManifest manifest;
  std::set<std::string> seen;
  for (const auto& file : files) {
    auto ext = file.extension().string();
    auto kind_it = config.extension_kinds.find(ext);
    if (kind_it == config.extension_kinds.end()) continue;
    const SeedKind kind = kind_it->second;

    std::string content = read_file(file);
    std::vector<std::string> pieces;
    if (content.size() > config.max_bytes) {
      pieces = chunk_content(content, config.max_bytes);
    } else {
      pieces.push_back(std::move(content));
    }

    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (pieces[i].size() < config.min_bytes || pieces[i].size() > config.max_bytes) continue;
      std::string source = file.string();
      if (pieces.size() > 1) source += "#chunk" + std::to_string(i);
      SeedDocument doc = make_seed_document(kind, std::move(pieces[i]), std::move(source));
      if (!seen.insert(doc.id).second) continue;
      if (doc.kind == SeedKind::text) {
        ++manifest.text_count;
      } else {
        ++manifest.code_count;
      }
      manifest.documents.push_back(std::move(doc));
    }
  }

  if (manifest.documents.empty()) {
    throw EmptyCorpus("no documents admitted from " + std::to_string(files.size()) + " files");
  }
  std::sort(manifest.documents.begin(), manifest.documents.end(),
            [](const SeedDocument& a, const SeedDocument& b) { return a.id < b.id; });
  return manifest;
}

std::vector<SeedDocument> sample(const CorpusManifest& manifest, std::size_t n,
                                 std::uint64_t rng_seed) {
  if (n > manifest.size()) {
    throw InsufficientCorpus("requested " + std::to_string(n) + " seeds from a manifest of " +
                             std::to_string(manifest.size()));
  }
  std::vector<std::size_t> indices(manifest.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  RandomStream rng = RandomStream(rng_seed).child("corpus.sample");
  // Partial Fisher-Yates: position i receives a uniform pick from [i, end).
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + rng.uniform_index(indices.size() - i);
    std::swap(indices[i], indices[j]);
  }
  std::vector<SeedDocument> selection;
  selection.reserve(n);
  for (std::size_t i = 0; i < n; ++i) selection.push_back(manifest.documents[indices[i]]);
  return selection;
}

void save_manifest(const CorpusManifest& manifest, const fs::path& manifest_file) {
  const fs::path content_dir = manifest_file.parent_path() / "content";
  fs::create_directories(content_dir);
  std::ofstream out(manifest_file, std::ios::trunc);
  if (!out) {
    throw UnreadablePath("cannot write manifest: " + manifest_file.string());
  }
  out << json{{"manifest_header", true}, {"sampling_seed", manifest.sampling_seed}}.dump()
      << "\n";
  for (const auto& doc : manifest.documents) {
    json line = {{"id", doc.id},
                 {"kind", to_string(doc.kind)},
                 {"source", doc.source},
                 {"byte_length", doc.byte_length}};
    out << line.dump() << "\n";
    std::ofstream content_out(content_dir / doc.id, std::ios::binary | std::ios::trunc);
    content_out << doc.content;
  }
}

CorpusManifest load_manifest(const fs::path& manifest_file) {
  std::ifstream in(manifest_file);
  if (!in) {
    throw UnreadablePath("cannot read manifest: " + manifest_file.string());
  }
  const fs::path content_dir = manifest_file.parent_path() / "content";
  CorpusManifest manifest;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json obj = json::parse(line);
    if (obj.value("manifest_header", false)) {
      manifest.sampling_seed = obj.value("sampling_seed", std::uint64_t{0});
      continue;
    }
    SeedDocument doc;
    doc.id = obj.at("id").get<std::string>();
    doc.kind = seed_kind_from_string(obj.at("kind").get<std::string>());
    doc.source = obj.at("source").get<std::string>();
    doc.byte_length = obj.at("byte_length").get<std::uint64_t>();
    doc.content = read_file(content_dir / doc.id);
    if (doc.content.size() != doc.byte_length) {
      throw ConfigError("content length mismatch for seed " + doc.id);
    }
    if (doc.kind == SeedKind::text) {
      ++manifest.text_count;
    } else {
      ++manifest.code_count;
    }
    manifest.documents.push_back(std::move(doc));
  }
  std::sort(manifest.documents.begin(), manifest.documents.end(),
            [](const SeedDocument& a, const SeedDocument& b) { return a.id < b.id; });
  return manifest;
}

}  // namespace agentforge
