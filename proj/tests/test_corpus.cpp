#include "agentforge/corpus.hpp"

#include "agentforge/error.hpp"

#include <doctest.h>

#include "support/helpers.hpp"

#include <algorithm>
#include <set>

using namespace agentforge;

namespace {

std::string filler(std::size_t bytes, char c = 'x') { return std::string(bytes, c); }

}  // namespace

TEST_CASE("byte-identical files are fingerprint-deduplicated") {
  test::TempDir dir;
  test::write_file(dir.path() / "a.txt", filler(300));
  test::write_file(dir.path() / "b.txt", filler(300));
  const auto manifest = ingest({dir.path()});
  CHECK(manifest.size() == 1);
  CHECK(manifest.text_count == 1);
}

TEST_CASE("a file below min_bytes leaves the corpus empty") {
  test::TempDir dir;
  test::write_file(dir.path() / "tiny.txt", "too small");
  CHECK_THROWS_AS(ingest({dir.path()}), EmptyCorpus);
}

TEST_CASE("kind counts follow the extension table") {
  test::TempDir dir;
  for (int i = 0; i < 10; ++i) {
    test::write_file(dir.path() / ("t" + std::to_string(i) + ".txt"),
                     "text document number " + std::to_string(i) + " " + filler(300));
  }
  for (int i = 0; i < 5; ++i) {
    test::write_file(dir.path() / ("c" + std::to_string(i) + ".py"),
                     "# code file " + std::to_string(i) + "\n" + filler(300, '#'));
  }
  test::write_file(dir.path() / "ignored.bin", filler(400));
  const auto manifest = ingest({dir.path()});
  CHECK(manifest.text_count == 10);
  CHECK(manifest.code_count == 5);
  CHECK(manifest.size() == 15);
}

TEST_CASE("missing path raises UnreadablePath") {
  CHECK_THROWS_AS(ingest({std::filesystem::path("/nonexistent/agentforge")}), UnreadablePath);
}

TEST_CASE("ingest config sanity") {
  IngestConfig config;
  config.min_bytes = 10;
  config.max_bytes = 5;
  test::TempDir dir;
  test::write_file(dir.path() / "a.txt", filler(300));
  CHECK_THROWS_AS(ingest({dir.path()}, config), ConfigError);
}

TEST_CASE("oversized documents chunk on paragraph boundaries") {
  test::TempDir dir;
  IngestConfig config;
  config.min_bytes = 10;
  config.max_bytes = 100;
  std::string content;
  for (int i = 0; i < 8; ++i) {
    content += "Paragraph " + std::to_string(i) + " " + filler(40, 'p') + "\n\n";
  }
  test::write_file(dir.path() / "big.txt", content);
  const auto manifest = ingest({dir.path()}, config);
  CHECK(manifest.size() > 1);
  for (const auto& doc : manifest.documents) {
    CHECK(doc.byte_length <= 100);
    CHECK(doc.source.find("#chunk") != std::string::npos);
  }
}

TEST_CASE("document ids are digests of kind and content") {
  const auto a = make_seed_document(SeedKind::text, "same content", "src1");
  const auto b = make_seed_document(SeedKind::text, "same content", "src2");
  const auto c = make_seed_document(SeedKind::code, "same content", "src1");
  CHECK(a.id == b.id);       // source does not enter the fingerprint
  CHECK(a.id != c.id);       // kind does
  CHECK(a.byte_length == 12);
}

TEST_CASE("re-ingesting the same tree is fingerprint-stable") {
  test::TempDir dir;
  for (int i = 0; i < 6; ++i) {
    test::write_file(dir.path() / ("f" + std::to_string(i) + ".txt"),
                     "stable content " + std::to_string(i) + filler(250));
  }
  const auto first = ingest({dir.path()});
  const auto second = ingest({dir.path()});
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first.documents[i].id == second.documents[i].id);
  }
  CHECK(std::is_sorted(first.documents.begin(), first.documents.end(),
                       [](const SeedDocument& a, const SeedDocument& b) { return a.id < b.id; }));
}

TEST_CASE("sampling draws n distinct documents deterministically") {
  test::TempDir dir;
  for (int i = 0; i < 20; ++i) {
    test::write_file(dir.path() / ("f" + std::to_string(i) + ".txt"),
                     "document " + std::to_string(i) + filler(250));
  }
  const auto manifest = ingest({dir.path()});

  SUBCASE("n equal to manifest size returns everything") {
    const auto all = sample(manifest, manifest.size(), 1);
    std::set<std::string> ids;
    for (const auto& doc : all) ids.insert(doc.id);
    CHECK(ids.size() == manifest.size());
  }

  SUBCASE("same seed, same selection; no id repeats") {
    const auto first = sample(manifest, 10, 7);
    const auto second = sample(manifest, 10, 7);
    REQUIRE(first.size() == 10);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(first[i].id == second[i].id);
      ids.insert(first[i].id);
    }
    CHECK(ids.size() == 10);
  }

  SUBCASE("different seeds differ somewhere") {
    const auto first = sample(manifest, 10, 7);
    const auto second = sample(manifest, 10, 8);
    bool any_difference = false;
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (first[i].id != second[i].id) any_difference = true;
    }
    CHECK(any_difference);
  }

  SUBCASE("oversampling raises InsufficientCorpus") {
    CHECK_THROWS_AS(sample(manifest, manifest.size() + 1, 1), InsufficientCorpus);
  }
}

TEST_CASE("manifest save/load round-trips documents and contents") {
  test::TempDir dir;
  test::TempDir out;
  for (int i = 0; i < 4; ++i) {
    test::write_file(dir.path() / ("f" + std::to_string(i) + ".txt"),
                     "roundtrip " + std::to_string(i) + filler(250));
  }
  auto manifest = ingest({dir.path()});
  manifest.sampling_seed = 4242;
  const auto manifest_file = out.path() / "manifest.jsonl";
  save_manifest(manifest, manifest_file);
  const auto loaded = load_manifest(manifest_file);
  REQUIRE(loaded.size() == manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    CHECK(loaded.documents[i].id == manifest.documents[i].id);
    CHECK(loaded.documents[i].content == manifest.documents[i].content);
    CHECK(loaded.documents[i].source == manifest.documents[i].source);
  }
  CHECK(loaded.text_count == manifest.text_count);
  CHECK(loaded.sampling_seed == 4242);
}
