#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mind/domain.hpp"
#include "support.hpp"

namespace mind {
namespace {

JsonLine row(std::size_t n, json value) { return {n, std::move(value)}; }

json meme_json(const std::string& id, const std::string& split = "test") {
  return {{"id", id}, {"image", id + ".png"}, {"text", "text of " + id}, {"split", split}};
}

TEST(MergeLabel, HarMClassesCollapseToHarmful) {
  EXPECT_EQ(merge_label(RawLabel::VeryHarmful), BinaryLabel::Harmful);
  EXPECT_EQ(merge_label(RawLabel::PartiallyHarmful), BinaryLabel::Harmful);
  EXPECT_EQ(merge_label(RawLabel::Harmful), BinaryLabel::Harmful);
  EXPECT_EQ(merge_label(RawLabel::Harmless), BinaryLabel::Harmless);
}

TEST(MergeLabel, SurjectiveOntoBinary) {
  std::set<BinaryLabel> image;
  for (auto l : {RawLabel::Harmful, RawLabel::Harmless, RawLabel::VeryHarmful, RawLabel::PartiallyHarmful}) {
    image.insert(merge_label(l));
  }
  EXPECT_EQ(image.size(), 2u);
}

TEST(ValidateManifest, DuplicateIdIsNamed) {
  try {
    validate_manifest({row(1, meme_json("m1")), row(2, meme_json("m1"))});
    FAIL() << "expected DuplicateId";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateId);
    EXPECT_NE(e.detail().find("m1"), std::string::npos);
  }
}

TEST(ValidateManifest, EmptyInputIsAnEmptyContainer) {
  const auto m = validate_manifest({});
  EXPECT_TRUE(m.memes.empty());
  EXPECT_THROW(m.require_runnable(), Error);
}

TEST(ValidateManifest, PreservesInputOrder) {
  const auto m = validate_manifest({row(1, meme_json("c")), row(2, meme_json("a", "reference")), row(3, meme_json("b"))});
  ASSERT_EQ(m.memes.size(), 3u);
  EXPECT_EQ(m.memes[0].id, "c");
  EXPECT_EQ(m.memes[1].id, "a");
  EXPECT_EQ(m.memes[1].split, Split::Reference);
  EXPECT_EQ(m.memes[2].id, "b");
}

TEST(ValidateManifest, MissingFieldNamesRowAndField) {
  json j = meme_json("m1");
  j.erase("text");
  try {
    validate_manifest({row(7, j)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingField);
    EXPECT_NE(e.detail().find("row 7"), std::string::npos);
    EXPECT_NE(e.detail().find("text"), std::string::npos);
  }
}

TEST(ValidateManifest, EmptyTextIsAllowed) {
  json j = meme_json("m1");
  j["text"] = "";
  EXPECT_EQ(validate_manifest({row(1, j)}).memes[0].text, "");
}

TEST(ValidateManifest, BadSplitNamesRowAndValue) {
  json j = meme_json("m1", "train");
  try {
    validate_manifest({row(3, j)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadSplit);
    EXPECT_NE(e.detail().find("row 3"), std::string::npos);
    EXPECT_NE(e.detail().find("train"), std::string::npos);
  }
}

TEST(ValidateManifest, LabelsParseAllFourSpellings) {
  std::vector<JsonLine> rows;
  const char* labels[] = {"harmful", "harmless", "very harmful", "partially harmful"};
  for (int i = 0; i < 4; ++i) {
    json j = meme_json("m" + std::to_string(i));
    j["label"] = labels[i];
    rows.push_back(row(i + 1, j));
  }
  const auto m = validate_manifest(rows);
  EXPECT_EQ(m.memes[2].label, RawLabel::VeryHarmful);
  EXPECT_EQ(m.memes[3].label, RawLabel::PartiallyHarmful);

  json bad = meme_json("x");
  bad["label"] = "offensive";
  EXPECT_THROW(validate_manifest({row(1, bad)}), Error);
}

TEST(ValidateManifest, IdempotentOverRandomManifests) {
  std::mt19937_64 rng(11);
  const char* labels[] = {"harmful", "harmless", "very harmful", "partially harmful"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<JsonLine> rows;
    const auto n = rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      json j = meme_json("id" + std::to_string(rng() % 1000) + "_" + std::to_string(i), rng() % 2 ? "test" : "reference");
      if (rng() % 3) j["label"] = labels[rng() % 4];
      rows.push_back(row(i + 1, j));
    }
    const auto once = validate_manifest(rows);
    const auto twice = validate_manifest(to_rows(once));
    EXPECT_EQ(once, twice);
  }
}

TEST(LoadManifest, ReadsJsonlFile) {
  testing::TempDir dir;
  write_text_file(dir / "m.jsonl",
                  R"({"id":"a","image":"a.png","text":"hello","label":"very harmful","split":"reference"})"
                  "\n\n"
                  R"({"id":"b","image":"b.png","text":"","split":"test"})"
                  "\n");
  const auto m = load_manifest(dir / "m.jsonl");
  ASSERT_EQ(m.memes.size(), 2u);
  EXPECT_EQ(m.memes[0].label, RawLabel::VeryHarmful);
  EXPECT_FALSE(m.memes[1].label.has_value());
  EXPECT_NO_THROW(m.require_runnable());
}

TEST(LoadManifest, RelativeImagesResolveAgainstManifestDir) {
  testing::TempDir dir;
  write_text_file(dir / "sub" / "m.jsonl",
                  R"({"id":"a","image":"img/a.png","text":"x","split":"test"})"
                  "\n"
                  R"({"id":"b","image":"https://host/b.png","text":"x","split":"test"})"
                  "\n"
                  R"({"id":"c","image":"/abs/c.png","text":"x","split":"test"})"
                  "\n");
  const auto m = load_manifest(dir / "sub" / "m.jsonl");
  EXPECT_EQ(m.memes[0].image_ref, (dir / "sub" / "img/a.png").string());
  EXPECT_EQ(m.memes[1].image_ref, "https://host/b.png");
  EXPECT_EQ(m.memes[2].image_ref, "/abs/c.png");
}

TEST(LoadManifest, ParseErrorCarriesLineNumber) {
  testing::TempDir dir;
  write_text_file(dir / "m.jsonl", R"({"id":"a","image":"a.png","text":"x","split":"test"})"
                                   "\n{not json\n");
  try {
    load_manifest(dir / "m.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(e.detail().find(":2:"), std::string::npos);
  }
}

}  // namespace
}  // namespace mind
