#include <filesystem>

#include <gtest/gtest.h>

#include "lyricalign/error.hpp"
#include "lyricalign/io.hpp"

namespace lyricalign {
namespace {

metrics::AnnotationSet sample() {
  metrics::AnnotationSet s;
  s.song_id = "demo";
  s.units.push_back({text::UnitKind::syllable, "사", 1.0, 1.4, 0, "a"});
  s.units.push_back({text::UnitKind::syllable, "랑", 1.5, 1.9, 0, "a"});
  s.units.push_back({text::UnitKind::syllable, "해", 62.346, 63.0, 1, ""});
  return s;
}

TEST(Annotations, JsonRoundTrip) {
  const auto s = sample();
  const auto back = io::annotations_from_json(io::to_json(s));
  EXPECT_EQ(back.song_id, "demo");
  ASSERT_EQ(back.units.size(), 3u);
  EXPECT_EQ(back.units[1].text, "랑");
  EXPECT_DOUBLE_EQ(back.units[2].onset_s, 62.346);
  EXPECT_EQ(back.units[2].line_index, 1u);
  EXPECT_EQ(back.units[0].vowel, "a");
  EXPECT_TRUE(back.units[2].vowel.empty());
  EXPECT_FALSE(io::to_json(s)["units"][2].contains("vowel"));
}

TEST(Annotations, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "lyricalign_annotations.json";
  io::write_annotations(path, sample());
  const auto back = io::read_annotations(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.units.size(), 3u);
}

TEST(Annotations, RejectsBadInput) {
  EXPECT_THROW(io::annotations_from_json(nlohmann::json::parse(R"({"units": [{"text": "a"}]})")), Error);
  EXPECT_THROW(io::annotations_from_json(nlohmann::json::parse(
                   R"({"units": [{"kind": "syllable", "text": "a", "onset_s": 2, "offset_s": 1}]})")),
               Error);
  EXPECT_THROW(io::read_annotations("/nonexistent.json"), Error);
}

TEST(Lrc, Timestamps) {
  EXPECT_EQ(io::lrc_timestamp(0.0), "00:00.00");
  EXPECT_EQ(io::lrc_timestamp(62.346), "01:02.35");
  EXPECT_EQ(io::lrc_timestamp(59.996), "01:00.00");
}

TEST(Lrc, GroupsUnitsByLine) {
  const auto lrc = io::to_lrc(sample());
  EXPECT_EQ(lrc, "[00:01.00] <00:01.00>사 <00:01.50>랑\n[01:02.35] <01:02.35>해\n");
}

}  // namespace
}  // namespace lyricalign
