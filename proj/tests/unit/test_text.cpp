#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "lyricalign/error.hpp"
#include "lyricalign/text.hpp"

namespace lyricalign {
namespace {

using text::VowelClassTable;

const std::string kDict = std::string(LYRICALIGN_TEST_DATA) + "/cmudict_sample.txt";

std::vector<std::string> labels_of(std::string_view s) { return text::decompose_hangul(s).labels; }

TEST(ClassTable, SizesAndUniqueness) {
  EXPECT_EQ(VowelClassTable::korean().size(), 7u);
  EXPECT_EQ(VowelClassTable::english().size(), 15u);
  for (const auto* t : {&VowelClassTable::korean(), &VowelClassTable::english()}) {
    std::set<std::string> unique(t->classes().begin(), t->classes().end());
    EXPECT_EQ(unique.size(), t->size());
  }
  EXPECT_EQ(VowelClassTable::korean().index_of("ɯ"), 6u);
  EXPECT_FALSE(VowelClassTable::korean().index_of("ə").has_value());
}

TEST(Utf8, DecodesAndEncodes) {
  const auto u = text::decode_utf8("a가\xF0\x9F\x8E\xB5");
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u[1], U'가');
  EXPECT_EQ(u[2], U'\U0001F3B5');
  EXPECT_EQ(text::encode_utf8(U'힣'), "\xED\x9E\xA3");
  EXPECT_EQ(text::encode_utf8(U'ʌ'), "ʌ");
}

TEST(Utf8, MalformedBytesBecomeReplacement) {
  const auto u = text::decode_utf8("a\xC3");  // truncated two-byte sequence
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u[1], U'�');
  const auto v = text::decode_utf8("\x80z");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], U'�');
  EXPECT_EQ(v[1], U'z');
}

TEST(Hangul, MedialArithmetic) {
  EXPECT_EQ(text::hangul_medial_index(U'가'), 0);   // 가
  EXPECT_EQ(text::hangul_medial_index(U'한'), 0);   // 한
  EXPECT_EQ(text::hangul_medial_index(U'리'), 20);  // 리
  EXPECT_EQ(text::hangul_medial_index(U'힣'), 20);  // 힣
  EXPECT_EQ(text::hangul_medial_index(U'A'), -1);
  EXPECT_EQ(text::hangul_medial_index(U'꯿'), -1);
  EXPECT_EQ(text::hangul_medial_index(U'힤'), -1);
}

TEST(Hangul, MedialFolding) {
  // ㅏㅐㅑㅒㅓㅔㅕㅖㅗㅘㅙㅚㅛㅜㅝㅞㅟㅠㅡㅢㅣ
  const std::vector<std::string> expect{"a", "e", "a", "e", "ʌ", "e", "ʌ", "e", "o", "a", "e",
                                        "e", "o", "u", "ʌ", "e", "i", "u", "ɯ", "i", "i"};
  for (int m = 0; m < 21; ++m) EXPECT_EQ(text::medial_class(m), expect[static_cast<std::size_t>(m)]) << m;
}

TEST(Hangul, TableExamples) {
  EXPECT_EQ(labels_of("가"), (std::vector<std::string>{"a"}));
  EXPECT_EQ(labels_of("한"), (std::vector<std::string>{"a"}));
  EXPECT_EQ(labels_of("그리고"), (std::vector<std::string>{"ɯ", "i", "o"}));
  EXPECT_EQ(labels_of("아 에 이 오 우 어 으"), (std::vector<std::string>{"a", "e", "i", "o", "u", "ʌ", "ɯ"}));
}

TEST(Hangul, UnitsCarryWordsAndLines) {
  const auto seq = text::decompose_hangul("사랑해 너를\n그리고!");
  ASSERT_EQ(seq.labels.size(), 8u);
  EXPECT_EQ(seq.units[2].source_text, "해");
  EXPECT_EQ(seq.units[2].word_index, 0u);
  EXPECT_EQ(seq.units[2].syllable_index, 2u);
  EXPECT_EQ(seq.units[3].word_index, 1u);
  EXPECT_EQ(seq.units[5].line_index, 1u);
  EXPECT_EQ(seq.units[5].syllable_index, 0u);
  EXPECT_EQ(seq.words.size(), 3u);
}

TEST(Hangul, IndependentOfSurroundingText) {
  EXPECT_EQ(labels_of("사랑"), labels_of("(la) 사~랑 ♪ x1"));
}

TEST(Hangul, NoSyllablesIsEmptyVowels) {
  try {
    text::decompose_hangul("la la la ㅏ");  // compatibility jamo is not a syllable block
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_vowels);
  }
}

TEST(Cmudict, ParsesAlternatesAndComments) {
  std::istringstream in(";;; comment\nHELLO  HH AH0 L OW1\nREAD  R EH1 D\nREAD(1)  R IY1 D\n\nhello(2)  HH AH1 L OW1\n");
  const auto d = text::parse_cmudict(in);
  EXPECT_EQ(d.size(), 2u);
  const auto* hello = d.lookup("hello");
  ASSERT_NE(hello, nullptr);
  ASSERT_EQ(hello->size(), 2u);
  EXPECT_EQ(hello->front(), (std::vector<std::string>{"HH", "AH0", "L", "OW1"}));
  const auto* read = d.lookup("READ");
  ASSERT_EQ(read->size(), 2u);
  EXPECT_EQ((*read)[1], (std::vector<std::string>{"R", "IY1", "D"}));
}

TEST(Cmudict, LoadErrors) {
  EXPECT_THROW(text::load_cmudict("/nonexistent/dict.txt"), Error);
  std::istringstream empty(";;; nothing\n");
  EXPECT_EQ(text::parse_cmudict(empty).size(), 0u);
}

TEST(Arpabet, StressDecidesSchwa) {
  EXPECT_EQ(text::arpabet_class("AH0"), "ə");
  EXPECT_EQ(text::arpabet_class("AH1"), "ʌ");
  EXPECT_EQ(text::arpabet_class("AH2"), "ʌ");
  EXPECT_EQ(text::arpabet_class("ER1"), "ə");
  EXPECT_EQ(text::arpabet_class("OY2"), "ɔɪ");
  EXPECT_TRUE(text::arpabet_class("HH").empty());
  EXPECT_TRUE(text::arpabet_class("NG").empty());
}

TEST(Arpabet, TableExampleWords) {
  const auto dict = text::load_cmudict(kDict);
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"off", {"ɔ"}},   {"far", {"ɑ"}},    {"she", {"i"}},     {"you", {"u"}},   {"red", {"ɛ"}},
      {"pig", {"ɪ"}},   {"should", {"ʊ"}}, {"but", {"ʌ"}},     {"sofa", {"oʊ", "ə"}},
      {"at", {"æ"}},    {"day", {"eɪ"}},   {"my", {"aɪ"}},     {"low", {"oʊ"}},  {"now", {"aʊ"}},
      {"boy", {"ɔɪ"}},  {"hello", {"ə", "oʊ"}}};
  for (const auto& [word, expect] : cases) EXPECT_EQ(text::word_to_vowels(word, dict), expect) << word;
}

TEST(Arpabet, CaseInsensitiveAndOov) {
  const auto dict = text::load_cmudict(kDict);
  EXPECT_EQ(text::word_to_vowels("Boy", dict), text::word_to_vowels("BOY", dict));
  try {
    text::word_to_vowels("zyzzyva", dict);
    FAIL();
  } catch (const text::OutOfVocabulary& e) {
    EXPECT_EQ(e.word(), "zyzzyva");
  }
}

TEST(English, SequenceSkipsOovAndStripsPunctuation) {
  const auto dict = text::load_cmudict(kDict);
  const auto seq = text::english_vowels("Hello, world!\nShe's \"my\" boy zyzzyva", dict);
  EXPECT_EQ(seq.labels, (std::vector<std::string>{"ə", "oʊ", "ə", "aɪ", "ɔɪ"}));
  EXPECT_EQ(seq.skipped_words, (std::vector<std::string>{"She's", "zyzzyva"}));
  EXPECT_EQ(seq.words, (std::vector<std::string>{"Hello", "world", "my", "boy"}));
  EXPECT_EQ(seq.units[1].word_index, 0u);
  EXPECT_EQ(seq.units[1].syllable_index, 1u);
  EXPECT_EQ(seq.units[3].line_index, 1u);
  EXPECT_THROW(text::english_vowels("zyzzyva", dict, text::OovPolicy::fail), text::OutOfVocabulary);
  try {
    text::english_vowels("zyzzyva", dict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_vowels);
  }
}

TEST(Matrix, OneHotRowsAndDistinctCount) {
  text::VowelSequence seq;
  seq.labels = {"a", "i", "a", "o"};
  seq.units.resize(4);
  const auto a = text::build_matrix(seq, VowelClassTable::korean());
  EXPECT_EQ(a.a.rows(), 4);
  EXPECT_EQ(a.a.cols(), 7);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(a.a.row(r).sum(), 1.0);
  EXPECT_EQ(a.a.row(0), a.a.row(2));
  EXPECT_EQ(text::distinct_classes(a), 3u);
  EXPECT_EQ(a.class_index, (std::vector<std::size_t>{0, 2, 0, 3}));

  seq.labels = {"a", "a", "a"};
  seq.units.resize(3);
  EXPECT_EQ(text::distinct_classes(text::build_matrix(seq, VowelClassTable::korean())), 1u);
  EXPECT_EQ(text::build_matrix(seq, VowelClassTable::korean()).a.cols(), 7);

  seq.labels = {"ə"};
  EXPECT_THROW(text::build_matrix(seq, VowelClassTable::korean()), Error);
  EXPECT_EQ(text::build_matrix(seq, VowelClassTable::english()).a.cols(), 15);
  seq.labels.clear();
  EXPECT_THROW(text::build_matrix(seq, VowelClassTable::korean()), Error);
}

TEST(Matrix, AllKoreanClasses) {
  const auto seq = text::decompose_hangul("아에이오우어으");
  EXPECT_EQ(text::distinct_classes(text::build_matrix(seq, VowelClassTable::korean())), 7u);
}

TEST(Language, Parse) {
  EXPECT_EQ(text::parse_language("kr"), text::Language::kr);
  EXPECT_EQ(text::parse_language("en"), text::Language::en);
  EXPECT_THROW(text::parse_language("fr"), Error);
}

}  // namespace
}  // namespace lyricalign
