#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lyricalign/error.hpp"

namespace lyricalign::text {

enum class Language { kr, en };

Language parse_language(std::string_view name);
std::string_view language_name(Language language);

/// Ordered vowel-class labels (IPA, UTF-8). 7 classes for Korean, 15 for English.
class VowelClassTable {
 public:
  static const VowelClassTable& korean();
  static const VowelClassTable& english();
  static const VowelClassTable& for_language(Language language);

  Language language() const { return language_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;

 private:
  VowelClassTable(Language language, std::vector<std::string> classes);
  Language language_;
  std::vector<std::string> classes_;
};

enum class UnitKind { syllable, word };

std::string_view unit_kind_name(UnitKind kind);
UnitKind parse_unit_kind(std::string_view name);

struct UnitRecord {
  UnitKind kind = UnitKind::syllable;
  std::string source_text;
  std::size_t word_index = 0;
  std::size_t syllable_index = 0;  // position within the word
  std::size_t line_index = 0;
};

/// Vowel labels in lyric order with one unit record per label.
struct VowelSequence {
  std::vector<std::string> labels;
  std::vector<UnitRecord> units;
  std::vector<std::string> words;  // source words, indexed by UnitRecord::word_index
  std::vector<std::size_t> word_lines;
  std::vector<std::string> skipped_words;  // out-of-vocabulary words that were dropped
};

/// Logical M x L matrix with exactly one 1 per row.
struct VowelSequenceMatrix {
  Eigen::MatrixXd a;
  std::vector<std::size_t> class_index;  // column of the 1 in each row
  std::vector<UnitRecord> units;
};

/// Decodes UTF-8; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(char32_t cp);

/// Medial (jungseong) index 0..20 of a precomposed hangul syllable, or -1.
int hangul_medial_index(char32_t cp);

/// Korean class label for a medial index (fixed 21 -> 7 folding).
std::string_view medial_class(int medial_index);

/// One syllable unit per hangul block; non-hangul code points are skipped.
/// Throws Error(empty_vowels) when the text holds no hangul syllable.
VowelSequence decompose_hangul(std::string_view text);

/// CMU-format pronouncing dictionary: WORD -> alternate phone sequences in file order.
class PronouncingDictionary {
 public:
  void add(std::string word, std::vector<std::string> phones);
  const std::vector<std::vector<std::string>>* lookup(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> entries_;
};

PronouncingDictionary parse_cmudict(std::istream& in);
PronouncingDictionary load_cmudict(const std::filesystem::path& path);

class OutOfVocabulary : public Error {
 public:
  explicit OutOfVocabulary(std::string word)
      : Error(ErrorKind::invalid_input, "out-of-vocabulary word: " + word), word_(std::move(word)) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

/// English class label of one ARPAbet phone, or empty for consonants.
std::string_view arpabet_class(std::string_view phone);

/// Vowel classes of a word's first pronunciation. Case-insensitive; throws
/// OutOfVocabulary when the word is missing.
std::vector<std::string> word_to_vowels(std::string_view word, const PronouncingDictionary& dict);

enum class OovPolicy { skip, fail };

/// Splits lyrics on whitespace, strips punctuation and emits one syllable unit
/// per vowel. Skipped OOV words are listed in `skipped_words`.
VowelSequence english_vowels(std::string_view text, const PronouncingDictionary& dict,
                             OovPolicy policy = OovPolicy::skip);

VowelSequenceMatrix build_matrix(const VowelSequence& sequence, const VowelClassTable& table);

/// L': number of columns holding at least one 1.
std::size_t distinct_classes(const VowelSequenceMatrix& a);

}  // namespace lyricalign::text
