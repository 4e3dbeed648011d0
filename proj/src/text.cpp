#include "lyricalign/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace lyricalign::text {

namespace {

constexpr char32_t kHangulFirst = 0xAC00;
constexpr char32_t kHangulLast = 0xD7A3;
constexpr char32_t kReplacement = 0xFFFD;

// Medial order: ㅏ ㅐ ㅑ ㅒ ㅓ ㅔ ㅕ ㅖ ㅗ ㅘ ㅙ ㅚ ㅛ ㅜ ㅝ ㅞ ㅟ ㅠ ㅡ ㅢ ㅣ
constexpr std::array<std::string_view, 21> kMedialClass = {
    "a", "e", "a", "e", "ʌ", "e", "ʌ", "e", "o", "a", "e",
    "e", "o", "u", "ʌ", "e", "i", "u", "ɯ", "i", "i"};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Keeps letters, digits and inner apostrophes ("don't"); drops other ASCII punctuation.
std::string strip_punctuation(std::string_view token) {
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    const auto c = static_cast<unsigned char>(token[i]);
    if (std::isalnum(c) || c >= 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c == '\'' && !out.empty() && i + 1 < token.size() &&
               std::isalpha(static_cast<unsigned char>(token[i + 1]))) {
      out.push_back('\'');
    }
  }
  return out;
}

}  // namespace

Language parse_language(std::string_view name) {
  const auto u = upper(name);
  if (u == "KR" || u == "KO" || u == "KOREAN") return Language::kr;
  if (u == "EN" || u == "ENGLISH") return Language::en;
  fail(ErrorKind::invalid_input, "unknown language: " + std::string(name));
}

std::string_view language_name(Language language) { return language == Language::kr ? "kr" : "en"; }

VowelClassTable::VowelClassTable(Language language, std::vector<std::string> classes)
    : language_(language), classes_(std::move(classes)) {}

const VowelClassTable& VowelClassTable::korean() {
  static const VowelClassTable table(Language::kr, {"a", "e", "i", "o", "u", "ʌ", "ɯ"});
  return table;
}

const VowelClassTable& VowelClassTable::english() {
  static const VowelClassTable table(
      Language::en, {"ɔ", "ɑ", "i", "u", "ɛ", "ɪ", "ʊ", "ʌ", "ə", "æ", "eɪ", "aɪ", "oʊ", "aʊ", "ɔɪ"});
  return table;
}

const VowelClassTable& VowelClassTable::for_language(Language language) {
  return language == Language::kr ? korean() : english();
}

std::optional<std::size_t> VowelClassTable::index_of(std::string_view label) const {
  const auto it = std::find(classes_.begin(), classes_.end(), label);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

std::string_view unit_kind_name(UnitKind kind) { return kind == UnitKind::syllable ? "syllable" : "word"; }

UnitKind parse_unit_kind(std::string_view name) {
  if (name == "syllable") return UnitKind::syllable;
  if (name == "word") return UnitKind::word;
  fail(ErrorKind::invalid_input, "unknown unit kind: " + std::string(name));
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(extra) >= text.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

int hangul_medial_index(char32_t cp) {
  if (cp < kHangulFirst || cp > kHangulLast) return -1;
  return static_cast<int>(((cp - kHangulFirst) / 28) % 21);
}

std::string_view medial_class(int medial_index) {
  require(medial_index >= 0 && medial_index < 21, "medial index out of range");
  return kMedialClass[static_cast<std::size_t>(medial_index)];
}

VowelSequence decompose_hangul(std::string_view text) {
  VowelSequence seq;
  const auto lines = split_lines(text);
  for (std::size_t line = 0; line < lines.size(); ++line) {
    for (const auto token : split_ws(lines[line])) {
      const auto cps = decode_utf8(token);
      std::size_t syllable = 0;
      for (const char32_t cp : cps) {
        const int medial = hangul_medial_index(cp);
        if (medial < 0) continue;
        if (syllable == 0) {
          seq.words.emplace_back(token);
          seq.word_lines.push_back(line);
        }
        seq.labels.emplace_back(medial_class(medial));
        seq.units.push_back({UnitKind::syllable, encode_utf8(cp), seq.words.size() - 1, syllable, line});
        ++syllable;
      }
    }
  }
  if (seq.labels.empty()) fail(ErrorKind::empty_vowels, "empty vowel sequence: lyrics contain no hangul syllable");
  return seq;
}

void PronouncingDictionary::add(std::string word, std::vector<std::string> phones) {
  require(!phones.empty(), "dictionary entry without phones: " + word);
  entries_[upper(word)].push_back(std::move(phones));
}

const std::vector<std::vector<std::string>>* PronouncingDictionary::lookup(std::string_view word) const {
  const auto it = entries_.find(upper(word));
  return it == entries_.end() ? nullptr : &it->second;
}

PronouncingDictionary parse_cmudict(std::istream& in) {
  PronouncingDictionary dict;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with(";;;") || line.starts_with('#')) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    if (word.empty()) continue;
    // "READ(1)" is the second pronunciation of READ.
    if (const auto paren = word.find('('); paren != std::string::npos && word.back() == ')' && paren > 0)
      word.resize(paren);
    std::vector<std::string> phones;
    for (std::string ph; fields >> ph;) {
      if (ph.starts_with('#')) break;
      phones.push_back(upper(ph));
    }
    if (phones.empty()) continue;
    dict.add(std::move(word), std::move(phones));
  }
  return dict;
}

PronouncingDictionary load_cmudict(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot read pronouncing dictionary: " + path.string());
  auto dict = parse_cmudict(in);
  require(dict.size() > 0, "pronouncing dictionary has no entries: " + path.string());
  return dict;
}

std::string_view arpabet_class(std::string_view phone) {
  std::string_view base = phone;
  char stress = '\0';
  if (!base.empty() && std::isdigit(static_cast<unsigned char>(base.back()))) {
    stress = base.back();
    base.remove_suffix(1);
  }
  if (base == "AO") return "ɔ";
  if (base == "AA") return "ɑ";
  if (base == "IY") return "i";
  if (base == "UW") return "u";
  if (base == "EH") return "ɛ";
  if (base == "IH") return "ɪ";
  if (base == "UH") return "ʊ";
  if (base == "AH") return stress == '0' ? "ə" : "ʌ";
  if (base == "ER") return "ə";
  if (base == "AE") return "æ";
  if (base == "EY") return "eɪ";
  if (base == "AY") return "aɪ";
  if (base == "OW") return "oʊ";
  if (base == "AW") return "aʊ";
  if (base == "OY") return "ɔɪ";
  return {};
}

std::vector<std::string> word_to_vowels(std::string_view word, const PronouncingDictionary& dict) {
  const auto* prons = dict.lookup(word);
  if (prons == nullptr || prons->empty()) throw OutOfVocabulary(std::string(word));
  std::vector<std::string> out;
  for (const auto& phone : prons->front()) {
    const auto cls = arpabet_class(phone);
    if (!cls.empty()) out.emplace_back(cls);
  }
  return out;
}

VowelSequence english_vowels(std::string_view text, const PronouncingDictionary& dict, OovPolicy policy) {
  VowelSequence seq;
  const auto lines = split_lines(text);
  for (std::size_t line = 0; line < lines.size(); ++line) {
    for (const auto token : split_ws(lines[line])) {
      const auto word = strip_punctuation(token);
      if (word.empty()) continue;
      std::vector<std::string> vowels;
      try {
        vowels = word_to_vowels(word, dict);
      } catch (const OutOfVocabulary&) {
        if (policy == OovPolicy::fail) throw;
        seq.skipped_words.push_back(word);
        continue;
      }
      if (vowels.empty()) continue;
      seq.words.push_back(word);
      seq.word_lines.push_back(line);
      for (std::size_t s = 0; s < vowels.size(); ++s) {
        seq.labels.push_back(vowels[s]);
        seq.units.push_back({UnitKind::syllable, word, seq.words.size() - 1, s, line});
      }
    }
  }
  if (seq.labels.empty()) fail(ErrorKind::empty_vowels, "empty vowel sequence: no lyric word could be mapped");
  return seq;
}

VowelSequenceMatrix build_matrix(const VowelSequence& sequence, const VowelClassTable& table) {
  if (sequence.labels.empty()) fail(ErrorKind::empty_vowels, "empty vowel sequence");
  const auto m = static_cast<Eigen::Index>(sequence.labels.size());
  VowelSequenceMatrix out;
  out.a = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(table.size()));
  out.class_index.reserve(sequence.labels.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& label = sequence.labels[static_cast<std::size_t>(r)];
    const auto col = table.index_of(label);
    require(col.has_value(), "unknown vowel label for " + std::string(language_name(table.language())) +
                                 " table: " + label);
    out.a(r, static_cast<Eigen::Index>(*col)) = 1.0;
    out.class_index.push_back(*col);
  }
  out.units = sequence.units;
  return out;
}

std::size_t distinct_classes(const VowelSequenceMatrix& a) {
  std::size_t count = 0;
  for (Eigen::Index c = 0; c < a.a.cols(); ++c)
    if (a.a.col(c).maxCoeff() > 0.0) ++count;
  return count;
}

}  // namespace lyricalign::text
