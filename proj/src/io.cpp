#include "lyricalign/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lyricalign/error.hpp"

namespace lyricalign::io {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write file: " + path.string());
  out << content;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write CSV: " + path.string());
  out.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

nlohmann::json to_json(const metrics::AnnotationSet& set) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : set.units) {
    nlohmann::json j = {{"kind", text::unit_kind_name(u.kind)},
                        {"text", u.text},
                        {"onset_s", u.onset_s},
                        {"offset_s", u.offset_s},
                        {"line", u.line_index}};
    if (!u.vowel.empty()) j["vowel"] = u.vowel;
    units.push_back(std::move(j));
  }
  nlohmann::json out = {{"units", std::move(units)}};
  if (!set.song_id.empty()) out["song_id"] = set.song_id;
  return out;
}

metrics::AnnotationSet annotations_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("units") && j["units"].is_array(), "annotation JSON needs a \"units\" array");
  metrics::AnnotationSet set;
  set.song_id = j.value("song_id", std::string{});
  try {
    for (const auto& u : j["units"]) {
      metrics::AnnotatedUnit unit;
      unit.kind = text::parse_unit_kind(u.value("kind", std::string("syllable")));
      unit.text = u.value("text", std::string{});
      unit.onset_s = u.at("onset_s").get<double>();
      unit.offset_s = u.value("offset_s", unit.onset_s);
      unit.line_index = u.value("line", std::size_t{0});
      unit.vowel = u.value("vowel", std::string{});
      set.units.push_back(std::move(unit));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_input, std::string("malformed annotation JSON: ") + e.what());
  }
  metrics::validate(set);
  return set;
}

metrics::AnnotationSet read_annotations(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::invalid_input, path.string() + ": " + e.what());
  }
  return annotations_from_json(j);
}

void write_annotations(const std::filesystem::path& path, const metrics::AnnotationSet& set) {
  write_text(path, to_json(set).dump(2) + "\n");
}

std::string lrc_timestamp(double seconds) {
  const long centis = std::lround(std::max(0.0, seconds) * 100.0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02ld:%02ld.%02ld", centis / 6000, (centis / 100) % 60, centis % 100);
  return buf;
}

std::string to_lrc(const metrics::AnnotationSet& set) {
  std::ostringstream out;
  std::size_t i = 0;
  while (i < set.units.size()) {
    const std::size_t line = set.units[i].line_index;
    out << '[' << lrc_timestamp(set.units[i].onset_s) << ']';
    for (; i < set.units.size() && set.units[i].line_index == line; ++i)
      out << " <" << lrc_timestamp(set.units[i].onset_s) << '>' << set.units[i].text;
    out << '\n';
  }
  return out.str();
}

}  // namespace lyricalign::io
