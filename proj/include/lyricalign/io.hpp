#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lyricalign/metrics.hpp"

namespace lyricalign::io {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// {"song_id": ..., "units": [{"kind","text","onset_s","offset_s"[,"line","vowel"]}]}
nlohmann::json to_json(const metrics::AnnotationSet& set);
metrics::AnnotationSet annotations_from_json(const nlohmann::json& j);

metrics::AnnotationSet read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const metrics::AnnotationSet& set);

/// "mm:ss.xx" rounded to 10 ms.
std::string lrc_timestamp(double seconds);

/// Enhanced LRC: one "[mm:ss.xx]" line per lyric line, each unit prefixed with
/// "<mm:ss.xx>".
std::string to_lrc(const metrics::AnnotationSet& set);

}  // namespace lyricalign::io
