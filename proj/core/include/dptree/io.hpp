#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dptree/measure.hpp"
#include "dptree/tree.hpp"

namespace dptree {

/// Decimal text with 17 significant digits; every double survives a
/// write/read cycle bit for bit.
std::string format_double(double value);

/// Tree file: "vertices N" on the first content line, then one "i j" edge per
/// line with 0 <= i < j < N. Blank lines and '#' comments are ignored.
/// Syntax problems raise ParseError with "<source>:<line>"; structural
/// problems keep their tree error kind.
Tree parse_tree(std::string_view text, std::string_view source = "<tree>");
std::string format_tree(const Tree& tree);
Tree read_tree_file(const std::filesystem::path& path);
void write_tree_file(const std::filesystem::path& path, const Tree& tree);

/// Measure CSV: header "x1,...,xd,w" then one atom per row.
DiscreteMeasure parse_measure_csv(std::string_view text, MeasureMeta meta = {}, std::string_view source = "<csv>");
std::string format_measure_csv(const DiscreteMeasure& measure);

/// Sidecar JSON with the construction parameters.
std::string format_measure_meta(const MeasureMeta& meta);
MeasureMeta parse_measure_meta(std::string_view text, std::string_view source = "<meta>");

/// "dir/name.csv" -> "dir/name.meta.json"
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

/// Writes the CSV and its sidecar; reading picks up the sidecar when present.
void write_measure(const std::filesystem::path& csv_path, const DiscreteMeasure& measure);
DiscreteMeasure read_measure(const std::filesystem::path& csv_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace dptree
