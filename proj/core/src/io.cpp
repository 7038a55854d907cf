#include "dptree/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dptree/error.hpp"
#include "json.hpp"

namespace dptree {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
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

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  token = trim(token);
  if (token.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // strtod accepts the full %.17g output including exponents.
    std::string buf(token);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size();
  } else {
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc{} && res.ptr == token.data() + token.size();
  }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Tree parse_tree(std::string_view text, std::string_view source) {
  std::optional<std::size_t> vertices;
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_lines;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    if (!vertices) {
      std::size_t n = 0;
      if (tokens.size() != 2 || tokens[0] != "vertices" || !parse_number(tokens[1], n)) {
        fail(ErrorKind::ParseError, where(source, i + 1) + ": expected 'vertices N'");
      }
      vertices = n;
      continue;
    }
    Edge e;
    if (tokens.size() != 2 || !parse_number(tokens[0], e.a) || !parse_number(tokens[1], e.b)) {
      fail(ErrorKind::ParseError, where(source, i + 1) + ": expected an edge 'i j'");
    }
    if (!(e.a < e.b) || e.b >= *vertices) {
      fail(ErrorKind::ParseError, where(source, i + 1) + ": edge must satisfy 0 <= i < j < " + std::to_string(*vertices));
    }
    edges.push_back(e);
    edge_lines.push_back(i + 1);
  }
  if (!vertices) fail(ErrorKind::ParseError, std::string(source) + ": missing 'vertices N' header");
  try {
    return Tree::validate(*vertices, edges);
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::Disconnected) throw err.with_context(source);
    // Edge-local failures: the shortest failing prefix points at the line.
    for (std::size_t i = 1; i <= edges.size(); ++i) {
      try {
        Tree::validate(*vertices, {edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(i)});
      } catch (const Error& prefix) {
        if (prefix.kind() != ErrorKind::Disconnected) throw prefix.with_context(where(source, edge_lines[i - 1]));
      }
    }
    throw err.with_context(source);
  }
}

std::string format_tree(const Tree& tree) {
  std::string out = "vertices " + std::to_string(tree.vertex_count()) + "\n";
  for (const auto& e : tree.edges()) {
    const Edge n = e.normalized();
    out += std::to_string(n.a) + " " + std::to_string(n.b) + "\n";
  }
  return out;
}

Tree read_tree_file(const std::filesystem::path& path) {
  return parse_tree(read_text_file(path), path.string());
}

void write_tree_file(const std::filesystem::path& path, const Tree& tree) { write_text_file(path, format_tree(tree)); }

DiscreteMeasure parse_measure_csv(std::string_view text, MeasureMeta meta, std::string_view source) {
  const auto lines = split_lines(text);
  std::size_t row = 0;
  while (row < lines.size() && trim(lines[row]).empty()) ++row;
  if (row == lines.size()) fail(ErrorKind::ParseError, std::string(source) + ": empty measure file");

  const auto header = split(trim(lines[row]), ',');
  if (header.size() < 2 || trim(header.back()) != "w") {
    fail(ErrorKind::ParseError, where(source, row + 1) + ": header must be x1,...,xd,w");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (trim(header[k]) != "x" + std::to_string(k + 1)) {
      fail(ErrorKind::ParseError, where(source, row + 1) + ": expected column x" + std::to_string(k + 1));
    }
  }

  std::vector<double> coords, weights;
  for (std::size_t i = row + 1; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != d + 1) {
      fail(ErrorKind::ParseError, where(source, i + 1) + ": expected " + std::to_string(d + 1) + " columns");
    }
    for (std::size_t k = 0; k <= d; ++k) {
      double v = 0.0;
      if (!parse_number(cells[k], v)) fail(ErrorKind::ParseError, where(source, i + 1) + ": bad number '" + std::string(cells[k]) + "'");
      (k < d ? coords : weights).push_back(v);
    }
  }
  try {
    return DiscreteMeasure(d, std::move(coords), std::move(weights), std::move(meta));
  } catch (const Error& err) {
    throw err.with_context(source);
  }
}

std::string format_measure_csv(const DiscreteMeasure& measure) {
  std::string out;
  for (std::size_t k = 0; k < measure.dim(); ++k) out += "x" + std::to_string(k + 1) + ",";
  out += "w\n";
  for (std::size_t i = 0; i < measure.size(); ++i) {
    for (double x : measure.point(i)) out += format_double(x) + ",";
    out += format_double(measure.weight(i)) + "\n";
  }
  return out;
}

std::string format_measure_meta(const MeasureMeta& meta) {
  nlohmann::ordered_json j;
  j["family"] = meta.family;
  j["ratio"] = meta.ratio;
  j["branches"] = meta.branches;
  j["level"] = meta.level;
  j["c"] = meta.offset_c;
  j["nominal_s"] = meta.nominal_s;
  j["resolution"] = meta.resolution;
  if (meta.seed) j["seed"] = *meta.seed;
  j["generator"] = meta.generator;
  j["description"] = meta.description;
  return j.dump(2) + "\n";
}

MeasureMeta parse_measure_meta(std::string_view text, std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string(source) + ": " + e.what());
  }
  MeasureMeta meta;
  try {
    meta.family = j.value("family", meta.family);
    meta.ratio = j.value("ratio", meta.ratio);
    meta.branches = j.value("branches", meta.branches);
    meta.level = j.value("level", meta.level);
    meta.offset_c = j.value("c", meta.offset_c);
    meta.nominal_s = j.value("nominal_s", meta.nominal_s);
    meta.resolution = j.value("resolution", meta.resolution);
    if (j.contains("seed")) meta.seed = j.at("seed").get<std::uint64_t>();
    meta.generator = j.value("generator", meta.generator);
    meta.description = j.value("description", meta.description);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string(source) + ": " + e.what());
  }
  return meta;
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  std::filesystem::path out = csv_path;
  out.replace_extension(".meta.json");
  return out;
}

void write_measure(const std::filesystem::path& csv_path, const DiscreteMeasure& measure) {
  write_text_file(csv_path, format_measure_csv(measure));
  write_text_file(meta_path_for(csv_path), format_measure_meta(measure.meta()));
}

DiscreteMeasure read_measure(const std::filesystem::path& csv_path) {
  MeasureMeta meta;
  const auto sidecar = meta_path_for(csv_path);
  if (std::filesystem::exists(sidecar)) meta = parse_measure_meta(read_text_file(sidecar), sidecar.string());
  return parse_measure_csv(read_text_file(csv_path), std::move(meta), csv_path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::IoError, "short write to " + path.string());
}

}  // namespace dptree
