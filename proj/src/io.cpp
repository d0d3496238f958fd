// SPDX-License-Identifier: Apache-2.0
#include "tinet/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tinet/errors.hpp"
#include "tinet/util.hpp"

namespace fs = std::filesystem;

namespace tinet {

namespace {

[[noreturn]] void fail(const std::string& origin, long line, const std::string& what) {
  throw DataError(origin + ":" + std::to_string(line) + ": " + what);
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

void validate_cloud(const PointCloud& cloud, const std::string& origin) {
  if (cloud.n() < 2) {
    throw DataError(origin + ": cloud has fewer than 2 points");
  }
}

} // namespace

PointCloud parse_xyz(std::istream& in, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  long n_cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto toks = tokens_of(line);
    if (toks.size() < 3) fail(origin, line_no, "expected at least 3 coordinates");
    if (n_cols < 0) n_cols = static_cast<long>(toks.size());
    if (static_cast<long>(toks.size()) != n_cols) {
      fail(origin, line_no, "inconsistent column count");
    }
    std::vector<double> row(toks.size());
    for (std::size_t c = 0; c < toks.size(); ++c) {
      if (!parse_double(toks[c], row[c])) {
        fail(origin, line_no, "non-numeric token '" + toks[c] + "'");
      }
      if (!std::isfinite(row[c])) {
        fail(origin, line_no, "non-finite value '" + toks[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  PointCloud cloud;
  cloud.points.resize(static_cast<long>(rows.size()), 3);
  const long attrs = n_cols > 3 ? n_cols - 3 : 0;
  cloud.attributes.resize(static_cast<long>(rows.size()), attrs);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 3; ++c) cloud.points(static_cast<long>(i), c) = rows[i][c];
    for (long a = 0; a < attrs; ++a) {
      cloud.attributes(static_cast<long>(i), a) = rows[i][3 + a];
    }
  }
  validate_cloud(cloud, origin);
  return cloud;
}

PointCloud parse_off(std::istream& in, const std::string& origin) {
  std::string line;
  long line_no = 0;

  auto next_data_line = [&](const char* what) -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++line_no;
      if (is_comment_or_blank(line)) continue;
      return tokens_of(line);
    }
    fail(origin, line_no, std::string("unexpected end of file, expected ") + what);
  };

  auto header = next_data_line("OFF header");
  if (header.empty() || header[0] != "OFF") {
    fail(origin, line_no, "malformed header, expected 'OFF'");
  }
  // Counts may follow the keyword on the same line.
  std::vector<std::string> counts(header.begin() + 1, header.end());
  if (counts.empty()) counts = next_data_line("'V F E' counts");
  if (counts.size() != 3) fail(origin, line_no, "expected counts line 'V F E'");
  long n_vertices = 0, n_faces = 0, n_edges = 0;
  if (!parse_long(counts[0], n_vertices) || !parse_long(counts[1], n_faces) ||
      !parse_long(counts[2], n_edges) || n_vertices < 0) {
    fail(origin, line_no, "malformed counts line");
  }

  PointCloud cloud;
  cloud.points.resize(n_vertices, 3);
  cloud.attributes.resize(n_vertices, 0);
  for (long v = 0; v < n_vertices; ++v) {
    const auto toks = next_data_line("vertex line");
    if (toks.size() < 3) fail(origin, line_no, "expected 3 vertex coordinates");
    for (int c = 0; c < 3; ++c) {
      double val;
      if (!parse_double(toks[c], val)) {
        fail(origin, line_no, "non-numeric token '" + toks[c] + "'");
      }
      if (!std::isfinite(val)) fail(origin, line_no, "non-finite value '" + toks[c] + "'");
      cloud.points(v, c) = val;
    }
  }
  // Faces are not used; the remainder of the file is ignored.
  validate_cloud(cloud, origin);
  return cloud;
}

PointCloud load_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  if (format == CloudFormat::Auto) {
    const std::string ext = fs::path(path).extension().string();
    format = (ext == ".off" || ext == ".OFF") ? CloudFormat::Off : CloudFormat::Xyz;
  }
  return format == CloudFormat::Off ? parse_off(in, path) : parse_xyz(in, path);
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (int i = 0; i < cloud.n(); ++i) {
    out << fmt_g17(cloud.points(i, 0)) << ' ' << fmt_g17(cloud.points(i, 1)) << ' '
        << fmt_g17(cloud.points(i, 2));
    for (long a = 0; a < cloud.attributes.cols(); ++a) {
      out << ' ' << fmt_g17(cloud.attributes(i, a));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(path, line_no, "expected 'path<TAB>label'");
    ManifestEntry e;
    e.path = (base / line.substr(0, tab)).string();
    long label;
    if (!parse_long(line.substr(tab + 1), label) || label < 0) {
      fail(path, line_no, "malformed label");
    }
    e.label = static_cast<int>(label);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("manifest " + path + " is empty");
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path);
  for (const auto& e : entries) {
    out << e.path << '\t' << e.label << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

void write_table(const Matrix& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (long i = 0; i < table.rows(); ++i) {
    for (long j = 0; j < table.cols(); ++j) {
      if (j) out << ' ';
      out << fmt_g17(table(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

Matrix load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  long n_cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto toks = tokens_of(line);
    if (n_cols < 0) n_cols = static_cast<long>(toks.size());
    if (static_cast<long>(toks.size()) != n_cols) {
      fail(path, line_no, "inconsistent column count");
    }
    std::vector<double> row(toks.size());
    for (size_t j = 0; j < toks.size(); ++j) {
      if (!parse_double(toks[j], row[j])) fail(path, line_no, "bad number " + toks[j]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": empty table");
  Matrix table(static_cast<long>(rows.size()), n_cols);
  for (long i = 0; i < table.rows(); ++i) {
    for (long j = 0; j < n_cols; ++j) table(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return table;
}

} // namespace tinet
