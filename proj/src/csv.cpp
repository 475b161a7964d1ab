#include "lcsvr/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lcsvr {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  // Tolerate surrounding spaces but nothing else.
  while (first < last && *first == ' ') ++first;
  while (last > first && *(last - 1) == ' ') --last;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || first == last) {
    throw CsvError("cannot parse '" + token + "' as a number in " + context);
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void check_header(const std::vector<std::string>& header, const std::string& path,
                  bool with_response) {
  std::vector<std::string> expected;
  if (with_response) expected.push_back("y");
  const std::size_t nfeat = header.size() - (with_response ? 1 : 0);
  for (std::size_t i = 1; i <= nfeat; ++i) expected.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size() || header[i] != expected[i]) {
      throw CsvError("missing or misplaced column header '" + expected[i] + "' in " + path);
    }
  }
}

}  // namespace

TrainingSet read_training_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw CsvError("empty file " + path);
  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 2) throw CsvError("missing column header 'x1' in " + path);
  check_header(header, path, true);

  const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
  TrainingSet ts;
  ts.X.resize(n, p);
  ts.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_csv_line(lines[static_cast<std::size_t>(r) + 1]);
    if (static_cast<Eigen::Index>(cells.size()) != p + 1) {
      throw CsvError("row " + std::to_string(r + 2) + " of " + path + " has " +
                     std::to_string(cells.size()) + " cells, expected " + std::to_string(p + 1));
    }
    ts.y[r] = parse_double(cells[0], path);
    for (Eigen::Index c = 0; c < p; ++c) {
      ts.X(r, c) = parse_double(cells[static_cast<std::size_t>(c) + 1], path);
    }
  }
  return ts;
}

Eigen::MatrixXd read_features_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw CsvError("empty file " + path);
  const std::vector<std::string> header = split_csv_line(lines[0]);
  check_header(header, path, false);

  const Eigen::Index p = static_cast<Eigen::Index>(header.size());
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size()) - 1;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_csv_line(lines[static_cast<std::size_t>(r) + 1]);
    if (static_cast<Eigen::Index>(cells.size()) != p) {
      throw CsvError("row " + std::to_string(r + 2) + " of " + path + " has " +
                     std::to_string(cells.size()) + " cells, expected " + std::to_string(p));
    }
    for (Eigen::Index c = 0; c < p; ++c) {
      X(r, c) = parse_double(cells[static_cast<std::size_t>(c)], path);
    }
  }
  return X;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw CsvError("empty file " + path);
  const Eigen::Index rows = static_cast<Eigen::Index>(lines.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(split_csv_line(lines[0]).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::vector<std::string> cells = split_csv_line(lines[static_cast<std::size_t>(r)]);
    if (static_cast<Eigen::Index>(cells.size()) != cols) {
      throw CsvError("ragged row " + std::to_string(r + 1) + " in " + path);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = parse_double(cells[static_cast<std::size_t>(c)], path);
    }
  }
  return m;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CsvError("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw CsvError("failed writing " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw CsvError("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

}  // namespace lcsvr
