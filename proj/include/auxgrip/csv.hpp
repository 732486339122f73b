#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "auxgrip/common.hpp"

namespace auxgrip::csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string_view::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return std::string(s.substr(a, b - a + 1));
}

inline bool parse_double(const std::string& tok, double& out) {
  const std::string t = trim(tok);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

/// Shortest-exact formatting for doubles; keeps exported files deterministic
/// and round-trippable.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = std::strtod(buf, nullptr);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) return shorter;
    }
  }
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<long> line_numbers;  // 1-based source line of each row

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

/// Reads a numeric CSV with a mandatory header line. Blank lines and lines
/// starting with '#' are skipped.
inline Table read_table(std::istream& in, const std::string& origin = "<stream>") {
  Table t;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto toks = split_line(stripped);
    if (!have_header) {
      for (auto& h : toks) t.header.push_back(trim(h));
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& tok : toks) {
      double v;
      if (!parse_double(tok, v))
        throw IngestError(origin + ": unparseable value '" + trim(tok) +
                              "' at line " + std::to_string(line_no),
                          line_no);
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw IngestError(origin + ": expected " + std::to_string(t.header.size()) +
                            " columns, got " + std::to_string(row.size()) +
                            " at line " + std::to_string(line_no),
                        line_no);
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw IngestError(origin + ": empty file (no header)");
  return t;
}

inline Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_table(in, path);
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path) {
    if (!out_) throw IoError("cannot write '" + path + "'");
  }
  explicit Writer(std::ostream& os) : ext_(&os) {}

  void row(const std::vector<std::string>& cells) {
    std::ostream& os = ext_ ? *ext_ : out_;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  }
  void numeric_row(const std::vector<double>& vals) {
    std::vector<std::string> cells;
    cells.reserve(vals.size());
    for (double v : vals) cells.push_back(format_double(v));
    row(cells);
  }

 private:
  std::ofstream out_;
  std::ostream* ext_ = nullptr;
};

}  // namespace auxgrip::csv
