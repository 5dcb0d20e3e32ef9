#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gazekit/common.hpp"

namespace cli {

// Fixed float formatting so metric CSVs are byte-stable across reruns.
inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) {
    f_.open(path, std::ios::trunc);
    if (!f_) throw gazekit::Error(gazekit::ErrorCode::IoError, "cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) f_ << ",";
      f_ << header[i];
    }
    f_ << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) f_ << ",";
      f_ << cells[i];
    }
    f_ << "\n";
  }

 private:
  std::ofstream f_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  double value(std::size_t row, int c) const { return std::stod(rows[row][c]); }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw gazekit::Error(gazekit::ErrorCode::IoError, "cannot read " + path);
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  if (std::getline(f, line)) t.header = split(line);
  while (std::getline(f, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

}  // namespace cli
