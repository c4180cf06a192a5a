#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace nfl {

// 12 significant digits everywhere; output files must be byte-stable.
inline std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

// Probabilities below 1e-12 print as plain 0 instead of scientific notation;
// the flag lets the writer append a footnote saying so.
inline std::string format_probability(double value, bool& clamped) {
  if (value != 0.0 && value > -1e-12 && value < 1e-12) {
    clamped = true;
    return "0";
  }
  return format_number(value);
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string hex64(std::uint64_t value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

// Minimal CSV writer: comment header first, then the column row, then data.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_comment(const std::string& line) { comments_.push_back(line); }

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void note_probability_clamped() { clamped_ = true; }

  void write(std::ostream& out) const {
    for (const std::string& comment : comments_) out << "# " << comment << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out << ",";
      out << columns_[i];
    }
    out << "\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ",";
        out << row[i];
      }
      out << "\n";
    }
    if (clamped_) {
      out << "# note: probabilities below 1e-12 are rendered as 0\n";
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
  bool clamped_ = false;
};

}  // namespace nfl
