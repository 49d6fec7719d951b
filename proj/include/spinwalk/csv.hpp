#pragma once
// CSV and plain-text output.  Numeric cells carry 12 significant digits in a
// locale-independent format; files land via a temporary and an atomic rename
// so readers never observe a partial write.

#include <string>
#include <vector>

namespace spinwalk {

// Header plus numeric rows; every row must match the header width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// 12 significant digits, shortest form; integral values print without a
// decimal point.
std::string format_value(double v);

// Writes header and rows, newline-terminated.  Empty rows still produce the
// header line.  Throws LengthMismatch on ragged rows, IoError on failed I/O.
void write_csv(const std::string& path, const CsvTable& table);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace spinwalk
