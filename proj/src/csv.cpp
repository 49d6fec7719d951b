#include "spinwalk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "spinwalk/common.hpp"

namespace spinwalk {

std::string format_value(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return {buf, r.ptr};
}

namespace {

// Write-then-rename keeps the destination either absent or complete.
void atomic_write(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << body;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("rename failed: " + path + " (" + ec.message() + ")");
  }
}

}  // namespace

void write_csv(const std::string& path, const CsvTable& table) {
  std::string body;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) body += ',';
    body += table.header[c];
  }
  body += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw LengthMismatch("csv row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) body += ',';
      body += format_value(row[c]);
    }
    body += '\n';
  }
  atomic_write(path, body);
}

void write_text_file(const std::string& path, const std::string& text) {
  atomic_write(path, text);
}

}  // namespace spinwalk
