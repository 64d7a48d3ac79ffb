#include "slowheat/harness/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "slowheat/errors.hpp"

namespace slowheat::harness {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// RFC-4180 quoting: only when the cell needs it (keeps files diffable).
std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void CsvWriter::meta(const std::string& key, const std::string& value) {
  if (header_done_)
    throw validation_error("CsvWriter: metadata must precede the header");
  buf_ += "# " + key + ": " + value + "\n";
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  if (header_done_) throw validation_error("CsvWriter: duplicate header");
  if (cols.empty()) throw validation_error("CsvWriter: empty header");
  n_cols_ = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i)
    buf_ += (i ? "," : "") + csv_escape(cols[i]);
  buf_ += '\n';
  header_done_ = true;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (!header_done_) throw validation_error("CsvWriter: header missing");
  if (cells.size() != n_cols_)
    throw validation_error("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    buf_ += (i ? "," : "") + csv_escape(cells[i]);
  buf_ += '\n';
}

void CsvWriter::row_values(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format_g17(v));
  row(s);
}

void CsvWriter::write(const std::filesystem::path& path) const {
  write_text_file(path, buf_);
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw validation_error("cannot open for writing: " + path.string());
  os << content;
  if (!os) throw numerical_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw validation_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace slowheat::harness
