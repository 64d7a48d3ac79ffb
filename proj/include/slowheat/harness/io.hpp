#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace slowheat::harness {

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

// Shortest decimal that round-trips a double (17 significant digits).
std::string format_g17(double v);

// CSV with '#'-prefixed metadata lines, then an RFC-4180-style header and
// body.  Built in memory so callers can hash or compare bytes before writing.
class CsvWriter {
 public:
  void meta(const std::string& key, const std::string& value);
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& cells);

  const std::string& str() const { return buf_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::string buf_;
  std::size_t n_cols_ = 0;
  bool header_done_ = false;
};

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace slowheat::harness
