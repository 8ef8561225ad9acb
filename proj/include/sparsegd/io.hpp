#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sparsegd/example.hpp"

namespace sparsegd {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How raw label tokens map onto learner labels.
//   pm_one:   expects -1/+1 (also accepts 0/1 and maps 0 -> -1)
//   zero_one: expects 0/1, mapped to -1/+1
//   raw:      any finite real, passed through (regression)
enum class LabelMap { pm_one, zero_one, raw };

LabelMap label_map_from_string(std::string_view s);
std::string to_string(LabelMap m);

// Parses "label idx:val idx:val ..." (or, with require_label=false, a bare
// feature list). Indices must be strictly increasing; values finite.
// Zero-valued features are dropped. line_no is only for error messages.
SparseExample parse_example(std::string_view line, LabelMap map,
                            bool require_label, bool* had_label,
                            std::uint64_t line_no);

std::string format_example(const SparseExample& ex);

// Line-oriented reader over a plain or gzip-compressed file ("-" = stdin,
// plain only). Decompression is streamed; memory use is one line.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Fills `line` (without trailing newline) and returns true, or returns
  // false at end of input.
  bool next(std::string& line);
  std::uint64_t line_no() const { return line_no_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint64_t line_no_ = 0;
};

// Streams examples from a file; blank lines and lines starting with '#' are
// skipped. The callback receives (example, 1-based line number).
void for_each_example(const std::string& path, LabelMap map,
                      const std::function<void(SparseExample&&, std::uint64_t)>& fn,
                      bool require_label = true);

Dataset load_dataset(const std::string& path, LabelMap map);

// CRC32 of a file's raw bytes (compressed bytes for .gz), for manifests.
std::uint32_t crc32_file(const std::string& path);

}  // namespace sparsegd
