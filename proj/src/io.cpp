#include "sparsegd/io.hpp"

#include <zlib.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>

namespace sparsegd {

LabelMap label_map_from_string(std::string_view s) {
  if (s == "pm1") return LabelMap::pm_one;
  if (s == "01") return LabelMap::zero_one;
  if (s == "raw") return LabelMap::raw;
  throw std::invalid_argument("unknown label convention: " + std::string(s));
}

std::string to_string(LabelMap m) {
  switch (m) {
    case LabelMap::pm_one: return "pm1";
    case LabelMap::zero_one: return "01";
    case LabelMap::raw: return "raw";
  }
  return "?";
}

namespace {

bool parse_double(std::string_view tok, double* out) {
  char buf[64];
  if (tok.empty() || tok.size() >= sizeof(buf)) return false;
  std::memcpy(buf, tok.data(), tok.size());
  buf[tok.size()] = '\0';
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(buf, &end);
  if (end != buf + tok.size() || errno == ERANGE) return false;
  *out = v;
  return true;
}

bool parse_index(std::string_view tok, std::uint64_t* out) {
  if (tok.empty()) return false;
  std::uint64_t v = 0;
  for (char c : tok) {
    if (c < '0' || c > '9') return false;
    std::uint64_t nv = v * 10 + static_cast<std::uint64_t>(c - '0');
    if (nv < v) return false;  // overflow
    v = nv;
  }
  *out = v;
  return true;
}

double map_label(double raw, LabelMap map, std::uint64_t line_no) {
  switch (map) {
    case LabelMap::raw:
      return raw;
    case LabelMap::pm_one:
      if (raw == 1.0 || raw == -1.0) return raw;
      if (raw == 0.0) return -1.0;
      throw ParseError("label must be -1, 0 or +1 under pm1 convention",
                       line_no);
    case LabelMap::zero_one:
      if (raw == 1.0) return 1.0;
      if (raw == 0.0) return -1.0;
      throw ParseError("label must be 0 or 1 under 01 convention", line_no);
  }
  return raw;
}

}  // namespace

SparseExample parse_example(std::string_view line, LabelMap map,
                            bool require_label, bool* had_label,
                            std::uint64_t line_no) {
  SparseExample ex;
  bool saw_label = false;
  bool first_token = true;
  std::uint64_t prev_index = 0;
  bool have_prev = false;

  size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    std::string_view tok = line.substr(pos, end - pos);
    pos = end;

    size_t colon = tok.find(':');
    if (first_token && colon == std::string_view::npos) {
      double raw;
      if (!parse_double(tok, &raw) || !std::isfinite(raw))
        throw ParseError("bad label '" + std::string(tok) + "'", line_no);
      ex.label = map_label(raw, map, line_no);
      saw_label = true;
      first_token = false;
      continue;
    }
    first_token = false;

    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 >= tok.size())
      throw ParseError("bad feature token '" + std::string(tok) + "'",
                       line_no);
    std::uint64_t idx;
    double val;
    if (!parse_index(tok.substr(0, colon), &idx))
      throw ParseError("bad feature index in '" + std::string(tok) + "'",
                       line_no);
    if (!parse_double(tok.substr(colon + 1), &val) || !std::isfinite(val))
      throw ParseError("bad feature value in '" + std::string(tok) + "'",
                       line_no);
    if (have_prev && idx <= prev_index)
      throw ParseError("feature indices must be strictly increasing", line_no);
    prev_index = idx;
    have_prev = true;
    if (val != 0.0) ex.features.emplace_back(idx, val);
  }

  if (require_label && !saw_label)
    throw ParseError("missing label", line_no);
  if (had_label) *had_label = saw_label;
  return ex;
}

std::string format_example(const SparseExample& ex) {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%.17g", ex.label);
  out = buf;
  for (const auto& [j, x] : ex.features) {
    std::snprintf(buf, sizeof(buf), " %llu:%.17g",
                  static_cast<unsigned long long>(j), x);
    out += buf;
  }
  return out;
}

struct LineReader::Impl {
  gzFile gz = nullptr;      // gzread handles plain files transparently too,
  std::FILE* fp = nullptr;  // but stdin stays on stdio.
  std::string pending;
  bool eof = false;

  bool fill(std::string& line) {
    line.clear();
    if (fp) {
      int c;
      bool any = false;
      while ((c = std::fgetc(fp)) != EOF) {
        any = true;
        if (c == '\n') return true;
        line.push_back(static_cast<char>(c));
      }
      return any;
    }
    char buf[1 << 16];
    for (;;) {
      size_t nl = pending.find('\n');
      if (nl != std::string::npos) {
        line.assign(pending, 0, nl);
        pending.erase(0, nl + 1);
        return true;
      }
      if (eof) {
        if (pending.empty()) return false;
        line.swap(pending);
        pending.clear();
        return true;
      }
      int n = gzread(gz, buf, sizeof(buf));
      if (n < 0) {
        int errnum = 0;
        const char* msg = gzerror(gz, &errnum);
        throw IoError(std::string("gzread: ") + (msg ? msg : "error"));
      }
      if (n == 0)
        eof = true;
      else
        pending.append(buf, static_cast<size_t>(n));
    }
  }
};

LineReader::LineReader(const std::string& path) : impl_(new Impl) {
  if (path == "-") {
    impl_->fp = stdin;
    return;
  }
  impl_->gz = gzopen(path.c_str(), "rb");
  if (!impl_->gz) throw IoError("cannot open " + path);
  gzbuffer(impl_->gz, 1 << 17);
}

LineReader::~LineReader() {
  if (impl_ && impl_->gz) gzclose(impl_->gz);
}

bool LineReader::next(std::string& line) {
  if (!impl_->fill(line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no_;
  return true;
}

void for_each_example(const std::string& path, LabelMap map,
                      const std::function<void(SparseExample&&, std::uint64_t)>& fn,
                      bool require_label) {
  LineReader rd(path);
  std::string line;
  while (rd.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    fn(parse_example(line, map, require_label, nullptr, rd.line_no()),
       rd.line_no());
  }
}

Dataset load_dataset(const std::string& path, LabelMap map) {
  Dataset ds;
  for_each_example(path, map,
                   [&](SparseExample&& ex, std::uint64_t) {
                     ds.push_back(std::move(ex));
                   });
  return ds;
}

std::uint32_t crc32_file(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open " + path);
  unsigned long crc = crc32(0L, Z_NULL, 0);
  char buf[1 << 16];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), fp)) > 0)
    crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                static_cast<uInt>(n));
  bool bad = std::ferror(fp);
  std::fclose(fp);
  if (bad) throw IoError("read error on " + path);
  return static_cast<std::uint32_t>(crc);
}

}  // namespace sparsegd
