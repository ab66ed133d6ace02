#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "netfuse/errors.hpp"

// Time series of directed binary networks and their on-disk format:
//
//   n=<int> T=<int>
//   # labels: a,b,c          (optional)
//   t i j                    (1-indexed; meaning y[i -> j] = 1 at time t)
//
// Body lines are whitespace-separated; '#' lines are comments; unlisted
// triples are zeros. Files ending in ".gz" are gzip-compressed.

namespace netfuse {

class NetworkSeries {
 public:
  NetworkSeries() = default;
  NetworkSeries(int n, int T) : n_(n), T_(T) {
    if (n < 1 || T < 1) throw std::invalid_argument("NetworkSeries: need n >= 1 and T >= 1");
    data_.assign(static_cast<std::size_t>(n) * n * T, 0);
  }

  int n() const { return n_; }
  int T() const { return T_; }

  // Snapshot index t in [0, T), node indices in [0, n).
  bool get(int t, int i, int j) const { return data_[index(t, i, j)] != 0; }

  void set(int t, int i, int j, bool value) {
    if (i == j) throw std::invalid_argument("NetworkSeries::set: self-loops are not representable");
    data_[index(t, i, j)] = value ? 1 : 0;
  }

  int links_at(int t) const {
    int count = 0;
    const std::size_t base = static_cast<std::size_t>(t) * n_ * n_;
    for (std::size_t k = 0; k < static_cast<std::size_t>(n_) * n_; ++k) count += data_[base + k];
    return count;
  }

  // First t0 snapshots as their own series (training prefixes).
  NetworkSeries prefix(int t0) const {
    if (t0 < 1 || t0 > T_) throw std::invalid_argument("NetworkSeries::prefix: bad length");
    NetworkSeries out(n_, t0);
    std::copy(data_.begin(), data_.begin() + static_cast<std::size_t>(t0) * n_ * n_,
              out.data_.begin());
    out.node_labels = node_labels;
    return out;
  }

  std::vector<std::string> node_labels;

 private:
  std::size_t index(int t, int i, int j) const {
    if (t < 0 || t >= T_ || i < 0 || i >= n_ || j < 0 || j >= n_) {
      throw std::out_of_range("NetworkSeries: index out of range");
    }
    return (static_cast<std::size_t>(t) * n_ + i) * n_ + j;
  }

  int n_ = 0, T_ = 0;
  std::vector<std::uint8_t> data_;
};

namespace io_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline bool parse_int(std::string_view tok, long& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && !tok.empty();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '\t') ++pos;
    if (pos > start) out.push_back(s.substr(start, pos - start));
  }
  return out;
}

}  // namespace io_detail

inline NetworkSeries parse_series(std::istream& in) {
  std::string line;
  int ln = 0;
  bool have_header = false;
  NetworkSeries series;
  while (std::getline(in, line)) {
    ++ln;
    std::string_view sv = io_detail::trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      constexpr std::string_view kLabels = "# labels:";
      if (have_header && sv.substr(0, kLabels.size()) == kLabels) {
        std::vector<std::string> labels;
        std::string_view rest = sv.substr(kLabels.size());
        while (!rest.empty()) {
          std::size_t comma = rest.find(',');
          std::string_view tok = io_detail::trim(rest.substr(0, comma));
          if (!tok.empty()) labels.emplace_back(tok);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
        if (static_cast<int>(labels.size()) != series.n()) {
          throw ParseError(ln, "label count " + std::to_string(labels.size()) +
                                   " does not match n=" + std::to_string(series.n()));
        }
        series.node_labels = std::move(labels);
      }
      continue;
    }
    if (!have_header) {
      auto toks = io_detail::split_ws(sv);
      long n = 0, T = 0;
      const bool ok = toks.size() == 2 && toks[0].substr(0, 2) == "n=" &&
                      toks[1].substr(0, 2) == "T=" &&
                      io_detail::parse_int(toks[0].substr(2), n) &&
                      io_detail::parse_int(toks[1].substr(2), T) && n >= 1 && T >= 1 &&
                      n <= 100000 && T <= 10000000;
      if (!ok) throw ParseError(ln, "malformed header (expected \"n=<int> T=<int>\")");
      series = NetworkSeries(static_cast<int>(n), static_cast<int>(T));
      have_header = true;
      continue;
    }
    auto toks = io_detail::split_ws(sv);
    long t = 0, i = 0, j = 0;
    if (toks.size() != 3 || !io_detail::parse_int(toks[0], t) ||
        !io_detail::parse_int(toks[1], i) || !io_detail::parse_int(toks[2], j)) {
      throw ParseError(ln, "malformed edge record (expected \"t i j\")");
    }
    if (t < 1 || t > series.T()) {
      throw ParseError(ln, "time " + std::to_string(t) + " out of range [1," +
                               std::to_string(series.T()) + "]");
    }
    if (i < 1 || i > series.n() || j < 1 || j > series.n()) {
      throw ParseError(ln, "node index out of range [1," + std::to_string(series.n()) + "]");
    }
    if (i == j) throw ParseError(ln, "self-loop entry (i == j)");
    if (series.get(static_cast<int>(t) - 1, static_cast<int>(i) - 1, static_cast<int>(j) - 1)) {
      throw ParseError(ln, "duplicate edge record");
    }
    series.set(static_cast<int>(t) - 1, static_cast<int>(i) - 1, static_cast<int>(j) - 1, true);
  }
  if (!have_header) throw ParseError(ln, "missing header (expected \"n=<int> T=<int>\")");
  return series;
}

// Canonical edge-list output: header, optional labels, body sorted by
// (t, i, j). parse + write is the identity on canonical files.
inline void write_series(const NetworkSeries& series, std::ostream& out) {
  out << "n=" << series.n() << " T=" << series.T() << "\n";
  if (!series.node_labels.empty()) {
    out << "# labels: ";
    for (std::size_t k = 0; k < series.node_labels.size(); ++k) {
      if (k > 0) out << ",";
      out << series.node_labels[k];
    }
    out << "\n";
  }
  for (int t = 0; t < series.T(); ++t) {
    for (int i = 0; i < series.n(); ++i) {
      for (int j = 0; j < series.n(); ++j) {
        if (i != j && series.get(t, i, j)) {
          out << (t + 1) << " " << (i + 1) << " " << (j + 1) << "\n";
        }
      }
    }
  }
  if (!out) throw DataError("write_series: output stream failure");
}

inline bool has_gz_suffix(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

inline std::string read_text_file(const std::string& path) {
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open " + path);
    std::string out;
    char buf[1 << 16];
    int k;
    while ((k = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(k));
    const bool bad = k < 0;
    gzclose(f);
    if (bad) throw DataError("gzip read failure on " + path);
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  if (has_gz_suffix(path)) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open " + path + " for writing");
    const int wrote = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    const bool bad = static_cast<std::size_t>(wrote) != text.size();
    gzclose(f);
    if (bad) throw DataError("gzip write failure on " + path);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw DataError("write failure on " + path);
}

inline NetworkSeries read_series_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return parse_series(in);
}

inline void write_series_file(const std::string& path, const NetworkSeries& series) {
  std::ostringstream out;
  write_series(series, out);
  write_text_file(path, out.str());
}

}  // namespace netfuse
