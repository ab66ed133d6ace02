#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "netfuse/errors.hpp"
#include "netfuse/network.hpp"
#include "netfuse/rng.hpp"

using namespace netfuse;

namespace {
NetworkSeries parse_str(const std::string& text) {
  std::istringstream in(text);
  return parse_series(in);
}

std::string write_str(const NetworkSeries& s) {
  std::ostringstream out;
  write_series(s, out);
  return out.str();
}

NetworkSeries random_series(int n, int T, Rng& rng, double p = 0.3) {
  NetworkSeries s(n, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && rng.uniform() < p) s.set(t, i, j, true);
      }
    }
  }
  return s;
}
}  // namespace

TEST_CASE("edge-list parsing places directed links at 1-based (t, i, j)") {
  const NetworkSeries s = parse_str("n=3 T=2\n1 1 2\n2 3 1\n");
  REQUIRE(s.n() == 3);
  REQUIRE(s.T() == 2);
  CHECK(s.get(0, 0, 1));
  CHECK(s.get(1, 2, 0));
  CHECK_FALSE(s.get(0, 1, 0));
  int total = 0;
  for (int t = 0; t < 2; ++t) total += s.links_at(t);
  CHECK(total == 2);
}

TEST_CASE("comments and blank lines are ignored; labels are optional") {
  const NetworkSeries s = parse_str(
      "# a comment\n\nn=2 T=1\n# labels: alice, bob\n\n1 1 2\n# trailing comment\n");
  CHECK(s.get(0, 0, 1));
  REQUIRE(s.node_labels.size() == 2);
  CHECK(s.node_labels[0] == "alice");
  CHECK(s.node_labels[1] == "bob");
  // Labels survive the round trip.
  const NetworkSeries s2 = parse_str(write_str(s));
  CHECK(s2.node_labels == s.node_labels);
}

TEST_CASE("parse errors carry 1-based line numbers") {
  // Self-loop.
  try {
    parse_str("n=3 T=1\n1 2 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("self-loop") != std::string::npos);
  }
  // Duplicate record.
  try {
    parse_str("n=3 T=1\n1 1 2\n1 1 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  // Node out of range.
  CHECK_THROWS_AS(parse_str("n=3 T=1\n1 1 4\n"), ParseError);
  CHECK_THROWS_AS(parse_str("n=3 T=1\n1 0 2\n"), ParseError);
  // Time out of range.
  CHECK_THROWS_AS(parse_str("n=3 T=2\n3 1 2\n"), ParseError);
  // Malformed records and headers.
  CHECK_THROWS_AS(parse_str("n=3 T=2\n1 1\n"), ParseError);
  CHECK_THROWS_AS(parse_str("n=3 T=2\n1 1 two\n"), ParseError);
  CHECK_THROWS_AS(parse_str("n=3\n"), ParseError);
  CHECK_THROWS_AS(parse_str("n=0 T=2\n"), ParseError);
  CHECK_THROWS_AS(parse_str("T=2 n=3\n"), ParseError);
  CHECK_THROWS_AS(parse_str(""), ParseError);
  CHECK_THROWS_AS(parse_str("# only comments\n"), ParseError);
  // Label count mismatch.
  CHECK_THROWS_AS(parse_str("n=3 T=1\n# labels: a,b\n"), ParseError);
}

TEST_CASE("an empty network round-trips as a bare header") {
  const NetworkSeries s = parse_str("n=4 T=3\n");
  CHECK(write_str(s) == "n=4 T=3\n");
  for (int t = 0; t < 3; ++t) CHECK(s.links_at(t) == 0);
}

TEST_CASE("writer output is canonical: permuted input lines produce identical bytes") {
  const std::string a = "n=3 T=2\n1 1 2\n1 2 1\n2 3 1\n2 1 3\n";
  const std::string b = "n=3 T=2\n2 1 3\n1 2 1\n2 3 1\n1 1 2\n";
  CHECK(write_str(parse_str(a)) == write_str(parse_str(b)));
  // And the canonical form is a fixed point of parse+write.
  const std::string canon = write_str(parse_str(a));
  CHECK(write_str(parse_str(canon)) == canon);
}

TEST_CASE("random series survive a write/parse round trip exactly") {
  Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform() * 6);
    const int T = 1 + static_cast<int>(rng.uniform() * 5);
    const NetworkSeries s = random_series(n, T, rng);
    const NetworkSeries back = parse_str(write_str(s));
    REQUIRE(back.n() == n);
    REQUIRE(back.T() == T);
    bool equal = true;
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && back.get(t, i, j) != s.get(t, i, j)) equal = false;
        }
      }
    }
    CHECK(equal);
  }
}

TEST_CASE("gzip-suffixed paths round-trip through compressed files") {
  Rng rng(78);
  const NetworkSeries s = random_series(5, 4, rng);
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string plain = dir + "/nf_test_net.txt";
  const std::string gz = dir + "/nf_test_net.txt.gz";
  write_series_file(plain, s);
  write_series_file(gz, s);
  const NetworkSeries s1 = read_series_file(plain);
  const NetworkSeries s2 = read_series_file(gz);
  CHECK(write_str(s1) == write_str(s));
  CHECK(write_str(s2) == write_str(s));
  // The gz file actually is compressed (magic bytes 1f 8b).
  std::ifstream raw(gz, std::ios::binary);
  char magic[2] = {0, 0};
  raw.read(magic, 2);
  CHECK(static_cast<unsigned char>(magic[0]) == 0x1f);
  CHECK(static_cast<unsigned char>(magic[1]) == 0x8b);
  std::remove(plain.c_str());
  std::remove(gz.c_str());
  CHECK_THROWS_AS(read_series_file(dir + "/nf_missing_file.txt"), DataError);
}

TEST_CASE("parser never crashes on randomly corrupted input") {
  Rng rng(79);
  const NetworkSeries base = random_series(4, 3, rng);
  const std::string canon = write_str(base);
  int accepted = 0, rejected = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    std::string text = canon;
    // Apply 1-3 random single-character mutations (replace, insert, delete).
    const int edits = 1 + static_cast<int>(rng.uniform() * 3);
    for (int e = 0; e < edits && !text.empty(); ++e) {
      const std::size_t pos = static_cast<std::size_t>(rng.uniform() * text.size());
      const char c = static_cast<char>(32 + static_cast<int>(rng.uniform() * 95));
      const double u = rng.uniform();
      if (u < 0.4) {
        text[pos] = c;
      } else if (u < 0.7) {
        text.insert(pos, 1, c);
      } else {
        text.erase(pos, 1);
      }
    }
    try {
      (void)parse_str(text);
      ++accepted;
    } catch (const ParseError&) {
      ++rejected;
    } catch (const DataError&) {
      ++rejected;
    }
    // Any other exception type escapes and fails the test.
  }
  CHECK(accepted + rejected == 10000);
  CHECK(rejected > 0);  // corruption is usually fatal
}

TEST_CASE("prefix extraction keeps the leading snapshots") {
  Rng rng(80);
  const NetworkSeries s = random_series(4, 6, rng);
  const NetworkSeries p = s.prefix(2);
  REQUIRE(p.T() == 2);
  REQUIRE(p.n() == 4);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i != j) CHECK(p.get(t, i, j) == s.get(t, i, j));
      }
    }
  }
}
