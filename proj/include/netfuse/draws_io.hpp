#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "netfuse/errors.hpp"
#include "netfuse/mcmc.hpp"

// Columnar binary serialization of PosteriorDraws: a four-byte magic and
// version, fixed-width little-endian header fields, then the raw chains.
// Layout (in order):
//   magic "NFD1"
//   u32 x 7: n, T, n_dyads, samples, scheme, mon_count, record_monitor
//   f64 x 3: lambda_mean, lambda_ess, sampling_seconds
//   u32 x mon_count: monitored times
//   f64 x samples: lambda chain
//   f64 x samples*n_dyads*3: theta at t=T (draw-major, then dyad, then r)
//   f64 x n_dyads*3*(T+1): posterior mean paths
//   if record_monitor:
//     f64 x samples*n_dyads*3*mon_count: monitored chains
//     f64 x n_dyads*3*mon_count: their effective sample sizes

namespace netfuse {

namespace draws_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  out.append(b, 4);
}

inline void put_f64(std::string& out, double x) {
  std::uint64_t v = 0;
  std::memcpy(&v, &x, 8);
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.append(b, 8);
}

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > buf.size()) throw DataError("draws file truncated");
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) {
      v = (v << 8) | static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(k)]);
    }
    pos += 4;
    return v;
  }

  double f64() {
    if (pos + 8 > buf.size()) throw DataError("draws file truncated");
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) {
      v = (v << 8) | static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(k)]);
    }
    pos += 8;
    double x = 0.0;
    std::memcpy(&x, &v, 8);
    return x;
  }
};

}  // namespace draws_detail

inline std::string serialize_draws(const PosteriorDraws& d) {
  using draws_detail::put_f64;
  using draws_detail::put_u32;
  std::string out;
  out.reserve(64 + 8 * (d.lambda.size() + d.theta_last.size() * 3 + d.mon.size()));
  out.append("NFD1", 4);
  put_u32(out, static_cast<std::uint32_t>(d.n));
  put_u32(out, static_cast<std::uint32_t>(d.T));
  put_u32(out, static_cast<std::uint32_t>(d.n_dyads));
  put_u32(out, static_cast<std::uint32_t>(d.samples));
  put_u32(out, d.scheme == McmcScheme::FFBS ? 0u : 1u);
  put_u32(out, static_cast<std::uint32_t>(d.mon_t.size()));
  put_u32(out, d.record_monitor ? 1u : 0u);
  put_f64(out, d.lambda_mean);
  put_f64(out, d.lambda_ess);
  put_f64(out, d.sampling_seconds);
  for (int t : d.mon_t) put_u32(out, static_cast<std::uint32_t>(t));
  for (double x : d.lambda) put_f64(out, x);
  for (const ThetaTriple& th : d.theta_last) {
    put_f64(out, th.theta1);
    put_f64(out, th.theta2);
    put_f64(out, th.theta3);
  }
  for (const auto& per_dyad : d.theta_mean) {
    for (int r = 0; r < 3; ++r) {
      for (double x : per_dyad[r]) put_f64(out, x);
    }
  }
  if (d.record_monitor) {
    for (double x : d.mon) put_f64(out, x);
    for (const MonitorEss& m : d.mon_ess) put_f64(out, m.ess);
  }
  return out;
}

inline PosteriorDraws deserialize_draws(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "NFD1") != 0) {
    throw DataError("not a draws file (bad magic)");
  }
  draws_detail::Cursor cur{bytes, 4};
  PosteriorDraws d;
  d.n = static_cast<int>(cur.u32());
  d.T = static_cast<int>(cur.u32());
  d.n_dyads = cur.u32();
  d.samples = static_cast<int>(cur.u32());
  const std::uint32_t scheme = cur.u32();
  if (scheme > 1) throw DataError("draws file: unknown scheme tag");
  d.scheme = scheme == 0 ? McmcScheme::FFBS : McmcScheme::Direct;
  const std::uint32_t mon_count = cur.u32();
  d.record_monitor = cur.u32() != 0;
  if (d.n < 2 || d.T < 1 || d.samples < 1 || d.n_dyads != dyad_count(d.n)) {
    throw DataError("draws file: inconsistent header");
  }
  d.lambda_mean = cur.f64();
  d.lambda_ess = cur.f64();
  d.sampling_seconds = cur.f64();
  d.mon_t.resize(mon_count);
  for (std::uint32_t k = 0; k < mon_count; ++k) d.mon_t[k] = static_cast<int>(cur.u32());
  d.lambda.resize(static_cast<std::size_t>(d.samples));
  for (double& x : d.lambda) x = cur.f64();
  d.theta_last.resize(static_cast<std::size_t>(d.samples) * d.n_dyads);
  for (ThetaTriple& th : d.theta_last) {
    th.theta1 = cur.f64();
    th.theta2 = cur.f64();
    th.theta3 = cur.f64();
  }
  d.theta_mean.assign(d.n_dyads, {});
  for (auto& per_dyad : d.theta_mean) {
    for (int r = 0; r < 3; ++r) {
      per_dyad[r].resize(static_cast<std::size_t>(d.T) + 1);
      for (double& x : per_dyad[r]) x = cur.f64();
    }
  }
  if (d.record_monitor) {
    d.mon.resize(static_cast<std::size_t>(d.samples) * d.mon_width());
    for (double& x : d.mon) x = cur.f64();
    d.mon_ess.clear();
    for (std::size_t dy = 0; dy < d.n_dyads; ++dy) {
      for (int r = 1; r <= 3; ++r) {
        for (std::size_t k = 0; k < d.mon_t.size(); ++k) {
          d.mon_ess.push_back({dy, r, d.mon_t[k], cur.f64()});
        }
      }
    }
  }
  if (cur.pos != bytes.size()) throw DataError("draws file: trailing bytes");
  return d;
}

}  // namespace netfuse
