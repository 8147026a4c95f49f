#include "rs2gs/io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "rs2gs/error.h"

namespace rs2gs {
namespace {

static_assert(std::endian::native == std::endian::little ||
              std::endian::native == std::endian::big);

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteAll(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::string_view Trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const size_t a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  return s.substr(a, s.find_last_not_of(ws) - a + 1);
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? p : p - start));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

std::vector<std::string_view> Lines(std::string_view s) {
  auto lines = Split(s, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void ParseFail(const std::filesystem::path& path, size_t line,
                            const std::string& what) {
  throw Error(ErrorCode::kParseError,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

bool ParseNumber(std::string_view s, double* out) {
  s = Trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size();
}

template <typename I>
bool ParseInteger(std::string_view s, I* out) {
  s = Trim(s);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

template <typename T>
void PutLittle(std::string* out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out->append(bytes.data(), bytes.size());
}

template <typename T>
T GetLittle(const char* p) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

std::string Format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Whitespace-separated PNM header tokens, '#' comments to end of line.
struct PnmCursor {
  std::string_view data;
  size_t pos = 0;

  bool Token(std::string_view* out) {
    while (pos < data.size()) {
      const char c = data[pos];
      if (c == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])) &&
           data[pos] != '#') {
      ++pos;
    }
    *out = data.substr(start, pos - start);
    return !out->empty();
  }
};

}  // namespace

std::string FormatDouble(double x) {
  char buf[40];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::vector<Correspondence> ReadCorrespondences(const std::filesystem::path& path) {
  const std::string data = ReadAll(path);
  if (Trim(data).empty()) throw Error(ErrorCode::kEmptyFile, path.string() + " is empty");
  const auto lines = Lines(data);
  if (Trim(lines[0]) != "u1,v1,u2,v2") ParseFail(path, 1, "expected header u1,v1,u2,v2");
  std::vector<Correspondence> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto fields = Split(lines[i], ',');
    if (fields.size() != 4) {
      ParseFail(path, i + 1, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    double v[4];
    for (int k = 0; k < 4; ++k) {
      if (!ParseNumber(fields[k], &v[k])) {
        ParseFail(path, i + 1, "column " + std::to_string(k + 1) + ": not a number '" +
                                   std::string(Trim(fields[k])) + "'");
      }
    }
    out.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  return out;
}

void WriteCorrespondences(const std::filesystem::path& path,
                          const std::vector<Correspondence>& corrs) {
  std::string s = "u1,v1,u2,v2\n";
  for (const auto& c : corrs) {
    s += FormatDouble(c.first.u) + ',' + FormatDouble(c.first.v) + ',' +
         FormatDouble(c.second.u) + ',' + FormatDouble(c.second.v) + '\n';
  }
  WriteAll(path, s);
}

FlowField ReadFlow(const std::filesystem::path& path) {
  const std::string data = ReadAll(path);
  const size_t eol = data.find('\n');
  const std::string_view header(data.data(), eol == std::string::npos ? data.size() : eol);
  const auto tokens = Split(header, ' ');
  if (tokens.empty() || tokens[0] != "RSFLOW") {
    throw Error(ErrorCode::kBadMagic, path.string() + ": missing RSFLOW magic");
  }
  int w = 0, h = 0;
  if (eol == std::string::npos || tokens.size() != 3 || !ParseInteger(tokens[1], &w) ||
      !ParseInteger(tokens[2], &h) || w < 0 || h < 0) {
    throw Error(ErrorCode::kCorruptHeader, path.string() + ": expected 'RSFLOW <w> <h>'");
  }
  const size_t need = static_cast<size_t>(w) * h * 8;
  const size_t have = data.size() - eol - 1;
  if (have < need) {
    throw Error(ErrorCode::kTruncatedData, path.string() + ": " + std::to_string(have) +
                                               " of " + std::to_string(need) + " bytes");
  }
  if (have > need) {
    throw Error(ErrorCode::kCorruptHeader, path.string() + ": trailing bytes after payload");
  }
  FlowField f(w, h);
  const char* p = data.data() + eol + 1;
  for (size_t i = 0; i < f.flow.size(); ++i, p += 8) {
    const float dx = GetLittle<float>(p), dy = GetLittle<float>(p + 4);
    if (std::isnan(dx) || std::isnan(dy)) {
      f.valid[i] = 0;
      f.flow[i].setZero();
    } else {
      f.flow[i] = Vec2(dx, dy);
    }
  }
  return f;
}

void WriteFlow(const std::filesystem::path& path, const FlowField& flow) {
  std::string s = "RSFLOW " + std::to_string(flow.width) + " " + std::to_string(flow.height) + "\n";
  s.reserve(s.size() + flow.flow.size() * 8);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  for (size_t i = 0; i < flow.flow.size(); ++i) {
    const bool ok = flow.valid[i] != 0;
    PutLittle(&s, ok ? static_cast<float>(flow.flow[i].x()) : nan);
    PutLittle(&s, ok ? static_cast<float>(flow.flow[i].y()) : nan);
  }
  WriteAll(path, s);
}

Raster ReadImage(const std::filesystem::path& path) {
  const std::string data = ReadAll(path);
  PnmCursor cur{data};
  std::string_view magic;
  if (!cur.Token(&magic) || (magic != "P5" && magic != "P6")) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": only binary P5/P6 images are supported");
  }
  int w = 0, h = 0, maxval = 0;
  std::string_view tok;
  if (!cur.Token(&tok) || !ParseInteger(tok, &w) || !cur.Token(&tok) ||
      !ParseInteger(tok, &h) || !cur.Token(&tok) || !ParseInteger(tok, &maxval) || w <= 0 ||
      h <= 0 || cur.pos >= data.size() ||
      !std::isspace(static_cast<unsigned char>(data[cur.pos]))) {
    throw Error(ErrorCode::kCorruptHeader, path.string() + ": malformed PNM header");
  }
  if (maxval != 255 && maxval != 65535) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": maxval " + std::to_string(maxval) + " (need 255 or 65535)");
  }
  const int channels = magic == "P5" ? 1 : 3;
  const size_t bytes_per = maxval == 255 ? 1 : 2;
  const size_t start = cur.pos + 1;
  Raster r(w, h, channels);
  const size_t need = r.samples.size() * bytes_per;
  if (data.size() - start < need) {
    throw Error(ErrorCode::kTruncatedData, path.string() + ": pixel data too short");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + start);
  for (size_t i = 0; i < r.samples.size(); ++i) {
    const unsigned v = bytes_per == 1 ? p[i] : (p[2 * i] << 8) | p[2 * i + 1];
    r.samples[i] = static_cast<float>(static_cast<double>(v) / maxval);
  }
  return r;
}

void WriteImage(const std::filesystem::path& path, const Raster& image, int maxval) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::kInvalidArgument, "PNM output needs 1 or 3 channels");
  }
  if (maxval != 255 && maxval != 65535) {
    throw Error(ErrorCode::kInvalidArgument, "maxval must be 255 or 65535");
  }
  std::string s = std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                  std::to_string(image.width) + " " + std::to_string(image.height) + "\n" +
                  std::to_string(maxval) + "\n";
  for (size_t i = 0; i < image.samples.size(); ++i) {
    const bool ok = image.valid[i / image.channels] != 0;
    const double x = ok ? std::clamp(static_cast<double>(image.samples[i]), 0.0, 1.0) : 0.0;
    const unsigned v = static_cast<unsigned>(std::lround(x * maxval));
    if (maxval == 65535) s.push_back(static_cast<char>(v >> 8));
    s.push_back(static_cast<char>(v & 0xff));
  }
  WriteAll(path, s);
}

MotionEstimate ReadMotion(const std::filesystem::path& path) {
  const std::string data = ReadAll(path);
  const auto lines = Lines(data);
  MotionEstimate m;
  bool seen_model = false, seen_omega = false, seen_t = false, seen_scale = false;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = Trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> tok;
    for (auto t : Split(line, ' ')) {
      if (!Trim(t).empty()) tok.push_back(Trim(t));
    }
    const std::string_view key = tok[0];
    auto vec3 = [&](Vec3* v) {
      if (tok.size() != 4) ParseFail(path, i + 1, std::string(key) + " needs 3 values");
      for (int k = 0; k < 3; ++k) {
        if (!ParseNumber(tok[k + 1], &(*v)[k])) ParseFail(path, i + 1, "bad number");
      }
    };
    if (key == "model") {
      if (tok.size() != 2 || !ParseMotionModelTag(tok[1], &m.model)) {
        ParseFail(path, i + 1, "unknown model tag");
      }
      seen_model = true;
    } else if (key == "omega") {
      vec3(&m.omega);
      seen_omega = true;
    } else if (key == "t") {
      vec3(&m.t);
      seen_t = true;
    } else if (key == "scale_known") {
      if (tok.size() != 2 || (tok[1] != "0" && tok[1] != "1")) {
        ParseFail(path, i + 1, "scale_known must be 0 or 1");
      }
      m.scale_known = tok[1] == "1";
      seen_scale = true;
    } else {
      ParseFail(path, i + 1, "unknown key '" + std::string(key) + "'");
    }
  }
  if (!(seen_model && seen_omega && seen_t && seen_scale)) {
    ParseFail(path, lines.size(), "missing one of model, omega, t, scale_known");
  }
  return m;
}

void WriteMotion(const std::filesystem::path& path, const MotionEstimate& m) {
  std::string s = "model " + std::string(MotionModelTag(m.model)) + "\n";
  s += "omega " + Format17(m.omega.x()) + " " + Format17(m.omega.y()) + " " +
       Format17(m.omega.z()) + "\n";
  s += "t " + Format17(m.t.x()) + " " + Format17(m.t.y()) + " " + Format17(m.t.z()) + "\n";
  s += std::string("scale_known ") + (m.scale_known ? "1" : "0") + "\n";
  WriteAll(path, s);
}

void WriteMask(const std::filesystem::path& path, const std::vector<uint8_t>& mask) {
  std::string s;
  s.reserve(mask.size() * 2);
  for (uint8_t b : mask) s += b ? "1\n" : "0\n";
  WriteAll(path, s);
}

const char kBenchmarkHeader[] =
    "solver,variant,omega_deg,trans_frac,sigma_px,baseline_ratio,seed,"
    "median_px,mean_px,p90_px,runtime_us";

std::string FormatBenchmarkCsv(const std::vector<BenchmarkRecord>& records,
                               const Metadata& metadata) {
  std::string s;
  for (const auto& [k, v] : metadata) s += "# " + k + "=" + v + "\n";
  s += kBenchmarkHeader;
  s += '\n';
  for (const auto& r : records) {
    s += r.solver + ',' + r.variant + ',' + FormatDouble(r.omega_deg) + ',' +
         FormatDouble(r.trans_frac) + ',' + FormatDouble(r.sigma_px) + ',' +
         FormatDouble(r.baseline_ratio) + ',' + std::to_string(r.seed) + ',' +
         FormatDouble(r.median_px) + ',' + FormatDouble(r.mean_px) + ',' +
         FormatDouble(r.p90_px) + ',' + FormatDouble(r.runtime_us) + '\n';
  }
  return s;
}

void WriteBenchmarkCsv(const std::filesystem::path& path,
                       const std::vector<BenchmarkRecord>& records, const Metadata& metadata) {
  WriteAll(path, FormatBenchmarkCsv(records, metadata));
}

std::vector<BenchmarkRecord> ReadBenchmarkCsv(const std::filesystem::path& path,
                                              Metadata* metadata) {
  const std::string data = ReadAll(path);
  if (Trim(data).empty()) throw Error(ErrorCode::kEmptyFile, path.string() + " is empty");
  const auto lines = Lines(data);
  size_t i = 0;
  for (; i < lines.size() && !lines[i].empty() && lines[i].front() == '#'; ++i) {
    if (metadata) {
      const std::string_view kv = Trim(lines[i].substr(1));
      const size_t eq = kv.find('=');
      if (eq == std::string_view::npos) ParseFail(path, i + 1, "metadata needs key=value");
      metadata->emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
  }
  if (i >= lines.size() || Trim(lines[i]) != kBenchmarkHeader) {
    ParseFail(path, i + 1, "expected benchmark header");
  }
  std::vector<BenchmarkRecord> out;
  for (++i; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto f = Split(Trim(lines[i]), ',');
    if (f.size() != 11) ParseFail(path, i + 1, "expected 11 fields");
    BenchmarkRecord r;
    r.solver = std::string(f[0]);
    r.variant = std::string(f[1]);
    double* nums[] = {&r.omega_deg, &r.trans_frac, &r.sigma_px, &r.baseline_ratio};
    for (int k = 0; k < 4; ++k) {
      if (!ParseNumber(f[2 + k], nums[k])) ParseFail(path, i + 1, "bad number");
    }
    if (!ParseInteger(f[6], &r.seed)) ParseFail(path, i + 1, "bad seed");
    double* tail[] = {&r.median_px, &r.mean_px, &r.p90_px, &r.runtime_us};
    for (int k = 0; k < 4; ++k) {
      if (!ParseNumber(f[7 + k], tail[k])) ParseFail(path, i + 1, "bad number");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace rs2gs
