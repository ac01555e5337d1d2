/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The vasosim Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vasosim/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>

#include "vasosim/errors.hpp"

namespace vasosim::io {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> lines_of(const std::string &text) {
  auto lines = split(text, '\n');
  // a trailing newline leaves one empty element
  if (!lines.empty() && trim(lines.back()).empty())
    lines.pop_back();
  return lines;
}

std::size_t parse_size(std::string_view text) {
  text = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("expected an integer, got '" + std::string(text) + "'");
  return v;
}

} // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc())
    throw FormatError("cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw FormatError("expected a number, got '" + std::string(text) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Radii
// ---------------------------------------------------------------------------

std::string radii_csv(const hemo::RadiiField &field) {
  const auto &g = field.grid();
  std::string out = "# " + std::to_string(g.nx()) + "," + std::to_string(g.nt()) +
                    "," + format_double(g.dx()) + "," + format_double(g.dt()) +
                    "\n";
  for (std::size_t j = 0; j < g.nt(); ++j) {
    const auto col = field.column(j);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (i)
        out += ',';
      out += format_double(col[i]);
    }
    out += '\n';
  }
  return out;
}

hemo::RadiiField parse_radii_csv(const std::string &text) {
  const auto lines = lines_of(text);
  if (lines.empty() || !trim(lines[0]).starts_with('#'))
    throw FormatError("radii file lacks the '# nx,nt,dx,dt' header");
  const auto head = split(trim(trim(lines[0]).substr(1)), ',');
  if (head.size() != 4)
    throw FormatError("radii header needs nx,nt,dx,dt");
  const std::size_t nx = parse_size(head[0]);
  const std::size_t nt = parse_size(head[1]);
  const double dx = parse_double(head[2]);
  const double dt = parse_double(head[3]);
  if (lines.size() != nt + 1)
    throw FormatError("radii file has " + std::to_string(lines.size() - 1) +
                      " rows, header declares " + std::to_string(nt));
  std::vector<double> values;
  values.reserve(nx * nt);
  for (std::size_t j = 0; j < nt; ++j) {
    const auto cells = split(trim(lines[j + 1]), ',');
    if (cells.size() != nx)
      throw FormatError("radii row " + std::to_string(j) + " has " +
                        std::to_string(cells.size()) + " values, expected " +
                        std::to_string(nx));
    for (auto c : cells)
      values.push_back(parse_double(c));
  }
  try {
    return hemo::RadiiField(hemo::Grid(nx, nt, dx, dt, 0.0), std::move(values));
  } catch (const DomainError &e) {
    throw FormatError(std::string("radii file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Echo
// ---------------------------------------------------------------------------

std::string echo_csv(const acoustics::EchoTrace &trace) {
  if (trace.session_id().find_first_of(" \t\r\n") != std::string::npos)
    throw FormatError("session ids must not contain whitespace");
  std::ostringstream out;
  out << "# fs=" << format_double(trace.fs())
      << " session=" << trace.session_id()
      << " samples=" << trace.size() << "\n";
  out << "t_s,p_pa\n";
  for (std::size_t n = 0; n < trace.size(); ++n)
    out << format_double(trace.time(n)) << ','
        << format_double(trace.samples()[n]) << '\n';
  return out.str();
}

acoustics::EchoTrace parse_echo_csv(const std::string &text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || !trim(lines[0]).starts_with('#'))
    throw FormatError("echo file lacks the '# fs=... session=...' header");

  double fs = 0.0;
  bool have_fs = false;
  std::string session;
  std::size_t declared = 0;
  bool have_count = false;
  for (auto tok : split(trim(trim(lines[0]).substr(1)), ' ')) {
    tok = trim(tok);
    if (tok.empty())
      continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("bad echo header token '" + std::string(tok) + "'");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "fs") {
      fs = parse_double(val);
      have_fs = true;
    } else if (key == "session") {
      session = std::string(val);
    } else if (key == "samples") {
      declared = parse_size(val);
      have_count = true;
    }
  }
  if (!have_fs)
    throw FormatError("echo header lacks fs");
  if (trim(lines[1]) != "t_s,p_pa")
    throw FormatError("echo file lacks the 't_s,p_pa' column header");

  const std::size_t n = lines.size() - 2;
  if (have_count && n != declared)
    throw FormatError("echo file has " + std::to_string(n) +
                      " samples, header declares " + std::to_string(declared));
  std::vector<double> samples;
  samples.reserve(n);
  double t0 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto cells = split(trim(lines[k + 2]), ',');
    if (cells.size() != 2)
      throw FormatError("echo row " + std::to_string(k) + " needs t_s,p_pa");
    const double t = parse_double(cells[0]);
    if (k == 0)
      t0 = t;
    else if (std::abs(t - (t0 + static_cast<double>(k) / fs)) > 0.5 / fs)
      throw FormatError("echo row " + std::to_string(k) +
                        " is off the sampling grid");
    samples.push_back(parse_double(cells[1]));
  }
  try {
    return acoustics::EchoTrace(std::move(samples), fs, t0, session);
  } catch (const DomainError &e) {
    throw FormatError(std::string("echo file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Waveform
// ---------------------------------------------------------------------------

Waveform parse_waveform_csv(const std::string &text) {
  const auto lines = lines_of(text);
  Waveform w;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = trim(lines[k]);
    if (line.empty() || line.starts_with('#'))
      continue;
    if (line == "t_s,p_pa")
      continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2)
      throw FormatError("waveform row " + std::to_string(k) + " needs t_s,p_pa");
    w.times.push_back(parse_double(cells[0]));
    w.values.push_back(parse_double(cells[1]));
  }
  if (w.times.empty())
    throw FormatError("waveform file has no samples");
  return w;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
      throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1)
    throw Error("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string file_sha256(const std::filesystem::path &path) {
  return sha256_hex(read_file(path));
}

hemo::RadiiField read_radii(const std::filesystem::path &path) {
  return parse_radii_csv(read_file(path));
}

acoustics::EchoTrace read_echo(const std::filesystem::path &path) {
  return parse_echo_csv(read_file(path));
}

Waveform read_waveform(const std::filesystem::path &path) {
  return parse_waveform_csv(read_file(path));
}

} // namespace vasosim::io
