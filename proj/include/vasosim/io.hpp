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

#ifndef VASOSIM_IO_HPP
#define VASOSIM_IO_HPP

// Text formats. Numbers are written in shortest round-trip form, so reading
// a file back reproduces every double exactly.
//
//   radii:    "# <nx>,<nt>,<dx>,<dt>" then nt rows of nx radii [m]
//   echo:     "# fs=<Hz> session=<id> samples=<n>", "t_s,p_pa", n rows
//   waveform: "t_s,p_pa" then rows

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vasosim/acoustics.hpp"
#include "vasosim/hemogrid.hpp"

namespace vasosim::io {

std::string format_double(double v);
double parse_double(std::string_view text);

std::string radii_csv(const hemo::RadiiField &field);
hemo::RadiiField parse_radii_csv(const std::string &text);

std::string echo_csv(const acoustics::EchoTrace &trace);
acoustics::EchoTrace parse_echo_csv(const std::string &text);

struct Waveform {
  std::vector<double> times;
  std::vector<double> values;
};
Waveform parse_waveform_csv(const std::string &text);

std::string read_file(const std::filesystem::path &path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path &path);

hemo::RadiiField read_radii(const std::filesystem::path &path);
acoustics::EchoTrace read_echo(const std::filesystem::path &path);
Waveform read_waveform(const std::filesystem::path &path);

} // namespace vasosim::io

#endif // VASOSIM_IO_HPP
