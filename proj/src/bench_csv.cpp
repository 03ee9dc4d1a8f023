/* Copyright 2026 The plf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "plf/bench_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "plf/tensor_io.hpp"

namespace plf {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << kBenchHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << r.d << ',' << r.channels << ',' << r.method << ','
        << format_double(r.seconds) << ',' << format_double(r.rel_error) << '\n';
  }
}

std::vector<BenchRecord> read_bench_csv(std::istream& in) {
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line) || line != kBenchHeader) {
    throw ParseError("bad benchmark CSV header", 0);
  }
  offset += line.size() + 1;

  auto parse_size = [&](const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ParseError("bad integer field '" + s + "'", offset);
    }
    return v;
  };
  auto parse_real = [&](const std::string& s) {
    if (s == "nan") return std::nan("");
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("bad float field '" + s + "'", offset);
    }
  };

  std::vector<BenchRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw ParseError("expected 6 fields", offset);
    BenchRecord r;
    r.n = parse_size(fields[0]);
    r.d = parse_size(fields[1]);
    r.channels = parse_size(fields[2]);
    r.method = fields[3];
    r.seconds = parse_real(fields[4]);
    r.rel_error = parse_real(fields[5]);
    rows.push_back(std::move(r));
    offset += line.size() + 1;
  }
  return rows;
}

}  // namespace plf
