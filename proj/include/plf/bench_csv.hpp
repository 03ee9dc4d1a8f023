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

#ifndef PLF_BENCH_CSV_HPP_
#define PLF_BENCH_CSV_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace plf {

/// One timing row: `n,d,channels,method,seconds,rel_error`.
struct BenchRecord {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t channels = 0;
  std::string method;
  double seconds = 0.0;
  double rel_error = 0.0;  // NaN when no reference was computed.

  bool operator==(const BenchRecord&) const = default;
};

inline constexpr const char* kBenchHeader = "n,d,channels,method,seconds,rel_error";

// %.9g formatting; NaN is written as "nan".
std::string format_double(double v);

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows);
std::vector<BenchRecord> read_bench_csv(std::istream& in);

}  // namespace plf

#endif  // PLF_BENCH_CSV_HPP_
