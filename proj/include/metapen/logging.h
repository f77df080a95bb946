// Copyright 2026 The Metapen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METAPEN_LOGGING_H_
#define METAPEN_LOGGING_H_

namespace metapen {

// Verbosity from the MEGA_PT_LOG environment variable: 0 (default, quiet),
// 1 or "info", 2 or "debug". Read once.
int LogLevel();

// printf-style line to stderr.
void LogLine(const char* format, ...) __attribute__((format(printf, 1, 2)));

}  // namespace metapen

#define MEGA_LOG(level, ...)                                       \
  do {                                                             \
    if (::metapen::LogLevel() >= (level)) ::metapen::LogLine(__VA_ARGS__); \
  } while (false)

#endif  // METAPEN_LOGGING_H_
