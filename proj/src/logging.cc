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

#include "metapen/logging.h"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string_view>

namespace metapen {

int LogLevel() {
  static const int level = [] {
    const char* env = std::getenv("MEGA_PT_LOG");
    if (env == nullptr) return 0;
    const std::string_view v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return std::atoi(env);
  }();
  return level;
}

void LogLine(const char* format, ...) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::fputs("[metapen] ", stderr);
  va_list args;
  va_start(args, format);
  std::vfprintf(stderr, format, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace metapen
