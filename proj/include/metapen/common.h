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

#ifndef METAPEN_COMMON_H_
#define METAPEN_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metapen {

// Absolute tolerance for every probability normalization check.
inline constexpr double kProbabilityTolerance = 1e-9;

// Default ceiling on enumerated pure plans per player.
inline constexpr std::size_t kDefaultPlanCap = 1'000'000;

enum class Player { kAttacker, kDefender, kChance };

std::string_view PlayerName(Player player);
Player ParsePlayer(std::string_view name);  // throws InputError

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (trees, plans, scenarios, options).
class InputError : public Error {
 public:
  using Error::Error;
};

// The requested computation is too large for the chosen method.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t count)
      : Error(what), count_(count) {}
  std::size_t count() const { return count_; }

 private:
  std::size_t count_;
};

// A numerical method failed (singular system, iteration cap, ...).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace metapen

#endif  // METAPEN_COMMON_H_
