// Copyright 2026 The mfnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfnas/log.h"

#include <atomic>
#include <iostream>

namespace mfnas {
namespace {

std::atomic<LogLevel> g_level{LogLevel::kWarning};

constexpr std::string_view kLevelNames[] = {"debug", "info", "warning", "error"};

}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log(LogLevel level, std::string_view message) {
  if (level < g_level.load() || level == LogLevel::kOff) return;
  std::cerr << '[' << kLevelNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace mfnas
