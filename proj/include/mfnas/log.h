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

#ifndef MFNAS_LOG_H_
#define MFNAS_LOG_H_

#include <string_view>

namespace mfnas {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

// Messages below the threshold are dropped. Default: kWarning.
void set_log_level(LogLevel level);
LogLevel log_level();

// Writes "[level] message" to stderr.
void log(LogLevel level, std::string_view message);

}  // namespace mfnas

#endif  // MFNAS_LOG_H_
