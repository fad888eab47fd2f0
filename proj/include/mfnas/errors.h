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

#ifndef MFNAS_ERRORS_H_
#define MFNAS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mfnas {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat encoding has a length that is not N(N+5)/2 or carries non-binary links.
class MalformedEncodingError : public Error {
 public:
  using Error::Error;
};

class InvalidOpError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientPoolError : public Error {
 public:
  using Error::Error;
};

class UnevaluatedGenomeError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Trainer failed (crash, timeout, error record). Retriable; carries the genome.
class EvaluationError : public Error {
 public:
  EvaluationError(std::string genome_id, const std::string& what)
      : Error("evaluation of " + genome_id + " failed: " + what),
        genome_id_(std::move(genome_id)) {}
  const std::string& genome_id() const { return genome_id_; }

 private:
  std::string genome_id_;
};

// Trainer answered with something that does not follow the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfnas

#endif  // MFNAS_ERRORS_H_
