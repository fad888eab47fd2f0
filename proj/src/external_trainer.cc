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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "mfnas/errors.h"
#include "mfnas/evaluation.h"
#include "mfnas/log.h"

namespace mfnas {
namespace {

constexpr int kProtocolVersion = 1;

template <typename T>
T require_field(const nlohmann::json& record, const char* field) {
  const auto it = record.find(field);
  if (it == record.end()) {
    throw ProtocolError(std::string("response missing field '") + field + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError(std::string("response field '") + field + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json make_hello_record() {
  return {{"type", "hello"}, {"protocol", kProtocolVersion}};
}

nlohmann::json make_request_record(const EvalRequest& request) {
  return {{"type", "evaluate"},
          {"id", request.id.hex()},
          {"nc", request.nc},
          {"rc", request.rc},
          {"network", request.network},
          {"epochs", request.target_epochs},
          {"resume", request.resume},
          {"checkpoint_id", request.checkpoint_id}};
}

TrainResult parse_response_record(const nlohmann::json& record, const EvalRequest& request) {
  if (!record.is_object()) throw ProtocolError("response is not a JSON object");
  const auto type = require_field<std::string>(record, "type");
  const auto id = require_field<std::string>(record, "id");
  if (id != request.id.hex()) {
    throw ProtocolError("response id '" + id + "' does not match request id '" +
                        request.id.hex() + "'");
  }
  if (type == "error") {
    throw EvaluationError(id, "trainer error: " + require_field<std::string>(record, "message"));
  }
  if (type != "result") throw ProtocolError("unexpected response type '" + type + "'");
  TrainResult r;
  r.val_error = require_field<double>(record, "val_error");
  r.epochs_trained = require_field<int>(record, "epochs_trained");
  r.checkpoint_id = require_field<std::string>(record, "checkpoint_id");
  if (!(r.val_error >= 0.0 && r.val_error <= 1.0)) {
    throw ProtocolError("response field 'val_error' outside [0, 1]");
  }
  if (r.epochs_trained != request.target_epochs) {
    throw ProtocolError("response field 'epochs_trained' is " +
                        std::to_string(r.epochs_trained) + ", expected " +
                        std::to_string(request.target_epochs));
  }
  if (r.checkpoint_id != request.checkpoint_id) {
    throw ProtocolError("response field 'checkpoint_id' is '" + r.checkpoint_id +
                        "', expected '" + request.checkpoint_id + "'");
  }
  return r;
}

ExternalTrainer::ExternalTrainer(ExternalTrainerOptions options)
    : options_(std::move(options)) {
  if (options_.command.empty()) throw ConfigError("empty trainer command");
  spawn();
  handshake();
}

ExternalTrainer::~ExternalTrainer() {
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  reap(false);
  if (from_child_ >= 0) ::close(from_child_);
}

void ExternalTrainer::spawn() {
  // A trainer that dies mid-write must surface as EPIPE, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
    throw EvaluationError("-", std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = ::fork();
  if (pid_ < 0) throw EvaluationError("-", std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", options_.command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid_, pid_);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

void ExternalTrainer::handshake() {
  send_line(make_hello_record().dump(), "-");
  const std::string line = read_line("-");
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed handshake: ") + e.what());
  }
  if (!reply.is_object() || reply.value("type", "") != "hello") {
    throw ProtocolError("handshake reply is not a hello record");
  }
  if (!reply.contains("protocol") || reply["protocol"] != kProtocolVersion) {
    throw ProtocolError("trainer speaks an unsupported protocol version");
  }
}

void ExternalTrainer::reap(bool force) {
  if (pid_ <= 0) return;
  // The shell may fork the trainer, so the whole group goes.
  if (force) ::kill(-pid_, SIGKILL);
  int status = 0;
  if (::waitpid(pid_, &status, 0) == pid_) {
    exit_status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }
  pid_ = -1;
}

void ExternalTrainer::fail(const std::string& genome, const std::string& what) {
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  reap(true);
  throw EvaluationError(genome, what);
}

void ExternalTrainer::send_line(const std::string& line, const std::string& genome) {
  if (to_child_ < 0) throw EvaluationError(genome, "trainer is not running");
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(genome, std::string("write to trainer failed: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::string ExternalTrainer::read_line(const std::string& genome) {
  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(options_.timeout_seconds));
  while (true) {
    if (const std::size_t nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (from_child_ < 0) throw EvaluationError(genome, "trainer is not running");
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) {
      fail(genome, "trainer timed out after " + std::to_string(options_.timeout_seconds) + " s");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(
                                           remaining.count(), 1'000'000'000LL)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(genome, std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(genome, std::string("read from trainer failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (to_child_ >= 0) ::close(to_child_);
      to_child_ = -1;
      reap(false);
      throw EvaluationError(genome, "trainer exited with status " + std::to_string(exit_status_));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

TrainResult ExternalTrainer::train(const EvalRequest& request) {
  const std::string genome = request.id.hex();
  const std::string line = make_request_record(request).dump();
  for (int attempt = 0;; ++attempt) {
    send_line(line, genome);
    const std::string reply = read_line(genome);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(reply);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("malformed response: ") + e.what());
    }
    const bool id_mismatch = record.is_object() && record.contains("id") &&
                             record["id"].is_string() && record["id"] != genome;
    if (id_mismatch && attempt == 0) {
      log(LogLevel::kWarning, "trainer answered id " + record["id"].get<std::string>() +
                                  " for request " + genome + "; retrying once");
      continue;
    }
    return parse_response_record(record, request);
  }
}

}  // namespace mfnas
