// Copyright 2026 The crag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <sys/types.h>
#include <sys/wait.h>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace crag::test {

// Path of the installed CLI binary, injected by the build.
inline std::string cli_binary() {
  const char* path = std::getenv("CRAG_CLI");
  if (path == nullptr || *path == '\0') {
    throw std::runtime_error("CRAG_CLI environment variable is not set");
  }
  return path;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

inline std::string shell_quote(const std::string& arg) {
  std::string quoted = "'";
  for (char c : arg) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted += c;
    }
  }
  quoted += "'";
  return quoted;
}

// Runs the CLI with the given arguments and captures combined output.
inline CommandResult run_cli(const std::vector<std::string>& args) {
  std::string command = shell_quote(cli_binary());
  for (const auto& arg : args) command += " " + shell_quote(arg);
  command += " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  CommandResult result;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, n);
  }
  int status = pclose(pipe);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

// A long-running child process (the serve subcommand), terminated
// with SIGTERM so shutdown-path behaviour is exercised for real.
class ChildProcess {
 public:
  ChildProcess(const std::string& binary, const std::vector<std::string>& args,
               const std::string& log_path) {
    // A forked copy of unflushed stdio buffers would be re-flushed by the
    // child's freopen, duplicating parent output when stdout is a pipe.
    std::fflush(stdout);
    std::fflush(stderr);
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      FILE* log = std::freopen(log_path.c_str(), "w", stdout);
      (void)log;
      FILE* err = std::freopen(log_path.c_str(), "a", stderr);
      (void)err;
      std::vector<char*> argv;
      argv.push_back(const_cast<char*>(binary.c_str()));
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(binary.c_str(), argv.data());
      std::perror("execv");
      _exit(127);
    }
  }

  ~ChildProcess() {
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  pid_t pid() const { return pid_; }

  // Sends SIGTERM and waits; returns the exit status code.
  int terminate() {
    if (pid_ <= 0) return -1;
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    pid_ = -1;
    return code;
  }

 private:
  pid_t pid_ = -1;
};

// Polls the server log for the listening announcement and returns the bound
// port. The service binds port 0, so the port is only knowable from the log.
inline int wait_for_listening_port(const std::string& log_path,
                                   std::chrono::seconds timeout = std::chrono::seconds(20)) {
  const std::string marker = "listening on 127.0.0.1:";
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    std::ifstream in(log_path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string log = buf.str();
    if (std::size_t pos = log.find(marker); pos != std::string::npos) {
      return std::stoi(log.substr(pos + marker.size()));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  throw std::runtime_error("server did not announce a listening port in " + log_path);
}

}  // namespace crag::test
