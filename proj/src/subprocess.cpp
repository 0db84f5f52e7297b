#include "depprune/subprocess.hpp"

#include "depprune/errors.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace depprune {

namespace {

std::vector<char*> to_argv(const std::vector<std::string>& argv) {
  std::vector<char*> out;
  out.reserve(argv.size() + 1);
  for (const auto& arg : argv) out.push_back(const_cast<char*>(arg.c_str()));
  out.push_back(nullptr);
  return out;
}

}  // namespace

ExecResult run_process(const std::vector<std::string>& argv,
                       const ExecOptions& options) {
  if (argv.empty()) throw SpawnFailed("empty command line");

  int out_pipe[2];
  int err_pipe[2];  // exec failure report back to the parent
  if (pipe(out_pipe) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw SpawnFailed(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<std::string> env_storage;
  std::vector<char*> envp;
  const bool restrict_env = options.env_allowlist.has_value();
  if (restrict_env) {
    for (const auto& name : *options.env_allowlist) {
      if (const char* value = std::getenv(name.c_str())) {
        env_storage.push_back(name + "=" + value);
      }
    }
    for (auto& entry : env_storage) envp.push_back(entry.data());
    envp.push_back(nullptr);
  }

  const pid_t pid = fork();
  if (pid < 0) {
    throw SpawnFailed(std::string("fork: ") + std::strerror(errno));
  }

  if (pid == 0) {
    setpgid(0, 0);
    close(out_pipe[0]);
    close(err_pipe[0]);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    close(out_pipe[1]);
    if (!options.cwd.empty() && chdir(options.cwd.c_str()) != 0) {
      const std::string msg =
          "chdir " + options.cwd.string() + ": " + std::strerror(errno);
      (void)!write(err_pipe[1], msg.data(), msg.size());
      _exit(127);
    }
    auto child_argv = to_argv(argv);
    if (restrict_env) {
      execvpe(child_argv[0], child_argv.data(), envp.data());
    } else {
      execvp(child_argv[0], child_argv.data());
    }
    const std::string msg =
        "exec " + argv[0] + ": " + std::strerror(errno);
    (void)!write(err_pipe[1], msg.data(), msg.size());
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);

  ExecResult result;
  std::string spawn_error;
  char buffer[4096];

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::seconds(options.timeout_s);
  bool out_open = true;
  bool err_open = true;
  while (out_open || err_open) {
    pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};

    int timeout_ms = -1;
    if (options.timeout_s > 0 || result.timed_out) {
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      timeout_ms = static_cast<int>(std::max<long long>(0, remaining.count()));
    }
    const int ready = poll(fds, nfds, timeout_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) {
      if (result.timed_out) break;  // drain grace expired; stop reading
      result.timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      // A process that escaped the group can keep the pipe open; allow a
      // short drain, then give up on further output.
      deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
    }
    for (nfds_t i = 0; i < nfds; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
      const ssize_t n = read(fds[i].fd, buffer, sizeof(buffer));
      if (n > 0) {
        if (fds[i].fd == out_pipe[0]) {
          result.output.append(buffer, static_cast<std::size_t>(n));
        } else {
          spawn_error.append(buffer, static_cast<std::size_t>(n));
        }
      } else {
        if (fds[i].fd == out_pipe[0]) {
          close(out_pipe[0]);
          out_open = false;
        } else {
          close(err_pipe[0]);
          err_open = false;
        }
      }
    }
  }
  if (out_open) close(out_pipe[0]);
  if (err_open) close(err_pipe[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }

  if (!spawn_error.empty()) throw SpawnFailed(spawn_error);
  return result;
}

bool command_available(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    return access(name.c_str(), X_OK) == 0;
  }
  return command_on_path(name);
}

bool command_on_path(const std::string& name) {
  const char* path_env = std::getenv("PATH");
  if (!path_env) return false;
  std::string dir;
  std::string path(path_env);
  path += ':';
  for (char c : path) {
    if (c != ':') {
      dir += c;
      continue;
    }
    if (!dir.empty()) {
      std::error_code ec;
      const auto candidate = std::filesystem::path(dir) / name;
      if (std::filesystem::exists(candidate, ec) &&
          access(candidate.c_str(), X_OK) == 0) {
        return true;
      }
    }
    dir.clear();
  }
  return false;
}

}  // namespace depprune
