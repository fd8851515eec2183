// Subprocess side of the external measurement protocol: environment in,
// last stdout line out.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <vector>

#include "cpi/format.h"
#include "cpi/psi_backend.h"

extern char** environ;

namespace cpi {

namespace {

constexpr char kLatencyVar[] = "CPI_LATENCY_MS";
constexpr char kBandwidthVar[] = "CPI_BANDWIDTH_KBPS";
// Keep at most this much stderr for diagnostics.
constexpr size_t kMaxStderrBytes = 16 * 1024;

class Pipe {
 public:
  Pipe() {
    if (pipe2(fds_, O_CLOEXEC) != 0)
      throw CommandFailure(std::string("pipe failed: ") + std::strerror(errno),
                           "");
  }
  ~Pipe() {
    CloseRead();
    CloseWrite();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_fd() const { return fds_[0]; }
  int write_fd() const { return fds_[1]; }
  void CloseRead() { Close(fds_[0]); }
  void CloseWrite() { Close(fds_[1]); }

 private:
  static void Close(int& fd) {
    if (fd >= 0)
      close(fd);
    fd = -1;
  }
  int fds_[2] = {-1, -1};
};

// Environment for the child: ours, with the two point variables replaced.
std::vector<std::string> ChildEnvironment(const NetPoint& point) {
  std::vector<std::string> env;
  const std::string lat_prefix = std::string(kLatencyVar) + "=";
  const std::string bw_prefix = std::string(kBandwidthVar) + "=";
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (entry.starts_with(lat_prefix) || entry.starts_with(bw_prefix))
      continue;
    env.emplace_back(entry);
  }
  env.push_back(lat_prefix + FormatDouble(point.latency_ms));
  env.push_back(bw_prefix + FormatDouble(point.bandwidth_kbps));
  return env;
}

std::string LastLine(std::string_view text) {
  text = TrimWhitespace(text);
  const size_t nl = text.find_last_of('\n');
  if (nl != std::string_view::npos)
    text.remove_prefix(nl + 1);
  return std::string(TrimWhitespace(text));
}

}  // namespace

double InvokeExternal(const NetPoint& point,
                      const std::string& command_template,
                      std::chrono::duration<double> timeout) {
  if (command_template.empty())
    throw InvalidArgument("external command is empty");

  std::vector<std::string> env_strings = ChildEnvironment(point);
  std::vector<char*> envp;
  for (std::string& s : env_strings)
    envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string shell = "/bin/sh";
  std::string dash_c = "-c";
  std::string command = command_template;
  char* argv[] = {shell.data(), dash_c.data(), command.data(), nullptr};

  Pipe out;
  Pipe err;
  const pid_t pid = fork();
  if (pid < 0)
    throw CommandFailure(std::string("fork failed: ") + std::strerror(errno),
                         "");
  if (pid == 0) {
    // Own process group so a timeout can take down the whole pipeline.
    setpgid(0, 0);
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0)
      dup2(devnull, STDIN_FILENO);
    dup2(out.write_fd(), STDOUT_FILENO);
    dup2(err.write_fd(), STDERR_FILENO);
    execve(argv[0], argv, envp.data());
    _exit(127);
  }
  setpgid(pid, pid);
  out.CloseWrite();
  err.CloseWrite();

  std::string stdout_text;
  std::string stderr_text;
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
  bool out_open = true;
  bool err_open = true;
  bool timed_out = false;
  char buf[4096];
  while (out_open || err_open) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd fds[2] = {{out_open ? out.read_fd() : -1, POLLIN, 0},
                     {err_open ? err.read_fd() : -1, POLLIN, 0}};
    const int ready = poll(fds, 2, static_cast<int>(std::min<long long>(
                                       left.count() + 1, 1000 * 60)));
    if (ready < 0) {
      if (errno == EINTR)
        continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || fds[i].revents == 0)
        continue;
      const ssize_t n = read(fds[i].fd, buf, sizeof(buf));
      if (n > 0) {
        if (i == 0)
          stdout_text.append(buf, static_cast<size_t>(n));
        else if (stderr_text.size() < kMaxStderrBytes)
          stderr_text.append(buf, static_cast<size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        (i == 0 ? out_open : err_open) = false;
      }
    }
  }

  int status = 0;
  bool reaped = false;
  // The command may close its output and keep running.
  while (!timed_out) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid || (r < 0 && errno != EINTR)) {
      reaped = true;
      break;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      timed_out = true;
      break;
    }
    usleep(1000);
  }
  if (timed_out)
    kill(-pid, SIGKILL);
  while (!reaped && waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  stderr_text = std::string(TrimWhitespace(stderr_text));

  const std::string what = "external command at " + ToString(point);
  if (timed_out) {
    throw CommandFailure(what + " timed out after " +
                             FormatDouble(timeout.count()) + " s",
                         stderr_text);
  }
  if (WIFSIGNALED(status)) {
    throw CommandFailure(
        what + " killed by signal " + std::to_string(WTERMSIG(status)),
        stderr_text);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw CommandFailure(
        what + " exited with status " + std::to_string(WEXITSTATUS(status)),
        stderr_text);
  }
  const std::string last = LastLine(stdout_text);
  const auto psi = ParseDouble(last);
  if (!psi || *psi <= 0.0) {
    throw CommandFailure(what + " printed '" + last +
                             "', which is not a positive PSI value",
                         stderr_text);
  }
  return *psi;
}

}  // namespace cpi
