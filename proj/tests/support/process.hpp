#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqs::test_support {

struct RunResult {
  int code = -1;  // exit status, or 128 + signal
  std::string out;
  std::string err;
};

namespace detail {

inline std::vector<char*> argv_of(const std::string& exe, std::vector<std::string>& args) {
  args.insert(args.begin(), exe);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return argv;
}

inline int exit_code(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

inline std::string slurp_fd(int fd) {
  std::string s;
  char buf[4096];
  lseek(fd, 0, SEEK_SET);
  for (ssize_t n; (n = read(fd, buf, sizeof buf)) > 0;) s.append(buf, static_cast<std::size_t>(n));
  return s;
}

inline int temp_fd() {
  char name[] = "/tmp/aqs-out-XXXXXX";
  const int fd = mkstemp(name);
  if (fd < 0) throw std::runtime_error("mkstemp failed");
  unlink(name);
  return fd;
}

}  // namespace detail

// Runs `exe args...` to completion with stdout and stderr captured.
inline RunResult run_process(const std::string& exe, std::vector<std::string> args) {
  const int out_fd = detail::temp_fd(), err_fd = detail::temp_fd();
  auto argv = detail::argv_of(exe, args);
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    dup2(out_fd, 1);
    dup2(err_fd, 2);
    execv(exe.c_str(), argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  RunResult r{detail::exit_code(status), detail::slurp_fd(out_fd), detail::slurp_fd(err_fd)};
  close(out_fd);
  close(err_fd);
  return r;
}

// A long-running child whose stdout is read incrementally; killed on scope exit.
class ChildProcess {
 public:
  ChildProcess(const std::string& exe, std::vector<std::string> args) {
    int fds[2];
    if (pipe(fds) != 0) throw std::runtime_error("pipe failed");
    auto argv = detail::argv_of(exe, args);
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      close(fds[0]);
      dup2(fds[1], 1);
      const int devnull = open("/dev/null", O_WRONLY);
      dup2(devnull, 2);
      execv(exe.c_str(), argv.data());
      _exit(127);
    }
    close(fds[1]);
    out_ = fds[0];
  }
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess() {
    if (pid_ > 0) terminate();
    if (out_ >= 0) close(out_);
  }

  // Reads stdout until `done(text so far)` holds or the stream ends.
  template <typename Pred>
  std::string read_until(Pred done) {
    char c;
    while (!done(buffer_) && read(out_, &c, 1) == 1) buffer_.push_back(c);
    return buffer_;
  }

  // SIGTERM, then the exit code.
  int terminate() {
    if (pid_ <= 0) return -1;
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return detail::exit_code(status);
  }

 private:
  pid_t pid_ = -1;
  int out_ = -1;
  std::string buffer_;
};

}  // namespace aqs::test_support
