#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "helix/tasks.hpp"

namespace helix {

namespace {

struct Pipe {
  int read_end = -1;
  int write_end = -1;

  Pipe() {
    int fds[2];
    if (pipe(fds) != 0) throw SpawnFailureError(std::string("pipe: ") + std::strerror(errno));
    read_end = fds[0];
    write_end = fds[1];
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  void close_read() {
    if (read_end >= 0) ::close(read_end);
    read_end = -1;
  }
  void close_write() {
    if (write_end >= 0) ::close(write_end);
    write_end = -1;
  }
};

void ignore_sigpipe_once() {
  // A dying child must surface as a short write, not a process-killing signal.
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

// Scans stdout bottom-up for the last line carrying a score, accepting either
// a JSON object with a "reward" key or a bare "reward: <number>" line.
bool parse_reward_line(const std::string& stdout_text, EvalResult* out) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= stdout_text.size()) {
    const std::size_t end = stdout_text.find('\n', start);
    if (end == std::string::npos) {
      lines.push_back(stdout_text.substr(start));
      break;
    }
    lines.push_back(stdout_text.substr(start, end - start));
    start = end + 1;
  }

  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    const std::string& line = *it;
    if (line.find("reward") == std::string::npos) continue;

    const auto parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_object() && parsed.contains("reward") && parsed["reward"].is_number()) {
      out->reward = parsed["reward"].get<double>();
      const auto valid = parsed.find("valid");
      out->valid = valid == parsed.end() || !valid->is_boolean() || valid->get<bool>();
      const auto feedback = parsed.find("feedback");
      if (feedback != parsed.end()) {
        out->feedback = feedback->is_string() ? feedback->get<std::string>() : feedback->dump();
      }
      return true;
    }

    const std::size_t colon = line.find(':');
    if (colon != std::string::npos && line.substr(0, colon).find("reward") != std::string::npos) {
      char* end_ptr = nullptr;
      const std::string rest = line.substr(colon + 1);
      const double value = std::strtod(rest.c_str(), &end_ptr);
      if (end_ptr != rest.c_str() && std::isfinite(value)) {
        out->reward = value;
        out->valid = true;
        return true;
      }
    }
  }
  return false;
}

}  // namespace

EvalResult external_evaluate(const std::vector<std::string>& command, const std::string& content,
                             double time_limit_seconds) {
  if (command.empty()) throw SpawnFailureError("empty evaluator command");
  ignore_sigpipe_once();

  // The wire format is one JSON line, so multi-line content survives intact.
  const std::string payload = nlohmann::json{{"content", content}}.dump() + "\n";

  const auto start = std::chrono::steady_clock::now();

  Pipe to_child;
  Pipe from_child;
  Pipe err_child;
  Pipe exec_status;  // stays empty on successful exec thanks to CLOEXEC

  if (fcntl(exec_status.write_end, F_SETFD, FD_CLOEXEC) != 0) {
    throw SpawnFailureError(std::string("fcntl: ") + std::strerror(errno));
  }

  const pid_t pid = fork();
  if (pid < 0) throw SpawnFailureError(std::string("fork: ") + std::strerror(errno));

  if (pid == 0) {
    dup2(to_child.read_end, STDIN_FILENO);
    dup2(from_child.write_end, STDOUT_FILENO);
    dup2(err_child.write_end, STDERR_FILENO);
    to_child.close_read();
    to_child.close_write();
    from_child.close_read();
    from_child.close_write();
    err_child.close_read();
    err_child.close_write();
    exec_status.close_read();

    std::vector<char*> argv;
    argv.reserve(command.size() + 1);
    for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());

    const int err = errno;
    (void)!write(exec_status.write_end, &err, sizeof(err));
    _exit(127);
  }

  to_child.close_read();
  from_child.close_write();
  err_child.close_write();
  exec_status.close_write();

  // Non-blocking ends so one poll loop can interleave writing stdin with
  // draining both output streams.
  for (int fd : {to_child.write_end, from_child.read_end, err_child.read_end}) {
    fcntl(fd, F_SETFL, O_NONBLOCK);
  }

  std::string child_stdout, child_stderr;
  std::size_t written = 0;
  bool timed_out = false;

  const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                    std::chrono::duration<double>(time_limit_seconds));

  while (true) {
    std::vector<pollfd> fds;
    if (to_child.write_end >= 0 && written < payload.size()) {
      fds.push_back({to_child.write_end, POLLOUT, 0});
    } else if (to_child.write_end >= 0) {
      to_child.close_write();  // signal EOF once the payload is delivered
    }
    if (from_child.read_end >= 0) fds.push_back({from_child.read_end, POLLIN, 0});
    if (err_child.read_end >= 0) fds.push_back({err_child.read_end, POLLIN, 0});
    if (fds.empty()) break;

    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    const int wait_ms = static_cast<int>(std::min<std::int64_t>(
        1000, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1));

    const int ready = poll(fds.data(), fds.size(), wait_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;

    char buf[4096];
    for (const pollfd& p : fds) {
      if (p.fd == to_child.write_end && (p.revents & (POLLOUT | POLLERR))) {
        const ssize_t n = write(p.fd, payload.data() + written, payload.size() - written);
        if (n > 0) {
          written += static_cast<std::size_t>(n);
        } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          to_child.close_write();  // child closed stdin early; EOF is fine
        }
      }
      if (p.fd == from_child.read_end && (p.revents & (POLLIN | POLLHUP | POLLERR))) {
        const ssize_t n = read(p.fd, buf, sizeof(buf));
        if (n > 0) {
          child_stdout.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) {
          from_child.close_read();
        }
      }
      if (p.fd == err_child.read_end && (p.revents & (POLLIN | POLLHUP | POLLERR))) {
        const ssize_t n = read(p.fd, buf, sizeof(buf));
        if (n > 0) {
          child_stderr.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) {
          err_child.close_read();
        }
      }
    }
  }

  int status = 0;
  if (timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, &status, 0);
    EvalResult out;
    out.feedback = "evaluator timed out after " + std::to_string(time_limit_seconds) + "s";
    out.wall_time_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    return out;
  }
  waitpid(pid, &status, 0);

  int exec_errno = 0;
  if (read(exec_status.read_end, &exec_errno, sizeof(exec_errno)) == sizeof(exec_errno)) {
    throw SpawnFailureError("could not launch '" + command[0] +
                            "': " + std::strerror(exec_errno));
  }

  EvalResult out;
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string reason = WIFSIGNALED(status)
                                   ? "killed by signal " + std::to_string(WTERMSIG(status))
                                   : "exit code " + std::to_string(WEXITSTATUS(status));
    out.feedback = "evaluator failed (" + reason + ")" +
                   (child_stderr.empty() ? "" : ": " + child_stderr);
    return out;
  }

  if (!parse_reward_line(child_stdout, &out)) {
    out.feedback = "evaluator produced no reward line" +
                   (child_stderr.empty() ? "" : "; stderr: " + child_stderr);
    return out;
  }

  // Invalid results never carry reward; rewards never go negative.
  if (!out.valid) out.reward = 0.0;
  if (!std::isfinite(out.reward)) {
    out.valid = false;
    out.reward = 0.0;
    out.feedback = "evaluator reported a non-finite reward";
    return out;
  }
  out.reward = std::max(0.0, out.reward);
  return out;
}

}  // namespace helix
