#include "facetag/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_map>

#include "facetag/error.hpp"

extern char** environ;

namespace facetag {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept {
    reset(other.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }
  void reset(int fd = -1) noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

 private:
  int fd_ = -1;
};

// Blocks SIGPIPE on the calling thread so writes to a dead adapter surface as
// EPIPE; any pending SIGPIPE is discarded before the mask is restored.
class SigpipeGuard {
 public:
  SigpipeGuard() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &set, &old_);
  }
  ~SigpipeGuard() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGPIPE);
    timespec zero{0, 0};
    while (sigtimedwait(&set, nullptr, &zero) > 0) {
    }
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t old_;
};

class Child {
 public:
  Child(const std::vector<std::string>& argv, bool pipe_stdin, bool pipe_stdout) {
    if (argv.empty()) fail(ErrorCode::InvalidArgument, "external predictor: empty command");
    int in_pipe[2] = {-1, -1};
    int out_pipe[2] = {-1, -1};
    if (pipe_stdin && ::pipe2(in_pipe, O_CLOEXEC) != 0) {
      fail(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
    }
    if (pipe_stdout && ::pipe2(out_pipe, O_CLOEXEC) != 0) {
      fail(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    if (pipe_stdin) posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    if (pipe_stdout) posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const int rc = posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);

    if (pipe_stdin) {
      ::close(in_pipe[0]);
      stdin_.reset(in_pipe[1]);
    }
    if (pipe_stdout) {
      ::close(out_pipe[1]);
      stdout_.reset(out_pipe[0]);
    }
    if (rc != 0) {
      pid_ = -1;
      fail(ErrorCode::Io, "cannot start '" + argv[0] + "': " + std::strerror(rc));
    }
  }

  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  ~Child() {
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  Fd& in() { return stdin_; }
  Fd& out() { return stdout_; }

  // Returns the exit status once the child is gone; -1 on a signal.
  int wait() {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
  }

  // Polls for exit with a deadline; returns nullopt when still running.
  std::optional<int> wait_for(std::chrono::milliseconds limit) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    for (;;) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      }
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      ::usleep(2000);
    }
  }

 private:
  pid_t pid_ = -1;
  Fd stdin_;
  Fd stdout_;
};

void check_unique_request_ids(const std::vector<ExternalRequest>& requests) {
  std::set<std::string_view> ids;
  for (const auto& r : requests) {
    if (!ids.insert(r.id).second) {
      fail(ErrorCode::InvalidArgument, "duplicate request id '" + r.id + "'");
    }
  }
}

void check_exit(int status, const std::string& program) {
  if (status != 0) {
    fail(ErrorCode::Protocol, "external predictor '" + program + "' exited with status " +
                                  std::to_string(status));
  }
}

class ResponseCollector {
 public:
  explicit ResponseCollector(const std::vector<ExternalRequest>& requests) {
    for (std::size_t i = 0; i < requests.size(); ++i) slot_.emplace(requests[i].id, i);
    outputs_.resize(requests.size());
    seen_.assign(requests.size(), false);
  }

  void accept(const std::string& line, std::size_t lineno) {
    if (line.empty()) return;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::Protocol, "response line " + std::to_string(lineno) + ": not valid JSON");
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("output") ||
        !j["output"].is_string()) {
      fail(ErrorCode::Protocol, "response line " + std::to_string(lineno) +
                                    ": expected {\"id\": string, \"output\": string}");
    }
    const auto id = j["id"].get<std::string>();
    auto it = slot_.find(id);
    if (it == slot_.end()) fail(ErrorCode::Protocol, "response for unknown id '" + id + "'");
    if (seen_[it->second]) fail(ErrorCode::Protocol, "duplicate response for id '" + id + "'");
    seen_[it->second] = true;
    outputs_[it->second] = j["output"].get<std::string>();
    ++received_;
  }

  std::size_t received() const noexcept { return received_; }

  std::vector<RawPrediction> finish(const std::vector<ExternalRequest>& requests) const {
    std::vector<RawPrediction> out;
    out.reserve(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (!seen_[i]) fail(ErrorCode::MissingResponse, "MissingResponse(\"" + requests[i].id + "\")");
      out.push_back(RawPrediction{requests[i].id, outputs_[i]});
    }
    return out;
  }

 private:
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<std::string> outputs_;
  std::vector<bool> seen_;
  std::size_t received_ = 0;
};

std::vector<RawPrediction> run_subprocess(const std::vector<ExternalRequest>& requests,
                                          const ExternalPredictorConfig& config) {
  SigpipeGuard sigpipe;
  Child child(config.command, true, true);
  ::fcntl(child.in().get(), F_SETFL, O_NONBLOCK);
  ::fcntl(child.out().get(), F_SETFL, O_NONBLOCK);

  ResponseCollector collector(requests);
  std::size_t next = 0;
  std::string pending;
  std::size_t pending_off = 0;
  std::string partial;
  std::size_t lineno = 0;
  bool stdout_open = true;

  if (requests.empty()) child.in().reset();

  while (stdout_open) {
    // Refill the write buffer while the in-flight window allows.
    if (child.in().get() >= 0 && pending_off == pending.size()) {
      pending.clear();
      pending_off = 0;
      while (next < requests.size() &&
             (config.window == 0 || next - collector.received() < config.window)) {
        pending += encode_request(requests[next++]);
        if (pending.size() > (1u << 16)) break;
      }
      if (pending.empty() && next == requests.size()) child.in().reset();
    }

    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = pollfd{child.out().get(), POLLIN, 0};
    const bool want_write = child.in().get() >= 0 && pending_off < pending.size();
    if (want_write) fds[nfds++] = pollfd{child.in().get(), POLLOUT, 0};

    const int ready = ::poll(fds, nfds, config.timeout_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) {
      fail(ErrorCode::Timeout, "external predictor silent for " +
                                   std::to_string(config.timeout_ms) + " ms (" +
                                   std::to_string(collector.received()) + "/" +
                                   std::to_string(requests.size()) + " responses)");
    }

    if (want_write && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::write(child.in().get(), pending.data() + pending_off,
                                pending.size() - pending_off);
      if (n > 0) {
        pending_off += static_cast<std::size_t>(n);
      } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
        // Adapter stopped reading; whatever it already answered is still collected.
        child.in().reset();
        pending.clear();
        pending_off = 0;
        next = requests.size();
      }
    }

    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t n = ::read(child.out().get(), buf, sizeof buf);
      if (n > 0) {
        partial.append(buf, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (std::size_t pos; (pos = partial.find('\n', start)) != std::string::npos;
             start = pos + 1) {
          std::string line = partial.substr(start, pos - start);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          collector.accept(line, ++lineno);
        }
        partial.erase(0, start);
      } else if (n == 0) {
        stdout_open = false;
      } else if (errno != EAGAIN && errno != EINTR) {
        fail(ErrorCode::Io, std::string("read: ") + std::strerror(errno));
      }
    }
  }
  if (!partial.empty()) collector.accept(partial, ++lineno);

  child.in().reset();
  const auto status = child.wait_for(std::chrono::milliseconds(config.timeout_ms));
  if (!status) fail(ErrorCode::Timeout, "external predictor did not exit after closing output");
  check_exit(*status, config.command.front());
  return collector.finish(requests);
}

std::vector<RawPrediction> run_files(const std::vector<ExternalRequest>& requests,
                                     const ExternalPredictorConfig& config) {
  if (config.requests_path.empty() || config.responses_path.empty()) {
    fail(ErrorCode::InvalidArgument, "file mode needs requests and responses paths");
  }
  {
    std::ofstream out(config.requests_path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write '" + config.requests_path + "'");
    for (const auto& r : requests) out << encode_request(r);
    if (!out) fail(ErrorCode::Io, "write failed for '" + config.requests_path + "'");
  }
  if (!config.command.empty()) {
    Child child(config.command, false, false);
    const auto status = child.wait_for(std::chrono::milliseconds(config.timeout_ms));
    if (!status) {
      fail(ErrorCode::Timeout, "external predictor exceeded " + std::to_string(config.timeout_ms) +
                                   " ms");
    }
    check_exit(*status, config.command.front());
  }
  std::ifstream in(config.responses_path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open responses '" + config.responses_path + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return match_responses(requests, lines);
}

}  // namespace

ExternalPredictorConfig ExternalPredictorConfig::from_json(const Json& j) {
  ExternalPredictorConfig c;
  try {
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "subprocess") {
        c.mode = Mode::Subprocess;
      } else if (mode == "files") {
        c.mode = Mode::Files;
      } else {
        fail(ErrorCode::Validation, "external predictor: unknown mode '" + mode + "'");
      }
    }
    if (j.contains("command")) c.command = j.at("command").get<std::vector<std::string>>();
    if (j.contains("requests")) c.requests_path = j.at("requests").get<std::string>();
    if (j.contains("responses")) c.responses_path = j.at("responses").get<std::string>();
    if (j.contains("timeout_ms")) c.timeout_ms = j.at("timeout_ms").get<int>();
    if (j.contains("window")) c.window = j.at("window").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("external predictor config: ") + e.what());
  }
  if (c.timeout_ms <= 0) fail(ErrorCode::Validation, "external predictor: timeout_ms must be > 0");
  return c;
}

Json ExternalPredictorConfig::to_json() const {
  Json j;
  j["mode"] = mode == Mode::Subprocess ? "subprocess" : "files";
  j["command"] = command;
  j["requests"] = requests_path;
  j["responses"] = responses_path;
  j["timeout_ms"] = timeout_ms;
  j["window"] = window;
  return j;
}

std::string encode_request(const ExternalRequest& request) {
  Json j;
  j["id"] = request.id;
  j["task"] = request.task;
  j["input"] = request.input;
  return dump_line(j) + '\n';
}

std::vector<RawPrediction> match_responses(const std::vector<ExternalRequest>& requests,
                                           const std::vector<std::string>& response_lines) {
  check_unique_request_ids(requests);
  ResponseCollector collector(requests);
  std::size_t lineno = 0;
  for (const auto& line : response_lines) collector.accept(line, ++lineno);
  return collector.finish(requests);
}

std::vector<RawPrediction> run_external(const std::vector<ExternalRequest>& requests,
                                        const ExternalPredictorConfig& config) {
  check_unique_request_ids(requests);
  if (config.mode == ExternalPredictorConfig::Mode::Files) return run_files(requests, config);
  return run_subprocess(requests, config);
}

}  // namespace facetag
