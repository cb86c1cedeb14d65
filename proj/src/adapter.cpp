#include "gpcsense/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include <json.hpp>

#include "gpcsense/error.hpp"

extern char** environ;

namespace gpcsense {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string to_string(EvalMode mode) { return mode == EvalMode::image ? "image" : "numeric"; }

EvalMode eval_mode_from_string(const std::string& text) {
  if (text == "numeric") return EvalMode::numeric;
  if (text == "image") return EvalMode::image;
  throw ValidationError("unknown evaluation mode '" + text + "'");
}

void validate(const EvaluatorConfig& cfg) {
  if (cfg.command.empty() || cfg.command.front().empty()) throw ValidationError("evaluator command is empty");
  if (cfg.timeout.count() <= 0) throw ValidationError("evaluator timeout must be positive");
  if (cfg.max_inflight < 1) throw ValidationError("max_inflight must be at least 1");
  if (cfg.mode == EvalMode::image && cfg.n_classes < 1) throw ValidationError("n_classes must be positive");
}

namespace {

/// Owns a child process and the two pipe ends connected to its stdin/stdout.
class ChildProcess {
 public:
  ChildProcess(const std::vector<std::string>& argv, const std::string& mode) {
    int in_pipe[2];
    int out_pipe[2];
    int exec_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(exec_pipe, O_CLOEXEC) != 0) {
      throw EvaluatorError(std::string("pipe: ") + std::strerror(errno), std::nullopt);
    }

    std::vector<std::string> env_storage;
    for (char** e = environ; *e; ++e) {
      if (std::strncmp(*e, "GPC_SENSE_MODE=", 15) != 0) env_storage.emplace_back(*e);
    }
    env_storage.push_back("GPC_SENSE_MODE=" + mode);
    std::vector<char*> envp;
    for (auto& s : env_storage) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::vector<std::string> args = argv;
    std::vector<char*> argp;
    for (auto& s : args) argp.push_back(s.data());
    argp.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw EvaluatorError(std::string("fork: ") + std::strerror(errno), std::nullopt);
    if (pid_ == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      execvpe(argp[0], argp.data(), envp.data());
      const int err = errno;
      [[maybe_unused]] auto n = write(exec_pipe[1], &err, sizeof err);
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(exec_pipe[1]);
    write_fd_ = in_pipe[1];
    read_fd_ = out_pipe[0];

    int err = 0;
    ssize_t got;
    do {
      got = read(exec_pipe[0], &err, sizeof err);
    } while (got < 0 && errno == EINTR);
    close(exec_pipe[0]);
    if (got == static_cast<ssize_t>(sizeof err)) {
      reap(true);
      throw EvaluatorError("cannot start evaluator '" + argv.front() + "': " + std::strerror(err), std::nullopt);
    }
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() { reap(true); }

  int read_fd() const { return read_fd_; }

  /// Returns false when the child no longer accepts input.
  bool write_all(const std::string& data) {
    std::size_t offset = 0;
    while (offset < data.size()) {
      const ssize_t n = write(write_fd_, data.data() + offset, data.size() - offset);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      offset += static_cast<std::size_t>(n);
    }
    return true;
  }

  /// Closes the child's input and waits up to `grace` for it to exit.
  void finish(std::chrono::milliseconds grace) {
    close_fd(write_fd_);
    const auto deadline = Clock::now() + grace;
    while (pid_ > 0) {
      int status = 0;
      const pid_t r = waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || (r < 0 && errno != EINTR)) {
        pid_ = -1;
        break;
      }
      if (Clock::now() >= deadline) break;
      usleep(2000);
    }
    reap(true);
  }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) close(fd);
    fd = -1;
  }

  void reap(bool force) {
    close_fd(write_fd_);
    close_fd(read_fd_);
    if (pid_ > 0) {
      if (force) kill(pid_, SIGKILL);
      int status = 0;
      while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
      pid_ = -1;
    }
  }

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
};

/// Restores the previous SIGPIPE disposition on scope exit.
class IgnoreSigpipe {
 public:
  IgnoreSigpipe() {
    struct sigaction ignore {};
    ignore.sa_handler = SIG_IGN;
    sigemptyset(&ignore.sa_mask);
    sigaction(SIGPIPE, &ignore, &previous_);
  }
  ~IgnoreSigpipe() { sigaction(SIGPIPE, &previous_, nullptr); }

 private:
  struct sigaction previous_ {};
};

std::string request_line(const EvaluatorConfig& cfg, const EvalRequest& request) {
  json j = {{"id", request.index}};
  if (cfg.mode == EvalMode::numeric) {
    j["xi"] = request.xi;
  } else {
    j["path"] = request.path;
  }
  return j.dump() + '\n';
}

constexpr double kProbSumTolerance = 1e-6;

void decode_payload(const EvaluatorConfig& cfg, const json& response, EvalRecord& record) {
  const std::size_t index = record.index;
  if (cfg.mode == EvalMode::numeric) {
    const auto it = response.find("y");
    if (it == response.end() || !it->is_number()) throw EvaluatorError("response lacks a numeric 'y'", index);
    const double y = it->get<double>();
    if (!std::isfinite(y)) throw EvaluatorError("response 'y' is not finite", index);
    record.y = y;
    return;
  }
  const auto it = response.find("probs");
  if (it == response.end() || !it->is_array()) throw EvaluatorError("response lacks a 'probs' array", index);
  if (it->size() != cfg.n_classes) {
    throw EvaluatorError("response has " + std::to_string(it->size()) + " probabilities, expected " +
                             std::to_string(cfg.n_classes),
                         index);
  }
  double sum = 0.0;
  for (const auto& value : *it) {
    if (!value.is_number()) throw EvaluatorError("non-numeric probability", index);
    const double p = value.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw EvaluatorError("probability outside [0, 1]", index);
    record.probs.push_back(p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    throw EvaluatorError("probabilities sum to " + std::to_string(sum), index);
  }
}

}  // namespace

std::vector<EvalRecord> evaluate_batch(const EvaluatorConfig& cfg, std::span<const EvalRequest> requests) {
  validate(cfg);
  std::map<std::size_t, std::size_t> position_of;  // request id -> position in `requests`
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!position_of.emplace(requests[i].index, i).second) {
      throw ValidationError("duplicate request index " + std::to_string(requests[i].index));
    }
  }
  std::vector<EvalRecord> records(requests.size());
  if (requests.empty()) return records;

  IgnoreSigpipe sigpipe_guard;
  ChildProcess child(cfg.command, to_string(cfg.mode));

  std::map<std::size_t, Clock::time_point> inflight;  // id -> send time
  std::set<std::size_t> answered;
  std::size_t next = 0;
  std::string buffer;
  char chunk[4096];

  auto lowest_pending = [&]() -> std::optional<std::size_t> {
    if (!inflight.empty()) return inflight.begin()->first;
    if (next < requests.size()) return requests[next].index;
    return std::nullopt;
  };

  auto handle_line = [&](const std::string& line) {
    json response;
    try {
      response = json::parse(line);
    } catch (const json::parse_error&) {
      throw EvaluatorError("malformed response line: " + line.substr(0, 200), lowest_pending());
    }
    const auto id_it = response.is_object() ? response.find("id") : response.end();
    if (id_it == response.end() || !id_it->is_number_unsigned()) {
      throw EvaluatorError("response without a valid 'id': " + line.substr(0, 200), lowest_pending());
    }
    const std::size_t id = id_it->get<std::size_t>();
    if (answered.contains(id)) throw EvaluatorError("duplicate response id", id);
    if (!inflight.contains(id)) throw EvaluatorError("response for an id that was not requested", id);
    if (const auto err = response.find("error"); err != response.end()) {
      throw EvaluatorError("evaluator reported error: " + (err->is_string() ? err->get<std::string>() : err->dump()), id);
    }
    const EvalRequest& request = requests[position_of.at(id)];
    EvalRecord& record = records[position_of.at(id)];
    record.index = id;
    record.xi_phys = request.xi;
    decode_payload(cfg, response, record);
    inflight.erase(id);
    answered.insert(id);
  };

  while (answered.size() < requests.size()) {
    while (inflight.size() < cfg.max_inflight && next < requests.size()) {
      const EvalRequest& request = requests[next];
      if (!child.write_all(request_line(cfg, request))) {
        throw EvaluatorError("evaluator closed its input", request.index);
      }
      inflight.emplace(request.index, Clock::now());
      ++next;
    }

    auto oldest = inflight.begin();
    for (auto it = inflight.begin(); it != inflight.end(); ++it) {
      if (it->second < oldest->second) oldest = it;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(oldest->second + cfg.timeout - Clock::now());
    if (remaining.count() <= 0) throw EvaluatorError("evaluator timed out", oldest->first);

    pollfd pfd{child.read_fd(), POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count() + 1, 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw EvaluatorError(std::string("poll: ") + std::strerror(errno), lowest_pending());
    }
    if (ready == 0) continue;  // deadline re-checked above

    const ssize_t n = read(child.read_fd(), chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw EvaluatorError(std::string("read: ") + std::strerror(errno), lowest_pending());
    }
    if (n == 0) throw EvaluatorError("evaluator exited before answering every request", lowest_pending());
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t end; (end = buffer.find('\n', start)) != std::string::npos; start = end + 1) {
      std::string line = buffer.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      handle_line(line);
    }
    buffer.erase(0, start);
  }
  child.finish(std::chrono::milliseconds(2000));
  std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) { return a.index < b.index; });
  return records;
}

std::vector<EvalRecord> attach_logits(std::vector<EvalRecord> records, std::size_t target_class,
                                      const LinkSpec& link) {
  for (auto& record : records) {
    if (record.probs.empty()) throw ValidationError("record " + std::to_string(record.index) + " has no probabilities");
    if (target_class >= record.probs.size()) {
      throw ValidationError("target class " + std::to_string(target_class) + " out of range for " +
                            std::to_string(record.probs.size()) + " classes");
    }
    record.target_class = target_class;
    record.logit_value = logit(record.probs[target_class], link);
  }
  return records;
}

}  // namespace gpcsense
