// Scriptable evaluator used by the adapter and pipeline tests. Speaks the
// line-delimited JSON protocol on stdin/stdout.
//
//   --function sum|ishigami      numeric-mode response y
//   --probs a,b,...              fixed image-mode probabilities
//   --image-mean                 image mode: p1 = logistic(4 (2 m - 1)), m = mean intensity / 255
//   --batch-ms N                 hold requests until stdin is quiet for N ms, then answer all
//   --reverse                    answer each batch in reverse order
//   --fault KIND                 badsum | malformed | exit-after:K | hang | error-at:K | duplicate | unknown-id
//   --inflight-log PATH          write the largest number of unanswered requests seen
//   --require-mode M             exit 4 unless GPC_SENSE_MODE == M

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpcsense/benchmarks.hpp"
#include "gpcsense/perturb.hpp"
#include "gpcsense/surrogate.hpp"

using nlohmann::json;

namespace {

struct Options {
  std::string function = "sum";
  std::vector<double> probs{1.0, 0.0};
  bool image_mean = false;
  int batch_ms = 0;
  bool reverse = false;
  std::string fault = "none";
  std::string inflight_log;
  std::string require_mode;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(std::stod(item));
  return out;
}

long fault_arg(const std::string& fault, const std::string& prefix) {
  if (fault.rfind(prefix, 0) != 0) return -1;
  return std::stol(fault.substr(prefix.size()));
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
    if (arg == "--function") opt.function = next();
    else if (arg == "--probs") opt.probs = parse_list(next());
    else if (arg == "--image-mean") opt.image_mean = true;
    else if (arg == "--batch-ms") opt.batch_ms = std::stoi(next());
    else if (arg == "--reverse") opt.reverse = true;
    else if (arg == "--fault") opt.fault = next();
    else if (arg == "--inflight-log") opt.inflight_log = next();
    else if (arg == "--require-mode") opt.require_mode = next();
  }
  const char* mode_env = std::getenv("GPC_SENSE_MODE");
  const std::string mode = mode_env ? mode_env : "";
  if (!opt.require_mode.empty() && mode != opt.require_mode) return 4;

  std::vector<json> pending;
  std::size_t max_pending = 0;
  long answered = 0;
  std::string buffer;

  auto respond = [&]() {
    if (opt.reverse) std::reverse(pending.begin(), pending.end());
    for (const auto& request : pending) {
      const auto id = request.at("id").get<long>();
      if (answered == fault_arg(opt.fault, "exit-after:")) std::_Exit(0);
      if (opt.fault == "hang") {
        pause();
      }
      json response = {{"id", id}};
      if (id == fault_arg(opt.fault, "error-at:")) {
        response["error"] = "injected failure";
      } else if (request.contains("xi")) {
        const auto xi = request.at("xi").get<std::vector<double>>();
        double y = 0.0;
        if (opt.function == "ishigami") {
          y = gpcsense::benchmarks::ishigami(xi);
        } else {
          for (double v : xi) y += v;
        }
        response["y"] = y;
      } else {
        std::vector<double> probs = opt.probs;
        if (opt.image_mean) {
          const auto img = gpcsense::read_png(request.at("path").get<std::string>());
          double sum = 0.0;
          for (auto v : img.pixels) sum += v;
          const double m = sum / (255.0 * static_cast<double>(img.pixels.size()));
          const double p1 = gpcsense::logistic(4.0 * (2.0 * m - 1.0));
          probs = {1.0 - p1, p1};
        }
        if (opt.fault == "badsum") {
          for (auto& p : probs) p *= 0.8;
        }
        response["probs"] = probs;
      }
      if (opt.fault == "malformed" && answered == 1) {
        std::cout << "{\"id\": " << id << ", \"probs\": [0.5, 0.5]} trailing\n";
      } else if (opt.fault == "unknown-id") {
        response["id"] = id + 100000;
        std::cout << response.dump() << '\n';
      } else {
        std::cout << response.dump() << '\n';
        if (opt.fault == "duplicate") std::cout << response.dump() << '\n';
      }
      ++answered;
    }
    std::cout.flush();
    pending.clear();
  };

  char chunk[4096];
  while (true) {
    pollfd pfd{STDIN_FILENO, POLLIN, 0};
    const int timeout = (!pending.empty() && opt.batch_ms > 0) ? opt.batch_ms : -1;
    const int ready = poll(&pfd, 1, timeout);
    if (ready == 0) {
      respond();
      continue;
    }
    const ssize_t n = read(STDIN_FILENO, chunk, sizeof chunk);
    if (n <= 0) {
      respond();
      return 0;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t end; (end = buffer.find('\n', start)) != std::string::npos; start = end + 1) {
      pending.push_back(json::parse(buffer.substr(start, end - start)));
    }
    buffer.erase(0, start);
    max_pending = std::max(max_pending, pending.size());
    if (!opt.inflight_log.empty()) std::ofstream(opt.inflight_log) << max_pending << '\n';
    if (opt.batch_ms == 0) respond();
  }
}
