#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpcsense/surrogate.hpp"

namespace gpcsense {

enum class EvalMode { numeric, image };

std::string to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& text);

/// External black-box evaluator run as a child process speaking
/// line-delimited JSON on its standard streams.
struct EvaluatorConfig {
  std::vector<std::string> command;
  EvalMode mode = EvalMode::numeric;
  std::size_t n_classes = 2;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_inflight = 8;
};

void validate(const EvaluatorConfig& cfg);

/// One model query: the perturbation values and, in image mode, the path of
/// the transformed image handed to the evaluator.
struct EvalRequest {
  std::size_t index = 0;
  std::vector<double> xi;
  std::string path;
};

struct EvalRecord {
  std::size_t index = 0;
  std::vector<double> xi_phys;
  std::vector<double> probs;
  std::optional<double> y;
  std::optional<std::size_t> target_class;
  std::optional<double> logit_value;
};

/// Sends every request to a freshly started evaluator and collects the
/// answers. Requests are pipelined with at most `max_inflight` unanswered at
/// once; responses may arrive in any order and are matched by id. The result
/// is ordered by request index. Failures throw EvaluatorError naming the
/// request index involved.
std::vector<EvalRecord> evaluate_batch(const EvaluatorConfig& cfg, std::span<const EvalRequest> requests);

/// Fills logit_value from probs[target_class] through the clamped logit.
std::vector<EvalRecord> attach_logits(std::vector<EvalRecord> records, std::size_t target_class,
                                      const LinkSpec& link);

}  // namespace gpcsense
