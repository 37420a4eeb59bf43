#include "dyve/core.hpp"

namespace dyve {

bool trace_is_contiguous(const ReasoningTrace& trace) {
  for (int i = 0; i < trace.step_count(); ++i) {
    if (trace.steps[static_cast<size_t>(i)].index != i + 1) return false;
  }
  return true;
}

ReasoningTrace extend_state(const ReasoningTrace& prefix, Step action) {
  if (action.index != prefix.step_count() + 1) {
    throw contract_error("extend_state: step index " + std::to_string(action.index) +
                         " does not follow a " + std::to_string(prefix.step_count()) +
                         "-step prefix");
  }
  if (action.text.empty()) {
    throw contract_error("extend_state: step text is empty");
  }
  ReasoningTrace out = prefix;
  out.steps.push_back(std::move(action));
  return out;
}

ReasoningTrace trace_prefix(const ReasoningTrace& trace, int t) {
  if (t < 0 || t > trace.step_count()) {
    throw contract_error("trace_prefix: t=" + std::to_string(t) + " out of range for a " +
                         std::to_string(trace.step_count()) + "-step trace");
  }
  ReasoningTrace out;
  out.problem = trace.problem;
  out.steps.assign(trace.steps.begin(), trace.steps.begin() + t);
  return out;
}

ReasoningTrace make_trace(Problem problem, const std::vector<std::string>& step_texts) {
  ReasoningTrace out;
  out.problem = std::move(problem);
  out.steps.reserve(step_texts.size());
  for (size_t i = 0; i < step_texts.size(); ++i) {
    out.steps.push_back(Step{static_cast<int>(i) + 1, step_texts[i]});
  }
  return out;
}

}  // namespace dyve
