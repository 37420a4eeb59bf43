#include "dyve/verifier.hpp"

#include <chrono>
#include <sstream>

namespace dyve::verifier {

void VerifierConfig::validate() const {
  if (!backend) throw contract_error("verifier config: backend is not set");
  if (max_tokens < 1 || max_tokens > kMaxResponseTokens) {
    throw contract_error("verifier config: max_tokens must be in [1, 8192]");
  }
  if (temperature < 0.0) throw contract_error("verifier config: temperature must be >= 0");
  if (prompt_template != "stepwise-v1") {
    throw config_error("verifier config: unknown prompt template '" + prompt_template + "'");
  }
}

std::vector<ChatMessage> build_step_prompt(const Problem& problem,
                                           const std::vector<Step>& steps, int t,
                                           const std::vector<std::string>& prior_responses) {
  if (t < 1 || t > static_cast<int>(steps.size())) {
    throw contract_error("build_step_prompt: step index out of range");
  }
  if (static_cast<int>(prior_responses.size()) < t - 1) {
    throw contract_error("build_step_prompt: missing responses for earlier steps");
  }

  std::vector<ChatMessage> messages;
  messages.reserve(static_cast<size_t>(2 * t - 1));
  {
    std::ostringstream first;
    first << problem.statement << "\n\nStep 1: " << steps[0].text << "\n\n" << kStepQuestion;
    messages.push_back(ChatMessage{Role::User, first.str()});
  }
  for (int k = 2; k <= t; ++k) {
    messages.push_back(ChatMessage{Role::Assistant, prior_responses[static_cast<size_t>(k - 2)]});
    std::ostringstream user;
    user << "Step " << k << ": " << steps[static_cast<size_t>(k - 1)].text << "\n\n"
         << kStepQuestion;
    messages.push_back(ChatMessage{Role::User, user.str()});
  }
  return messages;
}

std::string strip_think_blocks(const std::string& text) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t open = text.find("<think>", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const size_t close = text.find("</think>", open + 7);
    if (close == std::string::npos) break;  // unclosed: drop the rest
    pos = close + 8;
  }
  return out;
}

std::optional<std::string> first_think_body(const std::string& text) {
  const size_t open = text.find("<think>");
  if (open == std::string::npos) return std::nullopt;
  const size_t begin = open + 7;
  const size_t close = text.find("</think>", begin);
  if (close == std::string::npos) return text.substr(begin);
  return text.substr(begin, close - begin);
}

Verdict parse_verdict(const std::string& response) {
  const std::string visible = strip_think_blocks(response);
  std::istringstream tokens(visible);
  std::string token, last;
  while (tokens >> token) last = token;
  if (last.empty()) return Verdict::unparseable(response);
  // Accept both "Answer: -" (separate tokens) and a fused "Answer:-".
  if (last.rfind("Answer:", 0) == 0) last.erase(0, 7);
  if (last == "+") return Verdict::correct();
  if (last == "-") return Verdict::incorrect();
  return Verdict::unparseable(response);
}

VerificationResult verify_trace(const Problem& problem, const std::vector<Step>& steps,
                                const VerifierConfig& config) {
  config.validate();
  if (steps.empty()) throw domain_error("verify_trace: trace has no steps to verify");

  const auto wall_start = std::chrono::steady_clock::now();
  const std::optional<double> virtual_cost = config.backend->virtual_cost_per_call();

  VerificationResult result;
  result.classification = FirstErrorLabel::all_correct();
  const int total = static_cast<int>(steps.size());
  for (int t = 1; t <= total; ++t) {
    CompletionRequest request;
    request.messages = build_step_prompt(problem, steps, t, result.generations);
    request.max_tokens = config.max_tokens;
    request.temperature = config.temperature;
    request.seed = config.seed;

    std::string response;
    try {
      response = config.backend->complete(request).at(0);
    } catch (const transport_error& e) {
      result.seconds = virtual_cost
                           ? *virtual_cost * static_cast<double>(result.generations.size())
                           : std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                           wall_start)
                                 .count();
      throw verification_error(std::string("verification failed at step ") + std::to_string(t) +
                                   " of '" + problem.id + "': " + e.what(),
                               result);
    }

    result.generations.push_back(response);
    const Verdict parsed = parse_verdict(response);
    Verdict effective = parsed;
    if (parsed.kind == VerdictKind::Unparseable) {
      switch (config.unparseable_policy) {
        case UnparseablePolicy::TreatAsIncorrect:
          effective = Verdict::incorrect();
          break;
        case UnparseablePolicy::TreatAsCorrect:
          effective = Verdict::correct();
          break;
        case UnparseablePolicy::Abort:
          throw domain_error("verify_trace: unparseable response at step " + std::to_string(t) +
                             " of '" + problem.id + "'");
      }
    }
    result.verdicts.push_back(effective);
    if (effective.kind != VerdictKind::Correct) {
      result.classification = FirstErrorLabel::at(t - 1);
      break;
    }
  }

  result.seconds =
      virtual_cost
          ? *virtual_cost * static_cast<double>(result.generations.size())
          : std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

}  // namespace dyve::verifier
