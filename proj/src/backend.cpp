#include "dyve/backend.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace dyve {

const char* role_name(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  throw contract_error("unknown chat role");
}

Role role_from_name(const std::string& name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw domain_error("unknown chat role name: '" + name + "'");
}

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

// Prompt template "judge-v1": restate the trace with numbered steps and the
// proposed annotation, ask for a one-word ruling.
std::vector<ChatMessage> BackendJudge::build_prompt(const Problem& problem,
                                                    const ReasoningTrace& trace,
                                                    FirstErrorLabel proposed) {
  std::ostringstream user;
  user << "Review the following solution.\n\nProblem: " << problem.statement << "\n\n";
  for (const Step& step : trace.steps) {
    user << "Step " << step.index << ": " << step.text << "\n";
  }
  user << "\nProposed annotation: ";
  if (proposed.is_all_correct()) {
    user << "every step is correct.";
  } else {
    // Steps are shown 1-based; the annotation uses the 0-based convention.
    user << "the first incorrect step is step " << (proposed.value + 1) << ".";
  }
  user << "\n\nIs this annotation right? Reply with exactly one word: yes or no.";
  return {ChatMessage{Role::System,
                      "You are a careful grader of step-by-step solutions. Answer only with "
                      "'yes' or 'no'."},
          ChatMessage{Role::User, user.str()}};
}

JudgeDecision BackendJudge::judge(const Problem& problem, const ReasoningTrace& trace,
                                  FirstErrorLabel proposed) {
  CompletionRequest request;
  request.messages = build_prompt(problem, trace, proposed);
  request.max_tokens = 8;
  request.temperature = temperature_;
  request.seed = seed_;
  const std::string reply = backend_->complete(request).at(0);

  // First yes/no token wins; anything else counts as disagreement so that an
  // incoherent judge can only drop data, never admit it.
  std::istringstream tokens(lowercase(reply));
  std::string token;
  while (tokens >> token) {
    while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) {
      token.pop_back();
    }
    if (token == "yes") return JudgeDecision{true, reply};
    if (token == "no") return JudgeDecision{false, reply};
  }
  return JudgeDecision{false, "unparseable judge reply: " + reply};
}

}  // namespace dyve
