#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "edgeflow/mermaid.hpp"
#include "edgeflow/prompts.hpp"
#include "edgeflow/vlm.hpp"

namespace edgeflow {

constexpr int kMaxRepairIterations = 10;

/// One validation-correction cycle's result. history records every attempt:
/// the initial candidate plus one entry per fixer call, so
/// history.size() == iterations_used + 1.
struct RepairOutcome {
    std::string final_code;
    bool valid = false;
    int iterations_used = 0;
    std::vector<std::pair<std::string, mermaid::ParseDiagnostics>> history;
};

/// Receives the failing code and the line-numbered error log, returns the
/// fixer model's raw reply. Transport failures may throw; the loop counts
/// them as failed iterations.
using FixerFn = std::function<std::string(const std::string& code,
                                          const std::string& diagnostics)>;

inline std::string format_diagnostics(const mermaid::ParseDiagnostics& diags) {
    std::string out;
    for (const auto& msg : diags.messages)
        out += "line " + std::to_string(msg.line) + ": " + msg.message + "\n";
    return out;
}

/// Iterative validation-correction: sanitize and validate, on failure send the
/// code with its error log to the fixer, extract the replied code block, and
/// re-validate; stops on success or after 10 fixer calls. Always returns the
/// last candidate with its validity flag, never throws.
inline RepairOutcome repair_loop(const std::string& code, const FixerFn& fixer) {
    RepairOutcome outcome;
    std::string current = mermaid::sanitize(code);
    mermaid::ParseDiagnostics diags = mermaid::parse(current).diagnostics;
    outcome.history.emplace_back(current, diags);
    while (!diags.ok && outcome.iterations_used < kMaxRepairIterations) {
        ++outcome.iterations_used;
        try {
            const std::string reply = fixer(current, format_diagnostics(diags));
            current = mermaid::sanitize(extract_code_block(reply));
        } catch (const std::exception& e) {
            mermaid::ParseDiagnostics failure;
            failure.add(0, std::string("fixer call failed: ") + e.what());
            outcome.history.emplace_back(current, failure);
            continue;
        }
        diags = mermaid::parse(current).diagnostics;
        outcome.history.emplace_back(current, diags);
    }
    outcome.final_code = current;
    outcome.valid = diags.ok;
    return outcome;
}

/// Fixer backed by a chat client (text-only: the correction model receives
/// code and diagnostics, not images). run_key identifies the flowchart run;
/// the loop's call counter becomes the fix_attempt.
inline FixerFn make_client_fixer(Client& client, GenerationParams params, RequestKey run_key) {
    auto counter = std::make_shared<int>(0);
    return [&client, params, run_key, counter](const std::string& code,
                                               const std::string& diagnostics) {
        RequestKey key = run_key;
        key.fix_attempt = ++*counter;
        std::string user(prompts::kFixerUserTemplate);
        const auto sub = [&user](std::string_view placeholder, const std::string& value) {
            const std::size_t at = user.find(placeholder);
            if (at != std::string::npos) user.replace(at, placeholder.size(), value);
        };
        sub("{code}", code);
        sub("{diagnostics}", diagnostics.empty() ? "(no messages)" : diagnostics);
        return client.chat(std::string(prompts::kFixerSystem), user, {}, params, key).raw_text;
    };
}

}  // namespace edgeflow
