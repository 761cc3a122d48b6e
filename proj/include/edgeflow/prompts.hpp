#pragma once

#include <string_view>

// Fixed zero-shot prompt templates. These are part of the method contract:
// evaluation results are only comparable across runs that used the same
// template version, so any edit here must bump kPromptVersion.

namespace edgeflow::prompts {

inline constexpr std::string_view kPromptVersion = "v1";

inline constexpr std::string_view kSystem =
    "Role: You are a professional visual analysis agent specialized in flowchart analysis and "
    "Mermaid code generation.\n"
    "Guidelines to Follow: (i) Observe the overall structure and layout of flowcharts "
    "comprehensively; (ii) Identify main node types and their distributions accurately; (iii) "
    "Analyze text labels to understand their meaning and function; (iv) Infer complete flow "
    "logic and branching structures based on visual evidence; (v) Generate accurate, executable "
    "Mermaid flowchart code.";

inline constexpr std::string_view kUserDualImage =
    "Task: Analyze the given flowchart image pair and generate corresponding Mermaid flowchart "
    "code.\n"
    "Instruction: Your task involves multiple images--the preprocessed flowchart and its "
    "edge-detected version. First, observe the structural edge map to identify connectivity "
    "details such as thin lines, long edges, and arrowheads. Second, cross-reference with the "
    "preprocessed image to extract node labels and semantic content. Finally, synthesize "
    "complete Mermaid code that captures both topological structure and semantic information. "
    "Ensure the generated code follows Mermaid syntax conventions and represents the full flow "
    "logic including decision branches and loop structures. The Mermaid code must be enclosed "
    "in triple backticks with language specifier (i.e., ```mermaid ... ```).\n"
    "Input: [Preprocessed Flowchart Image] [Canny Edge Map Image]";

inline constexpr std::string_view kUserSingleImage =
    "Task: Analyze the given flowchart image and generate corresponding Mermaid flowchart "
    "code.\n"
    "Instruction: Your task involves a single flowchart image. Observe the image "
    "comprehensively to identify nodes (including their labels) and connectivity details such "
    "as edges and arrowheads. Generate complete Mermaid code that captures the full flow logic "
    "including decision branches and loop structures. Ensure the generated code follows Mermaid "
    "syntax conventions. The Mermaid code must be enclosed in triple backticks with language "
    "specifier (i.e., ```mermaid ... ```).\n"
    "Input: [Preprocessed Flowchart Image]";

inline constexpr std::string_view kFixerSystem =
    "Role: You are a Mermaid syntax repair assistant. You correct syntax errors in Mermaid "
    "flowchart code while preserving the original business logic, node labels, and edge "
    "relationships. Return only the corrected code, enclosed in triple backticks with language "
    "specifier (i.e., ```mermaid ... ```).";

/// Placeholders {code} and {diagnostics} are substituted by the repair loop.
inline constexpr std::string_view kFixerUserTemplate =
    "Task: The following Mermaid flowchart code fails to parse.\n"
    "Code:\n"
    "```mermaid\n"
    "{code}\n"
    "```\n"
    "Parser error log (line numbers refer to the code above):\n"
    "{diagnostics}\n"
    "Instruction: Correct the syntax errors while preserving the original business logic, node "
    "labels, and edge relationships. Do not add, remove, or rename nodes or edges unless a "
    "syntax error makes it unavoidable. Return the full corrected Mermaid code enclosed in "
    "triple backticks with language specifier.";

}  // namespace edgeflow::prompts
