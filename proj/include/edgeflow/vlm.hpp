#pragma once

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "edgeflow/error.hpp"
#include "edgeflow/image.hpp"
#include "edgeflow/image_io.hpp"
#include "edgeflow/prompts.hpp"

namespace edgeflow {

struct GenerationParams {
    double temperature = 0.3;
    double top_p = 0.8;
    int max_tokens = 16000;

    void check_valid() const {
        if (temperature < 0.0) throw ParamError("temperature must be >= 0");
        if (top_p <= 0.0 || top_p > 1.0) throw ParamError("top_p must be in (0, 1]");
        if (max_tokens < 1) throw ParamError("max_tokens must be >= 1");
    }
};

enum class Condition { Baseline, EdgeFlow };

inline std::string to_string(Condition c) {
    return c == Condition::Baseline ? "baseline" : "edgeflow";
}

inline Condition condition_from(const std::string& s) {
    if (s == "baseline") return Condition::Baseline;
    if (s == "edgeflow") return Condition::EdgeFlow;
    throw ConfigError("unknown condition '" + s + "' (expected baseline or edgeflow)");
}

/// System text, user task instruction, and the ordered image attachments:
/// one image under the baseline condition, preprocessed-then-edge-map under
/// the dual-image condition.
struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::vector<std::string> images_png_b64;
    Condition condition = Condition::Baseline;
    std::string prompt_version{prompts::kPromptVersion};
};

struct ModelReply {
    std::string raw_text;  // verbatim, for audit logs
    std::string model_id;
    std::chrono::milliseconds latency{0};
};

/// Identifies one request for fixture lookup and audit logging. fix_attempt
/// is 0 for the generation call, >= 1 for repair-loop fixer calls.
struct RequestKey {
    std::string flowchart_id;
    std::string condition_tag;
    int run_index = 1;
    int fix_attempt = 0;

    std::string to_tag() const {
        std::string tag = flowchart_id + "_" + condition_tag + "_run" + std::to_string(run_index);
        if (fix_attempt > 0) tag += "_fix" + std::to_string(fix_attempt);
        return tag;
    }
};

namespace detail {

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static constexpr char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MockError("cannot read fixture: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace detail

/// Assembles the request content: prompt templates are fixed, images are
/// PNG-encoded base64 so binary edge-map values survive transport losslessly.
inline PromptBundle build_bundle(Condition condition, const RasterImage& prep_image,
                                 const EdgeMap* edge_image = nullptr) {
    PromptBundle bundle;
    bundle.condition = condition;
    bundle.system_text = std::string(prompts::kSystem);
    if (condition == Condition::EdgeFlow) {
        if (edge_image == nullptr)
            throw ConfigError("dual-image condition requires an edge map image");
        bundle.user_text = std::string(prompts::kUserDualImage);
        bundle.images_png_b64.push_back(detail::base64_encode(encode_png(prep_image)));
        bundle.images_png_b64.push_back(detail::base64_encode(encode_png(*edge_image)));
    } else {
        if (edge_image != nullptr)
            throw ConfigError("baseline condition takes exactly one image, got an edge map too");
        bundle.user_text = std::string(prompts::kUserSingleImage);
        bundle.images_png_b64.push_back(detail::base64_encode(encode_png(prep_image)));
    }
    return bundle;
}

/// Content of the first ```mermaid fenced block; failing that, the first
/// fenced block of any tag; failing that, the whole text trimmed. Downstream
/// validation decides its fate.
inline std::string extract_code_block(const std::string& raw_text) {
    std::optional<std::string> first_any;
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = raw_text.find("```", pos);
        if (open == std::string::npos) break;
        const std::size_t tag_end = raw_text.find('\n', open + 3);
        if (tag_end == std::string::npos) break;
        std::string tag = raw_text.substr(open + 3, tag_end - open - 3);
        while (!tag.empty() && std::isspace(static_cast<unsigned char>(tag.back())))
            tag.pop_back();
        const std::size_t close = raw_text.find("```", tag_end + 1);
        if (close == std::string::npos) break;
        std::string content = raw_text.substr(tag_end + 1, close - tag_end - 1);
        while (!content.empty() && (content.back() == '\n' || content.back() == '\r'))
            content.pop_back();
        if (tag == "mermaid") return content;
        if (!first_any) first_any = std::move(content);
        pos = close + 3;
    }
    if (first_any) return *first_any;
    const char* ws = " \t\r\n";
    const std::size_t b = raw_text.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const std::size_t e = raw_text.find_last_not_of(ws);
    return raw_text.substr(b, e - b + 1);
}

/// Model access: one implementation speaks OpenAI-compatible chat completions,
/// the other replays directory fixtures for offline runs.
class Client {
public:
    virtual ~Client() = default;

    /// images_png_b64 may be empty (text-only, used by the repair loop).
    virtual ModelReply chat(const std::string& system_text, const std::string& user_text,
                            const std::vector<std::string>& images_png_b64,
                            const GenerationParams& params, const RequestKey& key) = 0;
};

inline ModelReply generate(Client& client, const PromptBundle& bundle,
                           const GenerationParams& params, const RequestKey& key) {
    params.check_valid();
    return client.chat(bundle.system_text, bundle.user_text, bundle.images_png_b64, params, key);
}

struct EndpointConfig {
    std::string url;  // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string fixer_model;  // falls back to model when empty
    std::string api_key_env = "EDGEFLOW_API_KEY";
    int timeout_seconds = 300;
    int max_attempts = 3;
    long initial_backoff_ms = 500;  // doubled per retry
};

/// OpenAI-compatible chat-completions client with bounded retries (transient
/// transport failures and 5xx only) and exponential backoff. When audit_dir
/// is set, every request and reply is persisted before the reply is returned.
class HttpChatClient : public Client {
public:
    explicit HttpChatClient(EndpointConfig config, std::string audit_dir = "")
        : config_(std::move(config)), audit_dir_(std::move(audit_dir)) {
        split_url(config_.url, base_, path_);
    }

    ModelReply chat(const std::string& system_text, const std::string& user_text,
                    const std::vector<std::string>& images_png_b64,
                    const GenerationParams& params, const RequestKey& key) override {
        const nlohmann::json body = build_request(system_text, user_text, images_png_b64, params,
                                                  key.fix_attempt > 0);
        if (!audit_dir_.empty())
            detail::write_text_file(std::filesystem::path(audit_dir_) /
                                        (key.to_tag() + "_request.json"),
                                    body.dump(2));
        std::string last_error;
        for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
            if (attempt > 1)
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    config_.initial_backoff_ms << (attempt - 2)));
            const auto started = std::chrono::steady_clock::now();
            httplib::Client http(base_);
            http.set_connection_timeout(config_.timeout_seconds, 0);
            http.set_read_timeout(config_.timeout_seconds, 0);
            httplib::Headers headers;
            if (const char* api_key = std::getenv(config_.api_key_env.c_str());
                api_key && *api_key)
                headers.emplace("Authorization", std::string("Bearer ") + api_key);
            auto res = http.Post(path_, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status >= 400) throw RequestError(res->status, res->body);
            ModelReply reply = parse_reply(res->body);
            reply.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            if (!audit_dir_.empty())
                detail::write_text_file(std::filesystem::path(audit_dir_) /
                                            (key.to_tag() + "_reply.txt"),
                                        reply.raw_text);
            return reply;
        }
        throw TransportError("request failed after " + std::to_string(config_.max_attempts) +
                             " attempts: " + last_error);
    }

private:
    static void split_url(const std::string& url, std::string& base, std::string& path) {
        const std::size_t scheme = url.find("://");
        if (scheme == std::string::npos) throw ConfigError("endpoint url must include scheme: " + url);
        const std::size_t slash = url.find('/', scheme + 3);
        if (slash == std::string::npos) {
            base = url;
            path = "/v1/chat/completions";
        } else {
            base = url.substr(0, slash);
            path = url.substr(slash);
        }
    }

    nlohmann::json build_request(const std::string& system_text, const std::string& user_text,
                                 const std::vector<std::string>& images_png_b64,
                                 const GenerationParams& params, bool fixer) const {
        nlohmann::json user_content;
        if (images_png_b64.empty()) {
            user_content = user_text;
        } else {
            user_content = nlohmann::json::array();
            user_content.push_back({{"type", "text"}, {"text", user_text}});
            for (const auto& b64 : images_png_b64)
                user_content.push_back(
                    {{"type", "image_url"},
                     {"image_url", {{"url", "data:image/png;base64," + b64}}}});
        }
        const std::string& model =
            fixer && !config_.fixer_model.empty() ? config_.fixer_model : config_.model;
        return {{"model", model},
                {"temperature", params.temperature},
                {"top_p", params.top_p},
                {"max_tokens", params.max_tokens},
                {"messages",
                 {{{"role", "system"}, {"content", system_text}},
                  {{"role", "user"}, {"content", user_content}}}}};
    }

    static ModelReply parse_reply(const std::string& body) {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded()) throw TransportError("malformed JSON in completion response");
        ModelReply reply;
        reply.model_id = j.value("model", "");
        if (!j.contains("choices") || j["choices"].empty())
            throw TransportError("completion response has no choices");
        const auto& content = j["choices"][0]["message"]["content"];
        if (content.is_string()) {
            reply.raw_text = content.get<std::string>();
        } else if (content.is_array()) {
            for (const auto& part : content)
                if (part.value("type", "") == "text") reply.raw_text += part.value("text", "");
        }
        return reply;
    }

    EndpointConfig config_;
    std::string audit_dir_;
    std::string base_;
    std::string path_;
};

/// Deterministic fixture replay. Fixture layout:
///   <root>/<flowchart id>/<condition tag>/run<k>.txt          generation
///   <root>/<flowchart id>/<condition tag>/run<k>.fix<j>.txt   fixer attempt j
/// A sweep tag like "edgeflow-C3" falls back to its base condition directory
/// when no tag-specific directory exists.
class MockClient : public Client {
public:
    explicit MockClient(std::filesystem::path fixtures_root)
        : root_(std::move(fixtures_root)) {}

    ModelReply chat(const std::string&, const std::string&, const std::vector<std::string>&,
                    const GenerationParams&, const RequestKey& key) override {
        const std::filesystem::path path = fixture_path(key);
        ModelReply reply;
        reply.raw_text = detail::read_text_file(path);
        reply.model_id = "mock";
        return reply;
    }

    std::filesystem::path fixture_path(const RequestKey& key) const {
        std::string name = "run" + std::to_string(key.run_index);
        if (key.fix_attempt > 0) name += ".fix" + std::to_string(key.fix_attempt);
        name += ".txt";
        const std::filesystem::path tagged = root_ / key.flowchart_id / key.condition_tag / name;
        if (std::filesystem::exists(tagged)) return tagged;
        const std::size_t dash = key.condition_tag.find('-');
        if (dash != std::string::npos) {
            const std::filesystem::path base =
                root_ / key.flowchart_id / key.condition_tag.substr(0, dash) / name;
            if (std::filesystem::exists(base)) return base;
        }
        throw MockError("missing fixture for " + key.to_tag() + " under " + root_.string());
    }

private:
    std::filesystem::path root_;
};

}  // namespace edgeflow
