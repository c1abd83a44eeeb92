#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace metaprobe::llm {

enum class OutputKind { Sentence, WordList, YesNo, Choice };
enum class Status { Ok, Refused, ParseFailed };
enum class Detection { Metaphor, Literal };

const char* to_string(Status s);

struct PromptTemplate {
    std::string id;
    std::string body;                 // named {slot} placeholders
    OutputKind expected_output = OutputKind::Sentence;

    std::vector<std::string> slots() const;
    // Throws TemplateError on a missing slot value or an unknown placeholder.
    std::string render(const std::map<std::string, std::string>& values) const;
};

// Template ids the harness knows how to parse, with their output kinds.
const std::map<std::string, OutputKind>& known_template_kinds();

class TemplateRegistry {
public:
    // Loads <id>.txt files from a directory; ids must be known.
    static TemplateRegistry load(const std::string& dir);
    const PromptTemplate& get(const std::string& id) const;
    bool has(const std::string& id) const;
    void put(PromptTemplate tpl);

private:
    std::map<std::string, PromptTemplate> templates_;
};

struct ChatResult {
    std::string text;
    bool refused = false;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResult complete(const std::string& prompt) = 0;
    virtual const std::string& model_id() const = 0;
    virtual bool is_live() const = 0;
};

struct HttpChatConfig {
    std::string endpoint;             // e.g. https://api.openai.com/v1/chat/completions
    std::string model;
    std::string auth_env;             // env var holding the bearer token
    int max_retries = 4;
    double backoff_seconds = 0.5;     // doubled per retry
    double requests_per_minute = 0.0; // 0 = unpaced
    double temperature = 0.0;
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpChatConfig cfg);
    ChatResult complete(const std::string& prompt) override;
    const std::string& model_id() const override { return cfg_.model; }
    bool is_live() const override { return true; }

private:
    HttpChatConfig cfg_;
    std::mutex pace_mutex_;
    double last_call_monotonic_ = 0.0;
};

// Replay from a JSONL fixture: {"prompt_sha256": ..., "output": ..., "refused": bool}.
class FixtureChatProvider : public ChatProvider {
public:
    FixtureChatProvider(const std::string& path, std::string model_id);
    ChatResult complete(const std::string& prompt) override;
    const std::string& model_id() const override { return model_id_; }
    bool is_live() const override { return false; }
    size_t size() const { return entries_.size(); }

private:
    std::map<std::string, ChatResult> entries_;
    std::string model_id_;
};

// Wraps another provider and appends every exchange to a fixture file.
class RecordingChatProvider : public ChatProvider {
public:
    RecordingChatProvider(std::shared_ptr<ChatProvider> inner, const std::string& path);
    ChatResult complete(const std::string& prompt) override;
    const std::string& model_id() const override { return inner_->model_id(); }
    bool is_live() const override { return inner_->is_live(); }

private:
    std::shared_ptr<ChatProvider> inner_;
    std::string path_;
    std::mutex write_mutex_;
};

// Test/dev provider driven by a callback.
class CallbackChatProvider : public ChatProvider {
public:
    CallbackChatProvider(std::function<ChatResult(const std::string&)> fn, std::string model_id)
        : fn_(std::move(fn)), model_id_(std::move(model_id)) {}
    ChatResult complete(const std::string& prompt) override { return fn_(prompt); }
    const std::string& model_id() const override { return model_id_; }
    bool is_live() const override { return false; }

private:
    std::function<ChatResult(const std::string&)> fn_;
    std::string model_id_;
};

using Parsed = std::variant<std::monostate, std::string, std::vector<std::string>, Detection, int>;

struct GenerationRecord {
    std::string template_id;
    std::string rendered_prompt;
    std::string prompt_hash;
    std::string model_id;
    std::string raw_output;
    Parsed parsed;
    Status status = Status::Ok;
};

// Output post-processing. Rules are centralized here so score changes stay
// attributable to one place.
std::vector<std::string> parse_word_list(const std::string& raw, int expected_n);
std::optional<Detection> parse_yes_no(const std::string& raw);
std::optional<int> parse_choice(const std::string& raw, int n_options);  // 0-based index
std::string parse_sentence(const std::string& raw);

struct GatewayOptions {
    int word_list_n = 20;
    int choice_options = 4;
};

class Gateway {
public:
    Gateway(std::shared_ptr<ChatProvider> provider, const TemplateRegistry* registry,
            GatewayOptions opts = {});

    GenerationRecord complete(const std::string& template_id,
                              const std::map<std::string, std::string>& slots);

    const std::string& model_id() const { return provider_->model_id(); }
    std::uint64_t live_calls() const { return live_calls_.load(); }
    std::uint64_t count_ok() const { return ok_.load(); }
    std::uint64_t count_refused() const { return refused_.load(); }
    std::uint64_t count_parse_failed() const { return parse_failed_.load(); }

private:
    std::shared_ptr<ChatProvider> provider_;
    const TemplateRegistry* registry_;
    GatewayOptions opts_;
    std::atomic<std::uint64_t> live_calls_{0};
    std::atomic<std::uint64_t> ok_{0};
    std::atomic<std::uint64_t> refused_{0};
    std::atomic<std::uint64_t> parse_failed_{0};
};

}  // namespace metaprobe::llm
