#include "metaprobe/llm.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::llm {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Status s) {
    switch (s) {
        case Status::Ok: return "ok";
        case Status::Refused: return "refused";
        case Status::ParseFailed: return "parse_failed";
    }
    return "ok";
}

std::vector<std::string> PromptTemplate::slots() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{') continue;
        size_t close = body.find('}', i + 1);
        if (close == std::string::npos) break;
        std::string name = body.substr(i + 1, close - i - 1);
        if (!name.empty() && name.find('{') == std::string::npos && seen.insert(name).second)
            out.push_back(name);
        i = close;
    }
    return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(body.size());
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '{') {
            size_t close = body.find('}', i + 1);
            if (close == std::string::npos)
                throw TemplateError("template " + id + ": unbalanced '{'");
            std::string name = body.substr(i + 1, close - i - 1);
            auto it = values.find(name);
            if (it == values.end())
                throw TemplateError("template " + id + ": no value for slot {" + name + "}");
            out += it->second;
            i = close;
        } else {
            out.push_back(body[i]);
        }
    }
    return out;
}

const std::map<std::string, OutputKind>& known_template_kinds() {
    static const std::map<std::string, OutputKind> kinds = {
        {"spatial_equivalent", OutputKind::Sentence},
        {"spatial_interpret", OutputKind::Sentence},
        {"span_annotate", OutputKind::Sentence},
        {"imagine_lm_context", OutputKind::WordList},
        {"imagine_lm_word", OutputKind::WordList},
        {"imagine_ml_context", OutputKind::WordList},
        {"imagine_ml_word", OutputKind::WordList},
        {"detect", OutputKind::YesNo},
        {"multichoice_paraphrase", OutputKind::Sentence},
        {"multichoice_literalize", OutputKind::Sentence},
        {"multichoice_select", OutputKind::Choice},
    };
    return kinds;
}

TemplateRegistry TemplateRegistry::load(const std::string& dir) {
    TemplateRegistry reg;
    if (!fs::is_directory(dir)) throw ConfigError("template directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string id = entry.path().stem().string();
        auto it = known_template_kinds().find(id);
        if (it == known_template_kinds().end())
            throw ConfigError("unknown template id: " + id + " (" + entry.path().string() + ")");
        PromptTemplate tpl;
        tpl.id = id;
        tpl.body = util::read_file(entry.path().string());
        while (!tpl.body.empty() && (tpl.body.back() == '\n' || tpl.body.back() == '\r'))
            tpl.body.pop_back();
        tpl.expected_output = it->second;
        reg.put(std::move(tpl));
    }
    return reg;
}

const PromptTemplate& TemplateRegistry::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw TemplateError("template not loaded: " + id);
    return it->second;
}

bool TemplateRegistry::has(const std::string& id) const { return templates_.count(id) > 0; }

void TemplateRegistry::put(PromptTemplate tpl) {
    templates_[tpl.id] = std::move(tpl);
}

// ---------------------------------------------------------------------------
// Output parsing

static std::string strip_list_marker(const std::string& item) {
    std::string s = util::trim(item);
    // "12." / "3)" / "- " / "* " / bullet
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')' || s[i] == ':')) {
        s = s.substr(i + 1);
    } else if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
        s = s.substr(1);
    } else if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xE2 &&
               static_cast<unsigned char>(s[1]) == 0x80 && static_cast<unsigned char>(s[2]) == 0xA2) {
        s = s.substr(3);  // U+2022 bullet
    }
    return util::trim(s);
}

static std::string strip_outer_punct(const std::string& item) {
    size_t b = 0, e = item.size();
    auto is_wrap = [](char c) {
        return c == '"' || c == '\'' || c == '.' || c == ',' || c == ';' || c == ':' || c == '!' ||
               c == '?' || c == '(' || c == ')' || c == '[' || c == ']';
    };
    while (b < e && is_wrap(item[b])) ++b;
    while (e > b && is_wrap(item[e - 1])) --e;
    return item.substr(b, e - b);
}

std::vector<std::string> parse_word_list(const std::string& raw, int expected_n) {
    std::vector<std::string> items;
    std::set<std::string> seen;
    std::string piece;
    auto flush = [&]() {
        std::string w = strip_outer_punct(strip_list_marker(piece));
        piece.clear();
        w = util::lowercase(util::trim(w));
        if (w.empty()) return;
        if (static_cast<int>(items.size()) >= expected_n) return;
        if (seen.insert(w).second) items.push_back(w);
    };
    for (char c : raw) {
        if (c == '\n' || c == ',') flush();
        else piece.push_back(c);
    }
    flush();
    return items;
}

static std::vector<std::string> words_of(const std::string& raw) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : raw) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::optional<Detection> parse_yes_no(const std::string& raw) {
    for (const auto& w : words_of(raw)) {
        if (w == "yes") return Detection::Metaphor;
        if (w == "no" || w == "not") return Detection::Literal;
        if (w == "metaphorical" || w == "metaphor") return Detection::Metaphor;
        if (w == "literal") return Detection::Literal;
    }
    return std::nullopt;
}

std::optional<int> parse_choice(const std::string& raw, int n_options) {
    if (n_options < 1 || n_options > 26) throw InvalidArgument("parse_choice: bad n_options");
    std::string cur;
    auto token_choice = [&](const std::string& tok) -> std::optional<int> {
        if (tok.size() == 1) {
            char c = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
            if (c >= 'A' && c < 'A' + n_options) return c - 'A';
            if (tok[0] >= '1' && tok[0] < '1' + n_options) return tok[0] - '1';
        }
        return std::nullopt;
    };
    for (size_t i = 0; i <= raw.size(); ++i) {
        char c = i < raw.size() ? raw[i] : ' ';
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else {
            if (!cur.empty()) {
                if (auto idx = token_choice(cur)) return idx;
                cur.clear();
            }
        }
    }
    return std::nullopt;
}

std::string parse_sentence(const std::string& raw) {
    std::string s = util::trim(raw);
    // keep first line only; chat models sometimes append commentary
    size_t nl = s.find('\n');
    if (nl != std::string::npos) s = util::trim(s.substr(0, nl));
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        s = util::trim(s.substr(1, s.size() - 2));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Fixture / recording providers

FixtureChatProvider::FixtureChatProvider(const std::string& path, std::string model_id)
    : model_id_(std::move(model_id)) {
    for (const auto& line : util::read_lines(path)) {
        if (util::trim(line).empty()) continue;
        json j = json::parse(line);
        ChatResult r;
        r.text = j.value("output", "");
        r.refused = j.value("refused", false);
        entries_[j.at("prompt_sha256").get<std::string>()] = std::move(r);
    }
}

ChatResult FixtureChatProvider::complete(const std::string& prompt) {
    auto it = entries_.find(util::sha256_hex(prompt));
    if (it == entries_.end())
        throw ProviderError("chat fixture has no entry for prompt hash " + util::sha256_hex(prompt));
    return it->second;
}

RecordingChatProvider::RecordingChatProvider(std::shared_ptr<ChatProvider> inner,
                                             const std::string& path)
    : inner_(std::move(inner)), path_(path) {}

ChatResult RecordingChatProvider::complete(const std::string& prompt) {
    ChatResult r = inner_->complete(prompt);
    json j = {{"prompt_sha256", util::sha256_hex(prompt)}, {"output", r.text}, {"refused", r.refused}};
    std::lock_guard<std::mutex> lock(write_mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("cannot append to fixture file: " + path_);
    out << j.dump() << "\n";
    return r;
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, const TemplateRegistry* registry,
                 GatewayOptions opts)
    : provider_(std::move(provider)), registry_(registry), opts_(opts) {}

GenerationRecord Gateway::complete(const std::string& template_id,
                                   const std::map<std::string, std::string>& slots) {
    const PromptTemplate& tpl = registry_->get(template_id);
    GenerationRecord rec;
    rec.template_id = template_id;
    rec.rendered_prompt = tpl.render(slots);
    rec.prompt_hash = util::sha256_hex(rec.rendered_prompt);
    rec.model_id = provider_->model_id();

    if (provider_->is_live()) ++live_calls_;
    ChatResult result = provider_->complete(rec.rendered_prompt);
    rec.raw_output = result.text;

    if (result.refused) {
        rec.status = Status::Refused;
        ++refused_;
        return rec;
    }

    switch (tpl.expected_output) {
        case OutputKind::Sentence: {
            std::string s = parse_sentence(rec.raw_output);
            if (s.empty()) {
                rec.status = Status::ParseFailed;
            } else {
                rec.parsed = s;
            }
            break;
        }
        case OutputKind::WordList: {
            auto words = parse_word_list(rec.raw_output, opts_.word_list_n);
            if (words.empty()) {
                rec.status = Status::ParseFailed;
            } else {
                rec.parsed = std::move(words);
            }
            break;
        }
        case OutputKind::YesNo: {
            auto d = parse_yes_no(rec.raw_output);
            if (!d) rec.status = Status::ParseFailed;
            else rec.parsed = *d;
            break;
        }
        case OutputKind::Choice: {
            auto idx = parse_choice(rec.raw_output, opts_.choice_options);
            if (!idx) rec.status = Status::ParseFailed;
            else rec.parsed = *idx;
            break;
        }
    }
    if (rec.status == Status::Ok) ++ok_;
    else ++parse_failed_;
    return rec;
}

}  // namespace metaprobe::llm
