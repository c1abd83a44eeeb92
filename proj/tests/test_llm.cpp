#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "metaprobe/errors.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/util.hpp"

using namespace metaprobe;

namespace {

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "metaprobe_llm_test";
    std::filesystem::create_directories(p);
    return p;
}

llm::TemplateRegistry registry_with(const std::string& id, const std::string& body) {
    llm::TemplateRegistry reg;
    llm::PromptTemplate tpl;
    tpl.id = id;
    tpl.body = body;
    tpl.expected_output = llm::known_template_kinds().at(id);
    reg.put(tpl);
    return reg;
}

}  // namespace

TEST_CASE("template slot scan and render") {
    llm::PromptTemplate tpl;
    tpl.id = "detect";
    tpl.body = "Is it one?\nSentence: {sentence}";
    CHECK(tpl.slots() == std::vector<std::string>{"sentence"});
    CHECK(tpl.render({{"sentence", "A test."}}) == "Is it one?\nSentence: A test.");
    CHECK_THROWS_AS(tpl.render({}), TemplateError);
    tpl.body = "broken {slot";
    CHECK_THROWS_AS(tpl.render({{"slot", "x"}}), TemplateError);
}

TEST_CASE("registry loads the bundled template directory") {
    auto reg = llm::TemplateRegistry::load(std::string(METAPROBE_SOURCE_DIR) +
                                           "/data/templates");
    for (const auto& [id, kind] : llm::known_template_kinds()) {
        CAPTURE(id);
        CHECK(reg.has(id));
        CHECK(reg.get(id).expected_output == kind);
        CHECK(!reg.get(id).slots().empty());
    }
    CHECK_THROWS_AS(reg.get("nonexistent"), TemplateError);
}

TEST_CASE("word list parsing strips markers, dedupes, truncates") {
    auto got = llm::parse_word_list("1. big\n2. large\n3. big", 20);
    CHECK(got == std::vector<std::string>{"big", "large"});
    got = llm::parse_word_list("- alpha\n* beta\n3) gamma\n• delta", 20);
    CHECK(got == std::vector<std::string>{"alpha", "beta", "gamma", "delta"});
    got = llm::parse_word_list("one, two, three", 2);
    CHECK(got == std::vector<std::string>{"one", "two"});
    got = llm::parse_word_list("\"Quoted\", (bracketed)", 20);
    CHECK(got == std::vector<std::string>{"quoted", "bracketed"});
    CHECK(llm::parse_word_list("", 20).empty());
    // 25 candidates with expected 20 keeps the first 20 distinct
    std::string many;
    for (int i = 0; i < 25; ++i) many += "w" + std::to_string(i) + "\n";
    CHECK(llm::parse_word_list(many, 20).size() == 20);
}

TEST_CASE("yes/no parsing tolerates wrappers and synonyms") {
    using llm::Detection;
    CHECK(llm::parse_yes_no("Yes.") == Detection::Metaphor);
    CHECK(llm::parse_yes_no("  YES, it is") == Detection::Metaphor);
    CHECK(llm::parse_yes_no("No") == Detection::Literal);
    CHECK(llm::parse_yes_no("It is metaphorical.") == Detection::Metaphor);
    CHECK(llm::parse_yes_no("That's literal usage") == Detection::Literal);
    CHECK(llm::parse_yes_no("Hard to say.") == std::nullopt);
    CHECK(llm::parse_yes_no("") == std::nullopt);
}

TEST_CASE("choice parsing accepts letters and digits") {
    CHECK(llm::parse_choice("B", 4) == 1);
    CHECK(llm::parse_choice("The answer is (c).", 4) == 2);
    CHECK(llm::parse_choice("3", 4) == 2);
    CHECK(llm::parse_choice("E", 4) == std::nullopt);
    CHECK(llm::parse_choice("5", 4) == std::nullopt);
    CHECK(llm::parse_choice("no idea", 4) == std::nullopt);
}

TEST_CASE("sentence parsing keeps the first line and strips quotes") {
    CHECK(llm::parse_sentence("\"The cat sat.\"\nExtra commentary.") == "The cat sat.");
    CHECK(llm::parse_sentence("  Plain reply  ") == "Plain reply");
    CHECK(llm::parse_sentence("\n\n") == "");
}

TEST_CASE("gateway maps provider outcomes to statuses") {
    auto reg = registry_with("detect", "Q?\nSentence: {sentence}");
    auto cb = std::make_shared<llm::CallbackChatProvider>(
        [](const std::string& prompt) -> llm::ChatResult {
            if (prompt.find("refuse") != std::string::npos) return {"", true};
            if (prompt.find("garble") != std::string::npos) return {"???", false};
            return {"Yes.", false};
        },
        "cb-model");
    llm::Gateway gw(cb, &reg);

    auto ok = gw.complete("detect", {{"sentence", "fine"}});
    CHECK(ok.status == llm::Status::Ok);
    CHECK(std::get<llm::Detection>(ok.parsed) == llm::Detection::Metaphor);
    CHECK(ok.prompt_hash == util::sha256_hex(ok.rendered_prompt));
    CHECK(ok.model_id == "cb-model");

    CHECK(gw.complete("detect", {{"sentence", "refuse"}}).status == llm::Status::Refused);
    CHECK(gw.complete("detect", {{"sentence", "garble"}}).status == llm::Status::ParseFailed);
    CHECK(gw.count_ok() == 1);
    CHECK(gw.count_refused() == 1);
    CHECK(gw.count_parse_failed() == 1);
    CHECK(gw.live_calls() == 0);  // callback provider is not live
}

TEST_CASE("record/replay round trip preserves outputs and refusals") {
    auto dir = temp_dir();
    auto path = (dir / "chat_rt.jsonl").string();
    std::filesystem::remove(path);

    auto cb = std::make_shared<llm::CallbackChatProvider>(
        [](const std::string& prompt) -> llm::ChatResult {
            if (prompt.find("blocked") != std::string::npos) return {"", true};
            return {"echo: " + prompt.substr(0, 10), false};
        },
        "rec-model");
    auto rec = std::make_shared<llm::RecordingChatProvider>(cb, path);
    auto r1 = rec->complete("hello prompt");
    auto r2 = rec->complete("blocked prompt");

    llm::FixtureChatProvider replay(path, "rec-model");
    CHECK(replay.size() == 2);
    CHECK(replay.complete("hello prompt").text == r1.text);
    CHECK(replay.complete("blocked prompt").refused == true);
    CHECK_THROWS_AS(replay.complete("never recorded"), ProviderError);
}

TEST_CASE("unknown template id in directory load is a config error") {
    auto dir = temp_dir() / "tpl_bad";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "mystery.txt") << "body {x}";
    CHECK_THROWS_AS(llm::TemplateRegistry::load(dir.string()), ConfigError);
}
