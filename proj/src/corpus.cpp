#include "metaprobe/corpus.hpp"

#include <cstdlib>

#include "metaprobe/csv.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/tokenizer.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::corpus {

const char* to_string(Genre g) {
    switch (g) {
        case Genre::News: return "news";
        case Genre::Fiction: return "fiction";
        case Genre::Academic: return "academic";
        case Genre::Conversation: return "conversation";
    }
    return "news";
}

Genre genre_from_string(const std::string& s) {
    std::string k = util::lowercase(util::trim(s));
    if (k == "news") return Genre::News;
    if (k == "fiction") return Genre::Fiction;
    if (k == "academic") return Genre::Academic;
    if (k == "conversation") return Genre::Conversation;
    throw InvalidArgument("unknown genre: " + s);
}

static bool parse_int(const std::string& s, int* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) return false;
    *out = static_cast<int>(v);
    return true;
}

static bool parse_real(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return false;
    *out = v;
    return true;
}

// "begin:end" character offsets; empty string means unannotated.
static bool parse_span(const std::string& s, const std::string& sentence, Span* out) {
    std::string t = util::trim(s);
    if (t.empty()) {
        *out = Span{};
        return true;
    }
    auto parts = util::split(t, ':');
    int b = 0, e = 0;
    if (parts.size() != 2 || !parse_int(parts[0], &b) || !parse_int(parts[1], &e)) return false;
    if (b < 0 || e <= b || e > static_cast<int>(sentence.size())) return false;
    *out = Span{b, e};
    return true;
}

LoadResult<FigQaGroup> load_figqa(const std::string& path) {
    auto rows = csv::read_file(path);
    LoadResult<FigQaGroup> result;
    if (rows.empty()) return result;  // empty file: empty list, caller warns

    csv::Header header(rows[0]);
    const size_t c_id = header.require("id");
    const size_t c_m1 = header.require("metaphor_1");
    const size_t c_m2 = header.require("metaphor_2");
    const size_t c_r1 = header.require("reference_1");
    const size_t c_r2 = header.require("reference_2");
    const int c_s1 = header.find("span_1");
    const int c_s2 = header.find("span_2");

    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&](size_t c) { return c < row.size() ? util::trim(row[c]) : std::string(); };
        FigQaGroup g;
        g.id = cell(c_id);
        g.m1 = cell(c_m1);
        g.m2 = cell(c_m2);
        g.r1 = cell(c_r1);
        g.r2 = cell(c_r2);
        if (g.id.empty() || g.m1.empty() || g.m2.empty() || g.r1.empty() || g.r2.empty()) {
            result.rejects.push_back({r, "EmptyField"});
            continue;
        }
        bool span_ok = true;
        if (c_s1 >= 0) span_ok = span_ok && parse_span(cell(c_s1), g.m1, &g.span1);
        if (c_s2 >= 0) span_ok = span_ok && parse_span(cell(c_s2), g.m2, &g.span2);
        if (!span_ok) {
            result.rejects.push_back({r, "BadSpan"});
            continue;
        }
        result.records.push_back(std::move(g));
    }
    return result;
}

LoadResult<MunchRecord> load_munch(const std::string& path) {
    auto rows = csv::read_file(path);
    LoadResult<MunchRecord> result;
    if (rows.empty()) return result;

    csv::Header header(rows[0]);
    const size_t c_id = header.require("id");
    const size_t c_sent = header.require("sentence");
    const size_t c_ti = header.require("target_index");
    const size_t c_tw = header.require("target_word");
    const size_t c_sub = header.require("substitutes");
    const size_t c_genre = header.require("genre");
    const size_t c_nov = header.require("novelty");

    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&](size_t c) { return c < row.size() ? util::trim(row[c]) : std::string(); };
        MunchRecord rec;
        rec.id = cell(c_id);
        rec.sentence = cell(c_sent);
        rec.target_word = cell(c_tw);
        if (rec.id.empty() || rec.sentence.empty() || rec.target_word.empty()) {
            result.rejects.push_back({r, "EmptyField"});
            continue;
        }
        if (!parse_int(cell(c_ti), &rec.target_index) || rec.target_index < 0) {
            result.rejects.push_back({r, "BadTargetIndex"});
            continue;
        }
        for (const auto& sub : util::split(cell(c_sub), ';')) {
            std::string w = util::trim(sub);
            if (!w.empty()) rec.gold_substitutes.push_back(w);
        }
        if (rec.gold_substitutes.empty()) {
            result.rejects.push_back({r, "NoSubstitutes"});
            continue;
        }
        try {
            rec.genre = genre_from_string(cell(c_genre));
        } catch (const InvalidArgument&) {
            result.rejects.push_back({r, "BadGenre"});
            continue;
        }
        if (!parse_real(cell(c_nov), &rec.novelty) || rec.novelty < 0.0 || rec.novelty > 1.0) {
            result.rejects.push_back({r, "BadNovelty"});
            continue;
        }
        Tokenization tok = tokenize(rec.sentence);
        if (rec.target_index >= static_cast<int>(tok.tokens.size()) ||
            tok.tokens[static_cast<size_t>(rec.target_index)] != rec.target_word) {
            result.rejects.push_back({r, "TokenMismatch"});
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

static bool annotate_one(const std::string& metaphor, llm::Gateway& gateway, Span* out) {
    auto rec = gateway.complete("span_annotate", {{"metaphor", metaphor}});
    if (rec.status != llm::Status::Ok) return false;
    const std::string& snippet = std::get<std::string>(rec.parsed);
    if (snippet.empty()) return false;
    size_t pos = metaphor.find(snippet);
    if (pos == std::string::npos) return false;
    *out = Span{static_cast<int>(pos), static_cast<int>(pos + snippet.size())};
    return true;
}

AnnotateStats annotate_spans(std::vector<FigQaGroup>& groups, llm::Gateway& gateway) {
    AnnotateStats stats;
    auto handle = [&](const std::string& metaphor, Span& span) {
        if (span.valid()) {
            ++stats.already_present;
            return;
        }
        if (annotate_one(metaphor, gateway, &span)) ++stats.filled;
        else ++stats.parse_failed;
    };
    for (auto& g : groups) {
        handle(g.m1, g.span1);
        handle(g.m2, g.span2);
    }
    return stats;
}

std::map<Genre, std::vector<MunchRecord>> partition_by_genre(const std::vector<MunchRecord>& records) {
    std::map<Genre, std::vector<MunchRecord>> out;
    for (const auto& r : records) out[r.genre].push_back(r);
    return out;
}

NoveltySplit partition_by_novelty(const std::vector<MunchRecord>& records, double threshold) {
    NoveltySplit out;
    for (const auto& r : records) {
        if (r.novelty > threshold) out.novel.push_back(r);
        else out.conventional.push_back(r);
    }
    return out;
}

}  // namespace metaprobe::corpus
