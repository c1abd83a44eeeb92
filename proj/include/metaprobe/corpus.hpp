#pragma once

#include <map>
#include <string>
#include <vector>

namespace metaprobe::llm {
class Gateway;
}

namespace metaprobe::corpus {

// Character range into the original sentence, half-open [begin, end).
struct Span {
    int begin = -1;
    int end = -1;
    bool valid() const { return begin >= 0 && end > begin; }
};

struct FigQaGroup {
    std::string id;
    std::string m1, m2;   // metaphor sentences
    std::string r1, r2;   // matching literal references
    Span span1, span2;    // concept-relevant part of m1 / m2
};

enum class Genre { News, Fiction, Academic, Conversation };

const char* to_string(Genre g);
Genre genre_from_string(const std::string& s);

struct MunchRecord {
    std::string id;
    std::string sentence;
    int target_index = -1;
    std::string target_word;
    std::vector<std::string> gold_substitutes;
    Genre genre = Genre::News;
    double novelty = 0.0;
};

struct Reject {
    size_t row = 0;          // 1-based data row number
    std::string reason;
};

template <typename T>
struct LoadResult {
    std::vector<T> records;
    std::vector<Reject> rejects;
};

// CSV columns: id, metaphor_1, metaphor_2, reference_1, reference_2,
// optional span_1, span_2 ("begin:end" character offsets).
LoadResult<FigQaGroup> load_figqa(const std::string& path);

// CSV columns: id, sentence, target_index, target_word,
// substitutes (semicolon-separated), genre, novelty.
LoadResult<MunchRecord> load_munch(const std::string& path);

struct AnnotateStats {
    size_t filled = 0;
    size_t already_present = 0;
    size_t parse_failed = 0;
};

// Fills missing spans by asking the gateway for the concept-relevant
// substring; the reply must occur verbatim in the sentence. Groups whose
// annotation fails keep an invalid span and are counted.
AnnotateStats annotate_spans(std::vector<FigQaGroup>& groups, llm::Gateway& gateway);

std::map<Genre, std::vector<MunchRecord>> partition_by_genre(const std::vector<MunchRecord>& records);

struct NoveltySplit {
    std::vector<MunchRecord> novel;         // novelty strictly above the threshold
    std::vector<MunchRecord> conventional;
};

NoveltySplit partition_by_novelty(const std::vector<MunchRecord>& records, double threshold = 0.3);

}  // namespace metaprobe::corpus
