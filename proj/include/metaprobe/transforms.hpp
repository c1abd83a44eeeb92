#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "metaprobe/corpus.hpp"
#include "metaprobe/rng.hpp"

namespace metaprobe::transforms {

enum class VariantKind { Original, Random, Pos, Beginning, Middle, End };

const char* to_string(VariantKind k);
VariantKind variant_kind_from_string(const std::string& s);
const std::vector<VariantKind>& all_variant_kinds();

struct ShuffleVariant {
    std::string source_id;
    VariantKind kind = VariantKind::Original;
    std::vector<std::string> tokens;
    std::string terminal;                       // detached sentence-final punctuation
    int target_index_after = 0;
    std::optional<std::uint64_t> seed;          // Random / Middle only
    std::optional<std::string> substituted_word;  // Pos only

    std::string sentence() const;
};

enum class SkipReason { LexiconMiss, NoCrossPosForm, NoValidSlot };
const char* to_string(SkipReason r);

struct Skip {
    std::string source_id;
    VariantKind kind = VariantKind::Original;
    SkipReason reason = SkipReason::LexiconMiss;
};

using VariantOutcome = std::variant<ShuffleVariant, Skip>;

enum class Pos { Noun, Verb, Adj, Adv };
const char* to_string(Pos p);
std::optional<Pos> pos_from_char(char c);  // n v a r
char to_char(Pos p);

struct RelatedForm {
    std::string lemma;
    Pos pos = Pos::Noun;
};

struct LexicalEntry {
    std::string lemma;
    Pos pos = Pos::Noun;
    std::vector<RelatedForm> related;
};

// Line format (tab-separated): lemma \t pos-char \t lemma/pos;lemma/pos;...
// Compiled offline from a lexical database dump by tools/build_lexicon.py.
class Lexicon {
public:
    static Lexicon load(const std::string& path);

    const LexicalEntry* find(const std::string& lemma) const;  // lowercased lookup
    size_t size() const { return entries_.size(); }
    void put(LexicalEntry entry);

private:
    std::map<std::string, LexicalEntry> entries_;
};

ShuffleVariant original_variant(const corpus::MunchRecord& record);

// Uniform seeded permutation; identity permutations are re-drawn whenever the
// sentence has more than one token.
ShuffleVariant random_shuffle(const corpus::MunchRecord& record, std::uint64_t seed);

// Replaces the target with a derivationally related form of different part of
// speech; lexicographically smallest candidate wins.
VariantOutcome pos_substitute(const corpus::MunchRecord& record, const Lexicon& lexicon);

// Moves the target token to the front, the last pre-punctuation slot, or a
// seeded choice among interior slots excluding {front, last, original}.
VariantOutcome reposition(const corpus::MunchRecord& record, VariantKind kind,
                          std::uint64_t seed);

// One call per kind; seeds derived from (base_seed, record id, kind name).
std::vector<VariantOutcome> generate_variants(const corpus::MunchRecord& record,
                                              const std::vector<VariantKind>& kinds,
                                              const Lexicon* lexicon, std::uint64_t base_seed);

}  // namespace metaprobe::transforms
