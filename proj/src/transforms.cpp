#include "metaprobe/transforms.hpp"

#include <algorithm>

#include "metaprobe/errors.hpp"
#include "metaprobe/tokenizer.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::transforms {

const char* to_string(VariantKind k) {
    switch (k) {
        case VariantKind::Original: return "original";
        case VariantKind::Random: return "random";
        case VariantKind::Pos: return "pos";
        case VariantKind::Beginning: return "beginning";
        case VariantKind::Middle: return "middle";
        case VariantKind::End: return "end";
    }
    return "original";
}

VariantKind variant_kind_from_string(const std::string& s) {
    for (VariantKind k : all_variant_kinds())
        if (s == to_string(k)) return k;
    throw InvalidArgument("unknown variant kind: " + s);
}

const std::vector<VariantKind>& all_variant_kinds() {
    static const std::vector<VariantKind> kinds = {
        VariantKind::Original, VariantKind::Random,    VariantKind::Pos,
        VariantKind::Beginning, VariantKind::Middle,   VariantKind::End,
    };
    return kinds;
}

std::string ShuffleVariant::sentence() const { return detokenize(tokens, terminal); }

const char* to_string(SkipReason r) {
    switch (r) {
        case SkipReason::LexiconMiss: return "lexicon_miss";
        case SkipReason::NoCrossPosForm: return "no_cross_pos_form";
        case SkipReason::NoValidSlot: return "no_valid_slot";
    }
    return "lexicon_miss";
}

const char* to_string(Pos p) {
    switch (p) {
        case Pos::Noun: return "noun";
        case Pos::Verb: return "verb";
        case Pos::Adj: return "adj";
        case Pos::Adv: return "adv";
    }
    return "noun";
}

std::optional<Pos> pos_from_char(char c) {
    switch (c) {
        case 'n': return Pos::Noun;
        case 'v': return Pos::Verb;
        case 'a': return Pos::Adj;
        case 'r': return Pos::Adv;
    }
    return std::nullopt;
}

char to_char(Pos p) {
    switch (p) {
        case Pos::Noun: return 'n';
        case Pos::Verb: return 'v';
        case Pos::Adj: return 'a';
        case Pos::Adv: return 'r';
    }
    return 'n';
}

Lexicon Lexicon::load(const std::string& path) {
    Lexicon lex;
    size_t lineno = 0;
    for (const auto& line : util::read_lines(path)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cols = util::split(line, '\t');
        if (cols.size() != 3 || cols[0].empty() || cols[1].size() != 1)
            throw SchemaError("lexicon line " + std::to_string(lineno) + ": expected 3 columns");
        auto pos = pos_from_char(cols[1][0]);
        if (!pos)
            throw SchemaError("lexicon line " + std::to_string(lineno) + ": bad pos '" + cols[1] +
                              "'");
        LexicalEntry entry;
        entry.lemma = util::lowercase(cols[0]);
        entry.pos = *pos;
        for (const auto& item : util::split(cols[2], ';')) {
            if (item.empty()) continue;
            auto slash = item.rfind('/');
            if (slash == std::string::npos || slash == 0 || slash + 2 != item.size())
                throw SchemaError("lexicon line " + std::to_string(lineno) +
                                  ": bad related form '" + item + "'");
            auto rpos = pos_from_char(item[slash + 1]);
            if (!rpos)
                throw SchemaError("lexicon line " + std::to_string(lineno) +
                                  ": bad related pos in '" + item + "'");
            entry.related.push_back({util::lowercase(item.substr(0, slash)), *rpos});
        }
        lex.put(std::move(entry));
    }
    return lex;
}

const LexicalEntry* Lexicon::find(const std::string& lemma) const {
    auto it = entries_.find(util::lowercase(lemma));
    return it == entries_.end() ? nullptr : &it->second;
}

void Lexicon::put(LexicalEntry entry) {
    std::string key = entry.lemma;
    entries_[key] = std::move(entry);
}

static ShuffleVariant base_variant(const corpus::MunchRecord& record, VariantKind kind) {
    auto t = tokenize(record.sentence);
    ShuffleVariant v;
    v.source_id = record.id;
    v.kind = kind;
    v.tokens = std::move(t.tokens);
    v.terminal = std::move(t.terminal);
    v.target_index_after = record.target_index;
    return v;
}

ShuffleVariant original_variant(const corpus::MunchRecord& record) {
    return base_variant(record, VariantKind::Original);
}

ShuffleVariant random_shuffle(const corpus::MunchRecord& record, std::uint64_t seed) {
    ShuffleVariant v = base_variant(record, VariantKind::Random);
    v.seed = seed;
    size_t n = v.tokens.size();
    if (n <= 1) return v;

    DetRng rng(seed);
    std::vector<size_t> perm(n);
    bool identity = true;
    do {
        for (size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        identity = true;
        for (size_t i = 0; i < n; ++i)
            if (perm[i] != i) {
                identity = false;
                break;
            }
    } while (identity);

    std::vector<std::string> shuffled(n);
    for (size_t i = 0; i < n; ++i) {
        shuffled[i] = v.tokens[perm[i]];
        if (perm[i] == static_cast<size_t>(record.target_index))
            v.target_index_after = static_cast<int>(i);
    }
    v.tokens = std::move(shuffled);
    return v;
}

VariantOutcome pos_substitute(const corpus::MunchRecord& record, const Lexicon& lexicon) {
    const LexicalEntry* entry = lexicon.find(record.target_word);
    if (!entry)
        return Skip{record.id, VariantKind::Pos, SkipReason::LexiconMiss};

    const RelatedForm* best = nullptr;
    for (const auto& form : entry->related) {
        if (form.pos == entry->pos) continue;
        if (!best || form.lemma < best->lemma) best = &form;
    }
    if (!best)
        return Skip{record.id, VariantKind::Pos, SkipReason::NoCrossPosForm};

    ShuffleVariant v = base_variant(record, VariantKind::Pos);
    v.tokens[static_cast<size_t>(record.target_index)] = best->lemma;
    v.substituted_word = best->lemma;
    return v;
}

VariantOutcome reposition(const corpus::MunchRecord& record, VariantKind kind,
                          std::uint64_t seed) {
    if (kind != VariantKind::Beginning && kind != VariantKind::Middle && kind != VariantKind::End)
        throw InvalidArgument("reposition expects beginning/middle/end");

    ShuffleVariant v = base_variant(record, kind);
    size_t n = v.tokens.size();
    size_t p = static_cast<size_t>(record.target_index);

    size_t q;
    if (kind == VariantKind::Beginning) {
        q = 0;
    } else if (kind == VariantKind::End) {
        q = n - 1;
    } else {
        // interior slots, excluding front, last, and the original position
        std::vector<size_t> slots;
        for (size_t i = 1; i + 1 < n; ++i)
            if (i != p) slots.push_back(i);
        if (slots.empty())
            return Skip{record.id, VariantKind::Middle, SkipReason::NoValidSlot};
        DetRng rng(seed);
        q = slots[static_cast<size_t>(rng.below(slots.size()))];
        v.seed = seed;
    }

    std::string target = std::move(v.tokens[p]);
    v.tokens.erase(v.tokens.begin() + static_cast<long>(p));
    v.tokens.insert(v.tokens.begin() + static_cast<long>(q), std::move(target));
    v.target_index_after = static_cast<int>(q);
    return v;
}

std::vector<VariantOutcome> generate_variants(const corpus::MunchRecord& record,
                                              const std::vector<VariantKind>& kinds,
                                              const Lexicon* lexicon, std::uint64_t base_seed) {
    std::vector<VariantOutcome> out;
    out.reserve(kinds.size());
    for (VariantKind kind : kinds) {
        std::uint64_t seed =
            derive_seed(base_seed, record.id + ":" + to_string(kind));
        switch (kind) {
            case VariantKind::Original:
                out.emplace_back(original_variant(record));
                break;
            case VariantKind::Random:
                out.emplace_back(random_shuffle(record, seed));
                break;
            case VariantKind::Pos:
                if (!lexicon) throw InvalidArgument("pos variant requested without a lexicon");
                out.emplace_back(pos_substitute(record, *lexicon));
                break;
            case VariantKind::Beginning:
            case VariantKind::Middle:
            case VariantKind::End:
                out.emplace_back(reposition(record, kind, seed));
                break;
        }
    }
    return out;
}

}  // namespace metaprobe::transforms
