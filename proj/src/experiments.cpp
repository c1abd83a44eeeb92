#include "metaprobe/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "metaprobe/errors.hpp"
#include "metaprobe/rng.hpp"
#include "metaprobe/tokenizer.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::experiments {

namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // population
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(acc / static_cast<double>(xs.size()));
    return out;
}

std::optional<double> try_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    try {
        return geometry::spearman(xs, ys);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string status_reason(const std::string& step, llm::Status status) {
    return step + (status == llm::Status::Refused ? "_refused" : "_parse_failed");
}

}  // namespace

// ---------------------------------------------------------------------------
// Spatial

SpatialSummary summarize_spatial(const std::vector<SpatialItem>& items) {
    SpatialSummary s;
    std::vector<double> dps, coss, ads;
    for (const auto& item : items) {
        if (s.model_id.empty()) s.model_id = item.model_id;
        if (!item.scored) {
            ++s.items_excluded;
            ++s.exclusions[item.exclude_reason];
            continue;
        }
        ++s.items_scored;
        dps.push_back(item.d_p);
        coss.push_back(item.cos_theta);
        ads.push_back(item.ad);
    }
    MeanSd dp = mean_sd(dps), cs = mean_sd(coss);
    s.dp_mean = dp.mean;
    s.dp_sd = dp.sd;
    s.cos_mean = cs.mean;
    s.cos_sd = cs.sd;
    if (dps.size() >= 2) {
        s.spearman_dp_ad = try_spearman(dps, ads);
        s.spearman_cos_dp = try_spearman(coss, dps);
    }
    return s;
}

SpatialRun run_spatial(const std::vector<corpus::FigQaGroup>& groups, llm::Gateway& gateway,
                       emb::Embedder& embedder, const geometry::GeometryOptions& opts) {
    struct Pending {
        const corpus::FigQaGroup* group = nullptr;
        std::string s_text;
        std::array<std::string, 2> m_text;
        std::array<bool, 2> m_ok = {false, false};
        std::array<std::string, 2> fail_reason;
        bool s_ok = false;
        std::string s_fail_reason;
    };

    std::vector<Pending> pending;
    pending.reserve(groups.size());

    for (const auto& g : groups) {
        Pending p;
        p.group = &g;

        auto s_rec = gateway.complete("spatial_equivalent",
                                      {{"reference_1", g.r1}, {"reference_2", g.r2}});
        if (s_rec.status == llm::Status::Ok) {
            p.s_ok = true;
            p.s_text = std::get<std::string>(s_rec.parsed);
        } else {
            p.s_fail_reason = status_reason("equivalent", s_rec.status);
        }

        const std::array<const std::string*, 2> metaphors = {&g.m1, &g.m2};
        const std::array<const corpus::Span*, 2> spans = {&g.span1, &g.span2};
        for (int i = 0; i < 2; ++i) {
            if (!spans[i]->valid()) {
                p.fail_reason[i] = "span_missing";
                continue;
            }
            std::string concept_part = metaphors[i]->substr(
                static_cast<size_t>(spans[i]->begin),
                static_cast<size_t>(spans[i]->end - spans[i]->begin));
            auto m_rec = gateway.complete(
                "spatial_interpret", {{"metaphor", *metaphors[i]}, {"concept", concept_part}});
            if (m_rec.status == llm::Status::Ok) {
                p.m_ok[i] = true;
                p.m_text[i] = std::get<std::string>(m_rec.parsed);
            } else {
                p.fail_reason[i] = status_reason("interpret", m_rec.status);
            }
        }
        pending.push_back(std::move(p));
    }

    // one embedding pass over everything this run needs
    std::vector<std::string> texts;
    for (const auto& p : pending) {
        if (!p.s_ok) continue;
        for (int i = 0; i < 2; ++i) {
            if (!p.m_ok[i]) continue;
            texts.push_back(p.group->r1);
            texts.push_back(p.group->r2);
            texts.push_back(p.s_text);
            texts.push_back(p.m_text[i]);
        }
    }
    std::vector<geometry::Vec> vecs;
    if (!texts.empty()) vecs = embedder.embed_batch(texts);

    SpatialRun run;
    size_t cursor = 0;
    const std::string model = gateway.model_id();
    for (const auto& p : pending) {
        for (int i = 0; i < 2; ++i) {
            SpatialItem item;
            item.group_id = p.group->id;
            item.metaphor_index = i + 1;
            item.model_id = model;
            if (!p.s_ok) {
                item.exclude_reason = p.s_fail_reason;
                run.items.push_back(std::move(item));
                continue;
            }
            item.s_text = p.s_text;
            if (!p.m_ok[i]) {
                item.exclude_reason = p.fail_reason[i];
                run.items.push_back(std::move(item));
                continue;
            }
            item.m_text = p.m_text[i];
            const geometry::Vec& r1 = vecs[cursor++];
            const geometry::Vec& r2 = vecs[cursor++];
            const geometry::Vec& s = vecs[cursor++];
            const geometry::Vec& m = vecs[cursor++];
            try {
                geometry::SpatialScores sc = geometry::spatial_scores(r1, r2, s, m, opts);
                item.d_p = sc.d_p;
                item.cos_theta = sc.cos_theta;
                item.ad = sc.ad;
                item.d_o = geometry::euclidean(m, i == 0 ? r1 : r2);
                item.degenerate = sc.degenerate;
                item.scored = true;
            } catch (const Error&) {
                item.exclude_reason = "degenerate_geometry";
            }
            run.items.push_back(std::move(item));
        }
    }
    run.summary = summarize_spatial(run.items);
    return run;
}

// ---------------------------------------------------------------------------
// Multi-choice

MultichoiceSummary summarize_multichoice(const std::vector<MultichoiceItem>& items) {
    MultichoiceSummary s;
    size_t correct = 0;
    for (const auto& item : items) {
        if (s.model_id.empty()) s.model_id = item.model_id;
        if (!item.scored) {
            ++s.items_excluded;
            ++s.exclusions[item.exclude_reason];
            continue;
        }
        ++s.items_scored;
        if (item.correct) ++correct;
    }
    if (s.items_scored)
        s.accuracy_x100 = 100.0 * static_cast<double>(correct) / static_cast<double>(s.items_scored);
    return s;
}

MultichoiceRun run_multichoice(const std::vector<corpus::FigQaGroup>& groups,
                               llm::Gateway& gateway, std::uint64_t seed) {
    MultichoiceRun run;
    const std::string model = gateway.model_id();
    static const char* kSlotNames[4] = {"option_a", "option_b", "option_c", "option_d"};

    for (const auto& g : groups) {
        MultichoiceItem item;
        item.group_id = g.id;
        item.model_id = model;

        auto l21 = gateway.complete("multichoice_paraphrase", {{"reference", g.r2}});
        if (l21.status != llm::Status::Ok) {
            item.exclude_reason = status_reason("paraphrase", l21.status);
            run.items.push_back(std::move(item));
            continue;
        }
        auto l22 = gateway.complete("multichoice_literalize", {{"metaphor", g.m2}});
        if (l22.status != llm::Status::Ok) {
            item.exclude_reason = status_reason("literalize", l22.status);
            run.items.push_back(std::move(item));
            continue;
        }

        std::vector<std::string> raw_options = {g.r1, std::get<std::string>(l21.parsed),
                                                std::get<std::string>(l22.parsed), g.r2};
        std::vector<size_t> order = {0, 1, 2, 3};
        DetRng rng(derive_seed(seed, g.id));
        rng.shuffle(order);
        item.options.resize(4);
        for (size_t pos = 0; pos < 4; ++pos) {
            item.options[pos] = raw_options[order[pos]];
            if (order[pos] == 0) item.correct_index = static_cast<int>(pos);
        }

        std::map<std::string, std::string> slots = {{"metaphor", g.m1}};
        for (size_t pos = 0; pos < 4; ++pos) slots[kSlotNames[pos]] = item.options[pos];
        auto sel = gateway.complete("multichoice_select", slots);
        if (sel.status != llm::Status::Ok) {
            item.exclude_reason = status_reason("selection", sel.status);
            run.items.push_back(std::move(item));
            continue;
        }
        item.chosen_index = std::get<int>(sel.parsed);
        item.correct = (*item.chosen_index == item.correct_index);
        item.scored = true;
        run.items.push_back(std::move(item));
    }
    run.summary = summarize_multichoice(run.items);
    return run;
}

// ---------------------------------------------------------------------------
// Imagination overlap

const char* to_string(Direction d) { return d == Direction::LM ? "lm" : "ml"; }

Direction direction_from_string(const std::string& s) {
    if (s == "lm") return Direction::LM;
    if (s == "ml") return Direction::ML;
    throw InvalidArgument("unknown direction: " + s);
}

const char* to_string(OverlapBasis b) {
    switch (b) {
        case OverlapBasis::SharedWord: return "shared_word";
        case OverlapBasis::MaxCosine: return "max_cosine";
        case OverlapBasis::AllOOV: return "all_oov";
    }
    return "all_oov";
}

OverlapBasis overlap_basis_from_string(const std::string& s) {
    if (s == "shared_word") return OverlapBasis::SharedWord;
    if (s == "max_cosine") return OverlapBasis::MaxCosine;
    if (s == "all_oov") return OverlapBasis::AllOOV;
    throw InvalidArgument("unknown overlap basis: " + s);
}

OverlapScore overlap_ratio(const std::vector<std::string>& set_a,
                           const std::vector<std::string>& set_b,
                           const emb::WordVectorTable& table) {
    if (set_a.empty() || set_b.empty())
        throw EmptySetError("overlap_ratio: empty word set");

    std::vector<std::string> a, b;
    a.reserve(set_a.size());
    b.reserve(set_b.size());
    for (const auto& w : set_a) a.push_back(util::lowercase(w));
    for (const auto& w : set_b) b.push_back(util::lowercase(w));

    for (const auto& wa : a)
        for (const auto& wb : b)
            if (wa == wb) return {1.0, OverlapBasis::SharedWord};

    bool any_pair = false;
    double best = -2.0;
    for (const auto& wa : a) {
        auto va = table.lookup(wa);
        if (!va) continue;
        for (const auto& wb : b) {
            auto vb = table.lookup(wb);
            if (!vb) continue;
            try {
                best = std::max(best, geometry::cosine(*va, *vb));
                any_pair = true;
            } catch (const ZeroVectorError&) {
                // a zero vector row carries no direction; treat as OOV
            }
        }
    }
    if (!any_pair) return {0.0, OverlapBasis::AllOOV};
    return {std::clamp(best, 0.0, 1.0), OverlapBasis::MaxCosine};
}

const std::vector<std::string> kHistogramBinLabels = {
    "1.0", "[0.8,1.0)", "[0.5,0.8)", "[0.2,0.5)", "[0.0,0.2)",
};

size_t histogram_bin(double ratio) {
    if (ratio >= 1.0) return 0;
    if (ratio >= 0.8) return 1;
    if (ratio >= 0.5) return 2;
    if (ratio >= 0.2) return 3;
    return 4;
}

ImaginationSummary summarize_imagination(const std::vector<OverlapResult>& items,
                                         double novelty_threshold) {
    ImaginationSummary s;
    s.histogram[Direction::LM] = std::vector<size_t>(kHistogramBinLabels.size(), 0);
    s.histogram[Direction::ML] = std::vector<size_t>(kHistogramBinLabels.size(), 0);

    struct Acc {
        double sum = 0.0;
        size_t n = 0;
    };
    std::map<std::pair<std::string, Direction>, Acc> acc;

    for (const auto& item : items) {
        if (s.model_id.empty()) s.model_id = item.model_id;
        if (!item.scored) {
            ++s.items_excluded;
            ++s.exclusions[item.exclude_reason];
            continue;
        }
        ++s.items_scored;
        auto add = [&](const std::string& scope) {
            auto& a = acc[{scope, item.direction}];
            a.sum += item.ratio;
            ++a.n;
        };
        add("all");
        add(std::string("genre:") + corpus::to_string(item.genre));
        if (item.novelty > novelty_threshold) add("novel");
        ++s.histogram[item.direction][histogram_bin(item.ratio)];
    }

    // fixed emission order so re-aggregation is byte-identical
    std::vector<std::string> scopes = {"all"};
    for (corpus::Genre g : {corpus::Genre::News, corpus::Genre::Fiction, corpus::Genre::Academic,
                            corpus::Genre::Conversation})
        scopes.push_back(std::string("genre:") + corpus::to_string(g));
    scopes.push_back("novel");

    for (const auto& scope : scopes) {
        for (Direction d : {Direction::LM, Direction::ML}) {
            ImaginationAggregate agg;
            agg.scope = scope;
            agg.direction = d;
            auto it = acc.find({scope, d});
            if (it != acc.end() && it->second.n > 0) {
                agg.count = it->second.n;
                agg.mean_overlap_x100 = 100.0 * it->second.sum / static_cast<double>(it->second.n);
            }
            s.aggregates.push_back(std::move(agg));
        }
    }
    return s;
}

ImaginationRun run_imagination(const std::vector<corpus::MunchRecord>& records,
                               llm::Gateway& gateway, const emb::WordVectorTable& table,
                               double novelty_threshold) {
    ImaginationRun run;
    const std::string model = gateway.model_id();

    for (const auto& rec : records) {
        const std::string& literal_word = rec.gold_substitutes.front();
        auto t = tokenize(rec.sentence);
        std::string literal_sentence;
        {
            auto tokens = t.tokens;
            tokens[static_cast<size_t>(rec.target_index)] = literal_word;
            literal_sentence = detokenize(tokens, t.terminal);
        }

        struct Side {
            Direction direction;
            std::string ctx_template, word_template;
            std::string sentence, word;
        };
        const std::array<Side, 2> sides = {
            Side{Direction::LM, "imagine_lm_context", "imagine_lm_word", rec.sentence,
                 rec.target_word},
            Side{Direction::ML, "imagine_ml_context", "imagine_ml_word", literal_sentence,
                 literal_word},
        };

        for (const auto& side : sides) {
            OverlapResult item;
            item.record_id = rec.id;
            item.model_id = model;
            item.direction = side.direction;
            item.genre = rec.genre;
            item.novelty = rec.novelty;

            auto ctx = gateway.complete(side.ctx_template,
                                        {{"sentence", side.sentence}, {"word", side.word}});
            if (ctx.status != llm::Status::Ok) {
                item.exclude_reason = status_reason("context", ctx.status);
                run.items.push_back(std::move(item));
                continue;
            }
            auto bare = gateway.complete(side.word_template, {{"word", side.word}});
            if (bare.status != llm::Status::Ok) {
                item.exclude_reason = status_reason("word_only", bare.status);
                run.items.push_back(std::move(item));
                continue;
            }
            item.set_context = std::get<std::vector<std::string>>(ctx.parsed);
            item.set_word_only = std::get<std::vector<std::string>>(bare.parsed);
            try {
                OverlapScore score = overlap_ratio(item.set_context, item.set_word_only, table);
                item.ratio = score.ratio;
                item.basis = score.basis;
                item.scored = true;
            } catch (const EmptySetError&) {
                item.exclude_reason = "empty_word_set";
            }
            run.items.push_back(std::move(item));
        }
    }
    run.summary = summarize_imagination(run.items, novelty_threshold);
    return run;
}

// ---------------------------------------------------------------------------
// Shuffle detection

const char* to_string(DetectLabel l) {
    switch (l) {
        case DetectLabel::Metaphor: return "metaphor";
        case DetectLabel::Literal: return "literal";
        case DetectLabel::Unparsed: return "unparsed";
    }
    return "unparsed";
}

DetectLabel detect_label_from_string(const std::string& s) {
    if (s == "metaphor") return DetectLabel::Metaphor;
    if (s == "literal") return DetectLabel::Literal;
    if (s == "unparsed") return DetectLabel::Unparsed;
    throw InvalidArgument("unknown detection label: " + s);
}

DetectionSummary summarize_detection(const std::vector<DetectionOutcome>& outcomes,
                                     const std::map<transforms::VariantKind, size_t>& skips,
                                     const std::vector<transforms::VariantKind>& kinds) {
    DetectionSummary s;
    std::map<transforms::VariantKind, DetectionKindSummary> by_kind;
    for (transforms::VariantKind k : kinds) {
        by_kind[k].kind = k;
        auto it = skips.find(k);
        if (it != skips.end()) by_kind[k].skipped = it->second;
    }
    std::map<transforms::VariantKind, size_t> correct;
    for (const auto& o : outcomes) {
        if (s.model_id.empty()) s.model_id = o.model_id;
        auto& row = by_kind[o.kind];
        row.kind = o.kind;
        if (o.label == DetectLabel::Unparsed) {
            ++row.excluded;
            continue;
        }
        ++row.scored;
        if (o.correct) ++correct[o.kind];
    }
    for (transforms::VariantKind k : kinds) {
        auto& row = by_kind[k];
        if (row.scored)
            row.accuracy_x100 =
                100.0 * static_cast<double>(correct[k]) / static_cast<double>(row.scored);
        s.kinds.push_back(row);
    }
    return s;
}

DetectionRun run_shuffle_detection(const std::vector<transforms::ShuffleVariant>& variants,
                                   const std::map<transforms::VariantKind, size_t>& skips,
                                   const std::vector<transforms::VariantKind>& kinds,
                                   llm::Gateway& gateway) {
    DetectionRun run;
    const std::string model = gateway.model_id();
    for (const auto& v : variants) {
        DetectionOutcome o;
        o.record_id = v.source_id;
        o.model_id = model;
        o.kind = v.kind;
        o.sentence = v.sentence();
        auto rec = gateway.complete("detect", {{"sentence", o.sentence}});
        if (rec.status == llm::Status::Ok) {
            o.label = std::get<llm::Detection>(rec.parsed) == llm::Detection::Metaphor
                          ? DetectLabel::Metaphor
                          : DetectLabel::Literal;
        } else {
            o.label = DetectLabel::Unparsed;
        }
        o.correct = (o.label == DetectLabel::Metaphor);
        run.outcomes.push_back(std::move(o));
    }
    run.summary = summarize_detection(run.outcomes, skips, kinds);
    return run;
}

}  // namespace metaprobe::experiments
