#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metaprobe/corpus.hpp"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/experiments.hpp"
#include "metaprobe/geometry.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/tokenizer.hpp"
#include "metaprobe/transforms.hpp"
#include "metaprobe/util.hpp"

namespace py = pybind11;
using namespace metaprobe;

namespace {

geometry::Vec to_vec(const std::vector<double>& v) {
    geometry::Vec out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

std::vector<double> from_vec(const geometry::Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

corpus::MunchRecord record_for(const std::string& sentence, int target_index) {
    auto t = tokenize(sentence);
    if (target_index < 0 || static_cast<size_t>(target_index) >= t.tokens.size())
        throw InvalidArgument("target_index out of range");
    corpus::MunchRecord rec;
    rec.id = "adhoc";
    rec.sentence = sentence;
    rec.target_index = target_index;
    rec.target_word = t.tokens[static_cast<size_t>(target_index)];
    rec.gold_substitutes = {rec.target_word};
    return rec;
}

py::dict outcome_dict(const transforms::VariantOutcome& outcome) {
    py::dict d;
    if (const auto* skip = std::get_if<transforms::Skip>(&outcome)) {
        d["kind"] = std::string(transforms::to_string(skip->kind));
        d["skip_reason"] = std::string(transforms::to_string(skip->reason));
        return d;
    }
    const auto& v = std::get<transforms::ShuffleVariant>(outcome);
    d["kind"] = std::string(transforms::to_string(v.kind));
    d["sentence"] = v.sentence();
    d["tokens"] = v.tokens;
    d["terminal"] = v.terminal;
    d["target_index_after"] = v.target_index_after;
    if (v.seed) d["seed"] = *v.seed;
    if (v.substituted_word) d["substituted_word"] = *v.substituted_word;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "metaphor comprehension probing harness: core operations";

    // text utilities
    m.def("normalize_text", &util::normalize_text,
          "NFC + trim + whitespace collapse, as applied before hashing or embedding");
    m.def("sha256_hex", &util::sha256_hex);
    m.def("tokenize", [](const std::string& sentence) {
        auto t = tokenize(sentence);
        return py::make_tuple(t.tokens, t.terminal);
    });
    m.def("detokenize", &detokenize, py::arg("tokens"), py::arg("terminal"));

    // model-output parsing
    m.def("parse_word_list", &llm::parse_word_list, py::arg("raw"), py::arg("expected_n") = 20);
    m.def("parse_yes_no", [](const std::string& raw) -> std::optional<std::string> {
        auto d = llm::parse_yes_no(raw);
        if (!d) return std::nullopt;
        return std::string(*d == llm::Detection::Metaphor ? "metaphor" : "literal");
    });
    m.def("parse_choice", &llm::parse_choice, py::arg("raw"), py::arg("n_options") = 4);
    m.def("parse_sentence", &llm::parse_sentence);

    // interpretation-plane geometry
    m.def("cosine", [](const std::vector<double>& u, const std::vector<double>& v) {
        return geometry::cosine(to_vec(u), to_vec(v));
    });
    m.def("euclidean", [](const std::vector<double>& u, const std::vector<double>& v) {
        return geometry::euclidean(to_vec(u), to_vec(v));
    });
    m.def("adjacency_sum",
          [](const std::vector<double>& mm, const std::vector<double>& r1,
             const std::vector<double>& r2) {
              return geometry::adjacency_sum(to_vec(mm), to_vec(r1), to_vec(r2));
          },
          py::arg("m"), py::arg("r1"), py::arg("r2"));
    m.def("average_ranks", &geometry::average_ranks);
    m.def("spearman", &geometry::spearman, py::arg("xs"), py::arg("ys"));
    m.def(
        "spatial_scores",
        [](const std::vector<double>& r1, const std::vector<double>& r2,
           const std::vector<double>& s, const std::vector<double>& mm, const std::string& mode,
           const std::string& angle) {
            geometry::GeometryOptions opts;
            opts.mode = geometry::plane_mode_from_string(mode);
            opts.angle = geometry::angle_method_from_string(angle);
            auto sc = geometry::spatial_scores(to_vec(r1), to_vec(r2), to_vec(s), to_vec(mm), opts);
            py::dict d;
            d["d_p"] = sc.d_p;
            d["cos_theta"] = sc.cos_theta;
            d["ad"] = sc.ad;
            d["d_o"] = sc.d_o ? py::cast(*sc.d_o) : py::none();
            d["degenerate"] = std::string(geometry::to_string(sc.degenerate));
            return d;
        },
        py::arg("r1"), py::arg("r2"), py::arg("s"), py::arg("m"),
        py::arg("mode") = "centered", py::arg("angle") = "dihedral");

    // imagination overlap
    py::class_<emb::WordVectorTable>(m, "WordVectorTable")
        .def_static("load", &emb::WordVectorTable::load, py::arg("path"), py::arg("expected_dim"))
        .def("contains", &emb::WordVectorTable::contains)
        .def("lookup",
             [](const emb::WordVectorTable& t,
                const std::string& word) -> std::optional<std::vector<double>> {
                 auto v = t.lookup(word);
                 if (!v) return std::nullopt;
                 return from_vec(*v);
             })
        .def("size", &emb::WordVectorTable::size)
        .def("dim", &emb::WordVectorTable::dim)
        .def("skipped_lines", &emb::WordVectorTable::skipped_lines);
    m.def(
        "overlap_ratio",
        [](const std::vector<std::string>& set_a, const std::vector<std::string>& set_b,
           const emb::WordVectorTable& table) {
            auto s = experiments::overlap_ratio(set_a, set_b, table);
            return py::make_tuple(s.ratio, std::string(experiments::to_string(s.basis)));
        },
        py::arg("set_a"), py::arg("set_b"), py::arg("table"));
    m.def("histogram_bin", &experiments::histogram_bin);

    // syntactic variants
    py::class_<transforms::Lexicon>(m, "Lexicon")
        .def_static("load", &transforms::Lexicon::load, py::arg("path"))
        .def("size", &transforms::Lexicon::size);
    m.def(
        "shuffle_variant",
        [](const std::string& sentence, int target_index, const std::string& kind,
           std::uint64_t seed) {
            auto rec = record_for(sentence, target_index);
            auto k = transforms::variant_kind_from_string(kind);
            switch (k) {
                case transforms::VariantKind::Original:
                    return outcome_dict(transforms::original_variant(rec));
                case transforms::VariantKind::Random:
                    return outcome_dict(transforms::random_shuffle(rec, seed));
                case transforms::VariantKind::Pos:
                    throw InvalidArgument("pos substitution needs a lexicon; use pos_substitute");
                default:
                    return outcome_dict(transforms::reposition(rec, k, seed));
            }
        },
        py::arg("sentence"), py::arg("target_index"), py::arg("kind"), py::arg("seed") = 0);
    m.def(
        "pos_substitute",
        [](const std::string& sentence, int target_index, const transforms::Lexicon& lexicon) {
            return outcome_dict(transforms::pos_substitute(record_for(sentence, target_index),
                                                           lexicon));
        },
        py::arg("sentence"), py::arg("target_index"), py::arg("lexicon"));
}
