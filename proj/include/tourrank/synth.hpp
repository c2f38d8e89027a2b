#pragma once
// Seeded synthetic benchmarks: per-query document pools with drawn
// relevance grades, plus writers for the corpus/query/qrels/run file
// formats. Document text embeds the doc id and neutral filler only; grades
// live exclusively in the qrels, so no judge can cheat by reading them.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tourrank/core.hpp"
#include "tourrank/eval.hpp"
#include "tourrank/rng.hpp"

namespace tourrank {

struct GradeDistribution {
    // grade -> probability mass; normalized at draw time.
    std::map<int, double> weights = {{0, 0.50}, {1, 0.25}, {2, 0.15}, {3, 0.10}};
    // All-distinct grades (pool_size..1, randomly permuted over docs) give a
    // strict total order, which exactness experiments need.
    bool distinct = false;
};

struct SynthSpec {
    int num_queries = 1;
    int pool_size = 100;
    GradeDistribution grades;
    std::uint64_t seed = 0;
};

struct SynthDataset {
    std::vector<std::pair<std::string, std::string>> queries; // qid, text
    std::map<std::string, std::string> corpus;                // doc_id -> text
    Qrels qrels;
    RunFile candidates; // initial retrieval order = true grade order, ranks 1..N
};

namespace detail {

inline std::string zero_pad(int value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width)
        digits.insert(0, static_cast<std::size_t>(width - static_cast<int>(digits.size())), '0');
    return digits;
}

inline int draw_grade(const std::map<int, double>& weights, SplitMix64& rng) {
    double total = 0.0;
    for (const auto& [grade, w] : weights) {
        if (w < 0.0) throw std::invalid_argument("grade weights must be >= 0");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("grade weights must not all be zero");
    double u = rng.unit() * total;
    for (const auto& [grade, w] : weights) {
        u -= w;
        if (u < 0.0) return grade;
    }
    return weights.rbegin()->first; // u landed on the upper boundary
}

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "archive", "basin",  "cedar",   "delta",  "ember",  "fathom", "garnet", "harbor",
        "inlet",   "juniper", "kiln",   "lantern", "meadow", "nectar", "orchard", "prairie",
        "quarry",  "ridge",  "saffron", "thicket", "umber",  "vellum", "willow", "zenith"};
    return words;
}

} // namespace detail

// Deterministic in every byte for a fixed spec: per-query streams are keyed
// by (seed, query index), per-doc filler by a further split.
inline SynthDataset make_synthetic_dataset(const SynthSpec& spec) {
    if (spec.num_queries < 1) throw std::invalid_argument("need at least one query");
    if (spec.pool_size < 2) throw std::invalid_argument("pool size must be >= 2");

    SynthDataset dataset;
    dataset.candidates.tag = "initial";
    const int qid_width = static_cast<int>(std::to_string(spec.num_queries).size());
    const int doc_width = static_cast<int>(std::to_string(spec.pool_size).size());

    for (int q = 0; q < spec.num_queries; ++q) {
        const std::string qid = "q" + detail::zero_pad(q + 1, qid_width);
        dataset.queries.emplace_back(qid, "Tell me about topic " + qid + ".");
        SplitMix64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(q)));

        std::vector<int> grades(static_cast<std::size_t>(spec.pool_size));
        if (spec.grades.distinct) {
            for (int d = 0; d < spec.pool_size; ++d)
                grades[static_cast<std::size_t>(d)] = spec.pool_size - d;
            seeded_shuffle(grades, rng);
        } else {
            for (int& g : grades) g = detail::draw_grade(spec.grades.weights, rng);
        }

        struct DocRef {
            std::string doc_id;
            int grade;
            int created;
        };
        std::vector<DocRef> docs;
        docs.reserve(static_cast<std::size_t>(spec.pool_size));
        for (int d = 0; d < spec.pool_size; ++d) {
            const std::string doc_id = qid + "-d" + detail::zero_pad(d + 1, doc_width);
            std::string text = "Passage " + doc_id + " on topic " + qid + ":";
            const std::vector<std::string>& words = detail::filler_words();
            for (int w = 0; w < 12; ++w) text += " " + words[static_cast<std::size_t>(rng.below(words.size()))];
            text += ".";
            dataset.corpus[doc_id] = std::move(text);
            dataset.qrels[qid][doc_id] = grades[static_cast<std::size_t>(d)];
            docs.push_back({doc_id, grades[static_cast<std::size_t>(d)], d});
        }

        // True order: grade descending, creation index ascending.
        std::sort(docs.begin(), docs.end(), [](const DocRef& a, const DocRef& b) {
            if (a.grade != b.grade) return a.grade > b.grade;
            return a.created < b.created;
        });
        std::vector<RunEntry>& entries = dataset.candidates.per_query[qid];
        entries.reserve(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) {
            RunEntry entry;
            entry.doc_id = docs[i].doc_id;
            entry.rank = static_cast<int>(i) + 1;
            entry.score = quantize_score(
                static_cast<double>(spec.pool_size - static_cast<int>(i)) /
                static_cast<double>(spec.pool_size));
            entries.push_back(std::move(entry));
        }
    }
    return dataset;
}

// Joins a run file's per-query ordering with corpus text to build engine
// input; the run's ranks become the initial ranks.
inline std::vector<Candidate> assemble_candidates(const RunFile& run,
                                                  const std::map<std::string, std::string>& corpus,
                                                  const std::string& qid) {
    auto it = run.per_query.find(qid);
    if (it == run.per_query.end())
        throw std::invalid_argument("no candidates listed for query '" + qid + "'");
    std::vector<Candidate> candidates;
    candidates.reserve(it->second.size());
    for (const RunEntry& e : it->second) {
        auto doc = corpus.find(e.doc_id);
        if (doc == corpus.end())
            throw std::invalid_argument("candidate doc '" + e.doc_id + "' is missing from the corpus");
        candidates.push_back({e.doc_id, doc->second, e.rank});
    }
    return candidates;
}

inline void write_corpus(const std::string& path, const std::map<std::string, std::string>& corpus) {
    std::ofstream out = detail::open_for_write(path);
    for (const auto& [doc_id, text] : corpus) {
        nlohmann::json doc;
        doc["doc_id"] = doc_id;
        doc["text"] = text;
        out << doc.dump() << '\n';
    }
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline void write_queries(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& queries) {
    std::ofstream out = detail::open_for_write(path);
    for (const auto& [qid, text] : queries) out << qid << '\t' << text << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline void write_qrels(const std::string& path, const Qrels& qrels) {
    std::ofstream out = detail::open_for_write(path);
    for (const auto& [qid, grades] : qrels)
        for (const auto& [doc_id, grade] : grades) out << qid << " 0 " << doc_id << ' ' << grade << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace tourrank
