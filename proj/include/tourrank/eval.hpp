#pragma once
// NDCG@k, TREC-style qrels and run file I/O, and the initial-order
// perturbations used by the robustness experiments. All file formats are
// line-based; parse errors always carry the offending line number.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tourrank/core.hpp"
#include "tourrank/rng.hpp"

namespace tourrank {

using Qrels = std::map<std::string, GradeMap>; // query_id -> per-doc grades

struct RunEntry {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;

    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

struct RunFile {
    std::string tag = "run";
    std::map<std::string, std::vector<RunEntry>> per_query;

    friend bool operator==(const RunFile&, const RunFile&) = default;
};

// Exponential-gain DCG with log2 discount. The ideal ordering draws from
// the whole grade pool, not just the documents that made the ranking, so a
// ranking missing a relevant doc is penalized. IDCG = 0 means nothing
// relevant exists; the query scores 0 by convention.
inline double ndcg_at_k(const std::vector<std::string>& ranking, const GradeMap& grades, int k) {
    if (k < 1) throw std::invalid_argument("ndcg cutoff must be >= 1");

    double dcg = 0.0;
    const std::size_t depth = std::min(ranking.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < depth; ++i) {
        const int g = grade_of(grades, ranking[i]);
        dcg += (std::ldexp(1.0, g) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<int> ideal;
    ideal.reserve(grades.size());
    for (const auto& [doc_id, g] : grades) ideal.push_back(g);
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    double idcg = 0.0;
    const std::size_t ideal_depth = std::min(ideal.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ideal_depth; ++i)
        idcg += (std::ldexp(1.0, ideal[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);

    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

enum class PerturbMode { keep, shuffle, reverse };

inline std::string to_string(PerturbMode mode) {
    switch (mode) {
        case PerturbMode::keep: return "keep";
        case PerturbMode::shuffle: return "shuffle";
        case PerturbMode::reverse: return "reverse";
    }
    throw std::logic_error("unreachable");
}

inline PerturbMode parse_perturb_mode(const std::string& name) {
    if (name == "keep") return PerturbMode::keep;
    if (name == "shuffle") return PerturbMode::shuffle;
    if (name == "reverse") return PerturbMode::reverse;
    throw std::invalid_argument("unknown perturbation '" + name + "' (keep, shuffle, reverse)");
}

// Reorders the list and rewrites initial_rank to 1..N in the new order; the
// perturbed list plays the role of the retriever output downstream.
inline std::vector<Candidate> perturb_initial(std::vector<Candidate> candidates, PerturbMode mode,
                                              std::uint64_t seed) {
    switch (mode) {
        case PerturbMode::keep:
            break;
        case PerturbMode::reverse:
            std::reverse(candidates.begin(), candidates.end());
            break;
        case PerturbMode::shuffle: {
            SplitMix64 rng(seed);
            seeded_shuffle(candidates, rng);
            break;
        }
    }
    int rank = 1;
    for (Candidate& c : candidates) c.initial_rank = rank++;
    return candidates;
}

// Nearest double to the 6-decimal rendering of x. Scores pass through this
// before they are stored so writing and re-reading a run is lossless.
inline double quantize_score(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return std::strtod(buf, nullptr);
}

// Run-file score for a ranked doc: the accumulated points, plus a fraction
// below 1e-3 that encodes the initial-rank tie-break, so scores strictly
// follow the documented sort order without ever crossing a point boundary.
inline double run_score(int points, int initial_rank, int pool_size) {
    return quantize_score(static_cast<double>(points) +
                          static_cast<double>(pool_size - initial_rank) /
                              static_cast<double>(pool_size) * 1e-3);
}

namespace detail {

inline std::runtime_error parse_error(const std::string& path, int line, const std::string& message) {
    return std::runtime_error(path + ":" + std::to_string(line) + ": " + message);
}

inline long long field_as_int(const std::string& token, const std::string& path, int line,
                              const char* what) {
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(token, &used);
    } catch (const std::exception&) {
        throw parse_error(path, line, std::string(what) + " is not an integer: '" + token + "'");
    }
    if (used != token.size())
        throw parse_error(path, line, std::string(what) + " is not an integer: '" + token + "'");
    return value;
}

inline double field_as_real(const std::string& token, const std::string& path, int line,
                            const char* what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw parse_error(path, line, std::string(what) + " is not a number: '" + token + "'");
    }
    if (used != token.size())
        throw parse_error(path, line, std::string(what) + " is not a number: '" + token + "'");
    return value;
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> fields;
    std::string token;
    while (in >> token) fields.push_back(token);
    return fields;
}

inline std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace detail

// TREC qrels: `query_id 0 doc_id grade`, whitespace-separated. Blank lines
// are allowed; anything else malformed is an error.
inline Qrels read_qrels(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    Qrels qrels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string> fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 4)
            throw detail::parse_error(path, line_no,
                                      "expected 4 fields, got " + std::to_string(fields.size()));
        const long long grade = detail::field_as_int(fields[3], path, line_no, "grade");
        if (grade < 0) throw detail::parse_error(path, line_no, "grade must be >= 0");
        qrels[fields[0]][fields[2]] = static_cast<int>(grade);
    }
    return qrels;
}

// TREC run lines: `query_id Q0 doc_id rank score tag`. Entries are written
// query by query in rank order with %.6f scores.
inline void write_run(const std::string& path, const RunFile& run) {
    for (const auto& [qid, entries] : run.per_query) {
        double previous = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].rank != static_cast<int>(i) + 1)
                throw std::invalid_argument("run for query '" + qid + "' has rank " +
                                            std::to_string(entries[i].rank) + " at position " +
                                            std::to_string(i + 1));
            if (i > 0 && entries[i].score > previous)
                throw std::invalid_argument("run for query '" + qid + "' has increasing score at rank " +
                                            std::to_string(entries[i].rank));
            previous = entries[i].score;
        }
    }

    std::ofstream out = detail::open_for_write(path);
    char score_buf[64];
    for (const auto& [qid, entries] : run.per_query) {
        for (const RunEntry& e : entries) {
            std::snprintf(score_buf, sizeof(score_buf), "%.6f", e.score);
            out << qid << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << score_buf << ' ' << run.tag
                << '\n';
        }
    }
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline RunFile read_run(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    RunFile run;
    bool tag_seen = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::string> fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 6)
            throw detail::parse_error(path, line_no,
                                      "expected 6 fields, got " + std::to_string(fields.size()));
        RunEntry entry;
        entry.doc_id = fields[2];
        entry.rank = static_cast<int>(detail::field_as_int(fields[3], path, line_no, "rank"));
        entry.score = detail::field_as_real(fields[4], path, line_no, "score");

        std::vector<RunEntry>& entries = run.per_query[fields[0]];
        if (entry.rank != static_cast<int>(entries.size()) + 1)
            throw detail::parse_error(path, line_no,
                                      "rank " + std::to_string(entry.rank) + " breaks the 1..N order for query '" +
                                          fields[0] + "'");
        if (!entries.empty() && entry.score > entries.back().score)
            throw detail::parse_error(path, line_no, "score increases with rank");
        entries.push_back(std::move(entry));

        if (!tag_seen) {
            run.tag = fields[5];
            tag_seen = true;
        }
    }
    return run;
}

// Corpus: one JSON object per line with `doc_id` and `text` fields.
inline std::map<std::string, std::string> read_corpus(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    std::map<std::string, std::string> corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("doc_id") || !doc.contains("text") ||
            !doc["doc_id"].is_string() || !doc["text"].is_string())
            throw detail::parse_error(path, line_no, "expected {\"doc_id\": ..., \"text\": ...}");
        corpus[doc["doc_id"].get<std::string>()] = doc["text"].get<std::string>();
    }
    return corpus;
}

// Queries: `query_id<TAB>text`, one per line, order preserved.
inline std::vector<std::pair<std::string, std::string>> read_queries(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    std::vector<std::pair<std::string, std::string>> queries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw detail::parse_error(path, line_no, "expected 'query_id<TAB>text'");
        queries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return queries;
}

struct EvalReport {
    std::vector<int> ks;
    std::map<std::string, std::map<int, double>> per_query; // qid -> k -> NDCG@k
    std::map<int, double> mean;
    std::vector<std::string> skipped; // run queries with no qrels entry
};

// Unweighted arithmetic mean over the queries present in both run and
// qrels; queries without judgments are reported, not scored.
inline EvalReport evaluate(const RunFile& run, const Qrels& qrels, const std::vector<int>& ks) {
    if (ks.empty()) throw std::invalid_argument("need at least one NDCG cutoff");
    EvalReport report;
    report.ks = ks;

    for (const auto& [qid, entries] : run.per_query) {
        auto judged = qrels.find(qid);
        if (judged == qrels.end()) {
            report.skipped.push_back(qid);
            continue;
        }
        std::vector<std::string> ranking;
        ranking.reserve(entries.size());
        for (const RunEntry& e : entries) ranking.push_back(e.doc_id);
        for (int k : ks) report.per_query[qid][k] = ndcg_at_k(ranking, judged->second, k);
    }

    if (report.per_query.empty())
        throw std::runtime_error("no run query has qrels judgments; nothing to evaluate");

    for (int k : ks) {
        double total = 0.0;
        for (const auto& [qid, by_k] : report.per_query) total += by_k.at(k);
        report.mean[k] = total / static_cast<double>(report.per_query.size());
    }
    return report;
}

} // namespace tourrank
