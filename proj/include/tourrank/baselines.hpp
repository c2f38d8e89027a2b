#pragma once
// Comparison re-rankers: sliding-window listwise reordering, repeated
// serial application of a re-ranker, and pointwise scoring. They share the
// tournament's document/judge plumbing; the ordering judge is the "sort all
// n labels" counterpart of the m-of-n selection judge.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tourrank/core.hpp"
#include "tourrank/cost.hpp"
#include "tourrank/judge.hpp"
#include "tourrank/rng.hpp"

namespace tourrank {

struct WindowSpec {
    int window = 20;
    int step = 10;
};

inline void check_window(const WindowSpec& spec, int n) {
    if (spec.step < 1 || spec.window < spec.step)
        throw std::invalid_argument("window needs 1 <= step <= window, got window=" +
                                    std::to_string(spec.window) + " step=" + std::to_string(spec.step));
    if (spec.window > n)
        throw std::invalid_argument("window " + std::to_string(spec.window) + " exceeds pool of " +
                                    std::to_string(n));
}

// Same shape as a selection request, with m = n: the judge must return a
// full ordering of every presented label.
using OrderingRequest = JudgeRequest;

inline OrderingRequest make_ordering_request(std::string query, const std::vector<Candidate>& presented) {
    OrderingRequest request = make_request(std::move(query), presented, 1);
    request.m = static_cast<int>(presented.size());
    return request;
}

inline void check_ordering_request(const OrderingRequest& request) {
    const int n = static_cast<int>(request.presented.size());
    if (n < 2) throw std::invalid_argument("ordering request needs at least 2 documents");
    if (request.m != n) throw std::invalid_argument("ordering request needs m = n");
    for (int i = 0; i < n; ++i) {
        if (request.presented[static_cast<std::size_t>(i)].label != i + 1)
            throw std::invalid_argument("ordering request labels must be 1..n in presentation order");
    }
}

class OrderingJudge {
public:
    virtual ~OrderingJudge() = default;
    // Returns all n labels, best first.
    virtual JudgeSelection order(const OrderingRequest& request) const = 0;
};

inline JudgeSelection oracle_order(const OrderingRequest& request, const GradeMap& grades) {
    check_ordering_request(request);
    std::vector<const LabeledDoc*> by_grade;
    by_grade.reserve(request.presented.size());
    for (const LabeledDoc& d : request.presented) by_grade.push_back(&d);
    std::sort(by_grade.begin(), by_grade.end(), [&](const LabeledDoc* a, const LabeledDoc* b) {
        const int ga = grade_of(grades, a->doc.doc_id);
        const int gb = grade_of(grades, b->doc.doc_id);
        if (ga != gb) return ga > gb;
        if (a->doc.initial_rank != b->doc.initial_rank) return a->doc.initial_rank < b->doc.initial_rank;
        return a->label < b->label;
    });
    JudgeSelection selection;
    selection.chosen_labels.reserve(by_grade.size());
    for (const LabeledDoc* d : by_grade) selection.chosen_labels.push_back(d->label);
    return selection;
}

// Oracle ordering with per-position corruption: each position is swapped
// with a uniformly random other position with probability epsilon. Seeded
// by request content, so replay does not depend on call order.
inline JudgeSelection noisy_order(const OrderingRequest& request, const GradeMap& grades,
                                  const NoiseSpec& noise) {
    JudgeSelection selection = oracle_order(request, grades);
    SplitMix64 rng(detail::request_stream(request, noise.seed));
    const std::size_t n = selection.chosen_labels.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.unit() >= noise.epsilon) continue;
        std::size_t j = static_cast<std::size_t>(rng.below(n - 1));
        if (j >= i) ++j;
        std::swap(selection.chosen_labels[i], selection.chosen_labels[j]);
    }
    return selection;
}

class OracleOrderingJudge : public OrderingJudge {
public:
    explicit OracleOrderingJudge(GradeMap grades) : grades_(std::move(grades)) {}
    JudgeSelection order(const OrderingRequest& request) const override {
        return oracle_order(request, grades_);
    }

private:
    GradeMap grades_;
};

class NoisyOrderingJudge : public OrderingJudge {
public:
    NoisyOrderingJudge(GradeMap grades, NoiseSpec noise) : grades_(std::move(grades)), noise_(noise) {}
    JudgeSelection order(const OrderingRequest& request) const override {
        return noisy_order(request, grades_, noise_);
    }

private:
    GradeMap grades_;
    NoiseSpec noise_;
};

// Conversational scaffold as for selection, but asking for a permutation of
// all n labels.
inline std::vector<ChatMessage> build_ordering_prompt(const OrderingRequest& request) {
    check_ordering_request(request);
    const int n = static_cast<int>(request.presented.size());
    std::vector<ChatMessage> messages;
    messages.reserve(static_cast<std::size_t>(2 * n + 4));

    messages.push_back({"system",
                        "You are an intelligent assistant that can compare multiple documents "
                        "based on their relevancy to the given query."});
    messages.push_back({"user",
                        "I will provide you with the given query and " + std::to_string(n) +
                            " documents. Consider the content of all the documents comprehensively "
                            "and rank all " + std::to_string(n) +
                            " documents from most to least relevant to the given query: " + request.query + "."});
    messages.push_back({"assistant", "Okay, please provide the documents."});
    for (const LabeledDoc& d : request.presented) {
        messages.push_back({"user", "Document " + std::to_string(d.label) + ": " + d.doc.text});
        messages.push_back({"assistant", "Received Document " + std::to_string(d.label) + "."});
    }
    messages.push_back({"user",
                        "The Query is: " + request.query + ". Now, you must output all " +
                            std::to_string(n) +
                            " documents ordered from most to least relevant to the Query using the "
                            "following format strictly, and nothing else. Don't output any "
                            "explanation, just the following format: \nDocument 3, ..., Document 1"});
    return messages;
}

// Window start positions, walking from the bottom of the list toward the
// top in steps of s, with a final window pinned at 0 so the head is always
// reordered. Count = ceil((n - window) / step) + 1.
inline std::vector<int> window_starts(int n, const WindowSpec& spec) {
    check_window(spec, n);
    std::vector<int> starts;
    for (int start = n - spec.window; start > 0; start -= spec.step) starts.push_back(start);
    starts.push_back(0);
    return starts;
}

struct RerankResult {
    std::vector<std::string> order; // doc_ids, best first
    CostLedger cost;
};

namespace detail {
inline std::vector<Candidate> in_initial_order(std::vector<Candidate> candidates) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.initial_rank < b.initial_rank;
    });
    return candidates;
}
} // namespace detail

// Each window's docs are reordered in place by the judge; windows run
// strictly in sequence because every window reads the previous one's
// output. Critical path = number of windows.
inline RerankResult sliding_window_rerank(const std::string& query,
                                          const std::vector<Candidate>& candidates,
                                          const WindowSpec& spec, const OrderingJudge& judge) {
    if (auto bad = validate_candidates(candidates)) throw std::invalid_argument(*bad);
    std::vector<Candidate> current = detail::in_initial_order(candidates);
    check_window(spec, static_cast<int>(current.size()));

    RerankResult result;
    const std::vector<int> starts = window_starts(static_cast<int>(current.size()), spec);
    for (std::size_t w = 0; w < starts.size(); ++w) {
        const std::size_t start = static_cast<std::size_t>(starts[w]);
        std::vector<Candidate> shown(current.begin() + static_cast<std::ptrdiff_t>(start),
                                     current.begin() + static_cast<std::ptrdiff_t>(start) + spec.window);
        OrderingRequest request = make_ordering_request(query, shown);
        JudgeSelection selection;
        try {
            selection = judge.order(request);
        } catch (const AuthFailure&) {
            throw;
        } catch (const JudgeUnavailable& e) {
            throw JudgeUnavailable("window " + std::to_string(w) + ": " + e.what());
        }
        for (std::size_t i = 0; i < selection.chosen_labels.size(); ++i)
            current[start + i] = shown[static_cast<std::size_t>(selection.chosen_labels[i] - 1)];
        result.cost = ledger_merge(
            result.cost, judge_call_ledger(spec.window, selection.transport_retries),
            MergeMode::sequential);
    }

    result.order.reserve(current.size());
    for (const Candidate& c : current) result.order.push_back(c.doc_id);
    return result;
}

struct TrajectoryResult {
    std::vector<std::vector<std::string>> orders; // one full order per iteration
    CostLedger cost;
};

// Applies `step` repeatedly, feeding each output order back in as the next
// initial order (ranks rewritten 1..N), and keeps the whole trajectory so
// quality-vs-iteration curves need no re-runs.
inline TrajectoryResult serial_rerank(
    const std::vector<Candidate>& candidates, int iterations,
    const std::function<RerankResult(const std::vector<Candidate>&)>& step) {
    if (iterations < 1) throw std::invalid_argument("need at least one iteration");
    if (auto bad = validate_candidates(candidates)) throw std::invalid_argument(*bad);

    std::map<std::string, const Candidate*> by_id;
    for (const Candidate& c : candidates) by_id[c.doc_id] = &c;

    TrajectoryResult result;
    std::vector<Candidate> current = detail::in_initial_order(candidates);
    for (int it = 0; it < iterations; ++it) {
        RerankResult pass = step(current);
        result.cost = ledger_merge(result.cost, pass.cost, MergeMode::sequential);
        current.clear();
        int rank = 1;
        for (const std::string& doc_id : pass.order) {
            Candidate c = *by_id.at(doc_id);
            c.initial_rank = rank++;
            current.push_back(std::move(c));
        }
        result.orders.push_back(std::move(pass.order));
    }
    return result;
}

enum class ScorerFailurePolicy { abort, score_as_minimum };

// Independent per-document scoring; any sort-compatible scorer works.
// Throwing scorers either abort the rerank or sink the doc to the bottom,
// by policy. All calls are independent, so the ledger depth is 1.
inline RerankResult pointwise_rerank(
    const std::string& query, const std::vector<Candidate>& candidates,
    const std::function<double(const std::string&, const Candidate&)>& scorer,
    ScorerFailurePolicy policy = ScorerFailurePolicy::abort) {
    if (auto bad = validate_candidates(candidates)) throw std::invalid_argument(*bad);

    struct Scored {
        const Candidate* doc;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    RerankResult result;
    for (const Candidate& c : candidates) {
        double s = 0.0;
        try {
            s = scorer(query, c);
            if (std::isnan(s)) throw std::invalid_argument("scorer returned NaN for '" + c.doc_id + "'");
        } catch (...) {
            if (policy == ScorerFailurePolicy::abort) throw;
            s = -std::numeric_limits<double>::infinity();
        }
        scored.push_back({&c, s});
        result.cost = ledger_merge(result.cost, judge_call_ledger(1, 0), MergeMode::parallel);
    }

    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc->initial_rank < b.doc->initial_rank;
    });
    result.order.reserve(scored.size());
    for (const Scored& s : scored) result.order.push_back(s.doc->doc_id);
    return result;
}

inline std::function<double(const std::string&, const Candidate&)> make_oracle_scorer(GradeMap grades) {
    return [grades = std::move(grades)](const std::string&, const Candidate& c) {
        return static_cast<double>(grade_of(grades, c.doc_id));
    };
}

// Grade plus a uniform perturbation in [-epsilon, +epsilon] scaled by the
// grade range, keyed by (seed, doc id) so scores replay identically.
inline std::function<double(const std::string&, const Candidate&)> make_noisy_scorer(GradeMap grades,
                                                                                     NoiseSpec noise) {
    int max_grade = 1;
    for (const auto& [doc_id, g] : grades) max_grade = std::max(max_grade, g);
    return [grades = std::move(grades), noise, max_grade](const std::string& query, const Candidate& c) {
        SplitMix64 rng(mix_seed(noise.seed, fnv1a(c.doc_id, fnv1a(query))));
        const double jitter = (rng.unit() * 2.0 - 1.0) * noise.epsilon * static_cast<double>(max_grade);
        return static_cast<double>(grade_of(grades, c.doc_id)) + jitter;
    };
}

} // namespace tourrank
