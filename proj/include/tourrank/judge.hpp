#pragma once
// The group-selection contract: "pick the m most relevant of these n
// documents". Implementations here are the ground-truth oracle and a noisy
// oracle for desk-scale experiments; the live chat-endpoint judge lives in
// llm_judge.hpp. Prompt construction and response parsing are plain
// functions so the live judge and the tests share them.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tourrank/core.hpp"
#include "tourrank/rng.hpp"

namespace tourrank {

struct LabeledDoc {
    int label = 0; // 1..n, assigned in presentation order
    Candidate doc;
};

struct JudgeRequest {
    std::string query;
    std::vector<LabeledDoc> presented;
    int m = 0;
};

struct JudgeSelection {
    std::vector<int> chosen_labels;   // m distinct labels in 1..n
    bool repair_applied = false;
    std::string raw_response;         // live judge only, kept for audit
    int transport_retries = 0;
};

// Probability of corrupting each chosen slot, plus the stream seed.
struct NoiseSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

class Judge {
public:
    virtual ~Judge() = default;
    // Must tolerate concurrent calls and, except for the live judge, be a
    // pure function of (request, construction-time state).
    virtual JudgeSelection select(const JudgeRequest& request) const = 0;
};

// Raised when a judge cannot produce an answer (transport failure after the
// retry cap). Selection contract violations cannot happen; the parser repairs.
class JudgeUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AuthFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Labels 1..n in the order the docs are given.
inline JudgeRequest make_request(std::string query, const std::vector<Candidate>& presented, int m) {
    JudgeRequest request;
    request.query = std::move(query);
    request.m = m;
    request.presented.reserve(presented.size());
    int label = 1;
    for (const Candidate& c : presented) request.presented.push_back({label++, c});
    return request;
}

inline void check_request(const JudgeRequest& request) {
    const int n = static_cast<int>(request.presented.size());
    if (n < 2) throw std::invalid_argument("judge request needs at least 2 documents");
    if (request.m < 1 || request.m >= n)
        throw std::invalid_argument("judge request needs 1 <= m < n, got m=" + std::to_string(request.m) +
                                    " n=" + std::to_string(n));
    for (int i = 0; i < n; ++i) {
        if (request.presented[static_cast<std::size_t>(i)].label != i + 1)
            throw std::invalid_argument("judge request labels must be 1..n in presentation order");
    }
}

// Ground-truth judge: the m highest grades win; ties go to the lower
// initial rank, then the lower label. Fully deterministic, which makes
// perfect-oracle runs exact.
inline JudgeSelection oracle_select(const JudgeRequest& request, const GradeMap& grades) {
    check_request(request);
    std::vector<const LabeledDoc*> order;
    order.reserve(request.presented.size());
    for (const LabeledDoc& d : request.presented) order.push_back(&d);
    std::sort(order.begin(), order.end(), [&](const LabeledDoc* a, const LabeledDoc* b) {
        const int ga = grade_of(grades, a->doc.doc_id);
        const int gb = grade_of(grades, b->doc.doc_id);
        if (ga != gb) return ga > gb;
        if (a->doc.initial_rank != b->doc.initial_rank) return a->doc.initial_rank < b->doc.initial_rank;
        return a->label < b->label;
    });
    JudgeSelection selection;
    selection.chosen_labels.reserve(static_cast<std::size_t>(request.m));
    for (int i = 0; i < request.m; ++i)
        selection.chosen_labels.push_back(order[static_cast<std::size_t>(i)]->label);
    return selection;
}

namespace detail {
// Per-request stream key: same (request, seed) always replays identically,
// independent of call order across threads.
inline std::uint64_t request_stream(const JudgeRequest& request, std::uint64_t seed) {
    std::uint64_t h = fnv1a(request.query);
    h = fnv1a_u64(static_cast<std::uint64_t>(request.m), h);
    for (const LabeledDoc& d : request.presented) {
        h = fnv1a_u64(static_cast<std::uint64_t>(d.label), h);
        h = fnv1a(d.doc.doc_id, h);
        h = fnv1a_u64(static_cast<std::uint64_t>(d.doc.initial_rank), h);
    }
    return mix_seed(seed, h);
}
} // namespace detail

// Oracle choice with fallibility: each chosen slot is independently swapped
// with probability epsilon for a uniformly random not-chosen label. The
// displaced label returns to the pool, so later swaps may pick it up again.
inline JudgeSelection noisy_select(const JudgeRequest& request, const GradeMap& grades,
                                   const NoiseSpec& noise) {
    JudgeSelection selection = oracle_select(request, grades);
    SplitMix64 rng(detail::request_stream(request, noise.seed));

    std::vector<int> pool; // labels not currently chosen, ascending
    std::vector<bool> chosen(request.presented.size() + 1, false);
    for (int label : selection.chosen_labels) chosen[static_cast<std::size_t>(label)] = true;
    for (int label = 1; label <= static_cast<int>(request.presented.size()); ++label)
        if (!chosen[static_cast<std::size_t>(label)]) pool.push_back(label);

    for (int& slot : selection.chosen_labels) {
        if (rng.unit() >= noise.epsilon) continue;
        const std::size_t j = static_cast<std::size_t>(rng.below(pool.size()));
        std::swap(slot, pool[j]);
    }
    return selection;
}

class OracleJudge : public Judge {
public:
    explicit OracleJudge(GradeMap grades) : grades_(std::move(grades)) {}
    JudgeSelection select(const JudgeRequest& request) const override {
        return oracle_select(request, grades_);
    }

private:
    GradeMap grades_;
};

class NoisyJudge : public Judge {
public:
    NoisyJudge(GradeMap grades, NoiseSpec noise) : grades_(std::move(grades)), noise_(noise) {}
    JudgeSelection select(const JudgeRequest& request) const override {
        return noisy_select(request, grades_, noise_);
    }

private:
    GradeMap grades_;
    NoiseSpec noise_;
};

struct ChatMessage {
    std::string role;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

// The conversational selection prompt: system role, a preamble naming n, m
// and the query, one user/assistant exchange per document, then the final
// instruction pinning the output format. 2n + 4 messages for n documents.
inline std::vector<ChatMessage> build_prompt(const JudgeRequest& request) {
    check_request(request);
    const int n = static_cast<int>(request.presented.size());
    std::vector<ChatMessage> messages;
    messages.reserve(static_cast<std::size_t>(2 * n + 4));

    messages.push_back({"system",
                        "You are an intelligent assistant that can compare multiple documents "
                        "based on their relevancy to the given query."});
    messages.push_back({"user",
                        "I will provide you with the given query and " + std::to_string(n) +
                            " documents. Consider the content of all the documents comprehensively "
                            "and select the " + std::to_string(request.m) +
                            " documents that are most relevant to the given query: " + request.query + "."});
    messages.push_back({"assistant", "Okay, please provide the documents."});
    for (const LabeledDoc& d : request.presented) {
        messages.push_back({"user", "Document " + std::to_string(d.label) + ": " + d.doc.text});
        messages.push_back({"assistant", "Received Document " + std::to_string(d.label) + "."});
    }
    messages.push_back({"user",
                        "The Query is: " + request.query + ". Now, you must output the top " +
                            std::to_string(request.m) +
                            " documents that are most relevant to the Query using the following "
                            "format strictly, and nothing else. Don't output any explanation, "
                            "just the following format: \nDocument 3, ..., Document 1"});
    return messages;
}

// Total parser for judge replies. Scans left to right for "Document <int>"
// tokens, keeps the first occurrence of each label, drops labels outside
// 1..n, truncates to m, and tops up from the unchosen labels in
// presentation order when the reply came up short. repair_applied records
// whether anything had to be discarded or filled.
inline JudgeSelection parse_selection(std::string_view raw, int n, int m) {
    if (n < 1 || m < 1 || m > n)
        throw std::invalid_argument("parse_selection: need 1 <= m <= n");

    static constexpr std::string_view kToken = "Document";
    JudgeSelection selection;
    std::vector<bool> taken(static_cast<std::size_t>(n) + 1, false);
    bool dropped = false;

    std::size_t pos = 0;
    while ((pos = raw.find(kToken, pos)) != std::string_view::npos) {
        std::size_t cursor = pos + kToken.size();
        while (cursor < raw.size() && (raw[cursor] == ' ' || raw[cursor] == '\t')) ++cursor;
        long long value = 0;
        std::size_t digits = 0;
        while (cursor < raw.size() && raw[cursor] >= '0' && raw[cursor] <= '9') {
            if (digits < 10) value = value * 10 + (raw[cursor] - '0');
            ++digits;
            ++cursor;
        }
        pos = cursor;
        if (digits == 0) continue; // "Document" without a number
        if (digits >= 10 || value < 1 || value > n) {
            dropped = true; // out of range
            continue;
        }
        const int label = static_cast<int>(value);
        if (taken[static_cast<std::size_t>(label)]) {
            dropped = true; // duplicate mention
            continue;
        }
        if (static_cast<int>(selection.chosen_labels.size()) == m) {
            dropped = true; // over-delivered, truncate
            continue;
        }
        taken[static_cast<std::size_t>(label)] = true;
        selection.chosen_labels.push_back(label);
    }

    bool filled = false;
    for (int label = 1; label <= n && static_cast<int>(selection.chosen_labels.size()) < m; ++label) {
        if (taken[static_cast<std::size_t>(label)]) continue;
        taken[static_cast<std::size_t>(label)] = true;
        selection.chosen_labels.push_back(label);
        filled = true;
    }

    selection.repair_applied = dropped || filled;
    return selection;
}

} // namespace tourrank
