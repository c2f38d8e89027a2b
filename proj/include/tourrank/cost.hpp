#pragma once
// Cost accounting in documents and judge calls, not tokens or dollars.
// Ledgers are accumulated per task and merged at join points; `depth` is the
// longest chain of sequentially dependent judge calls, which makes "time
// complexity" a measurable integer. Analytic models mirror the same
// quantities for five method families so a run can be audited against its
// predicted cost.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "tourrank/core.hpp"

namespace tourrank {

struct CostLedger {
    std::int64_t invocations = 0; // judge calls issued
    std::int64_t docs_sent = 0;   // documents placed in prompts
    std::int64_t depth = 0;       // critical-path length in judge calls
    std::int64_t retries = 0;     // transport retries (live judge only)

    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

enum class MergeMode { parallel, sequential };

// Counts always add; depth takes max for parallel joins, sum for serial ones.
inline CostLedger ledger_merge(const CostLedger& a, const CostLedger& b, MergeMode mode) {
    CostLedger out;
    out.invocations = a.invocations + b.invocations;
    out.docs_sent = a.docs_sent + b.docs_sent;
    out.retries = a.retries + b.retries;
    out.depth = mode == MergeMode::parallel ? std::max(a.depth, b.depth) : a.depth + b.depth;
    return out;
}

// Ledger of a single judge call presenting `docs` documents.
inline CostLedger judge_call_ledger(int docs, int retries = 0) {
    return CostLedger{1, docs, 1, retries};
}

enum class CostMethod { pointwise, prp_allpair, setwise_bubblesort, sliding_window, tourrank };

inline std::string to_string(CostMethod m) {
    switch (m) {
        case CostMethod::pointwise: return "pointwise";
        case CostMethod::prp_allpair: return "prp_allpair";
        case CostMethod::setwise_bubblesort: return "setwise_bubblesort";
        case CostMethod::sliding_window: return "sliding_window";
        case CostMethod::tourrank: return "tourrank";
    }
    return "?";
}

inline std::optional<CostMethod> parse_cost_method(const std::string& name) {
    if (name == "pointwise") return CostMethod::pointwise;
    if (name == "prp_allpair") return CostMethod::prp_allpair;
    if (name == "setwise_bubblesort") return CostMethod::setwise_bubblesort;
    if (name == "sliding_window") return CostMethod::sliding_window;
    if (name == "tourrank") return CostMethod::tourrank;
    return std::nullopt;
}

struct AnalyticParams {
    // setwise_bubblesort: rank the top `top_k` with `per_prompt` docs per call
    std::optional<int> top_k;
    std::optional<int> per_prompt;
    // sliding_window
    std::optional<int> window;
    std::optional<int> step;
    // tourrank
    const TournamentSchedule* schedule = nullptr;
    std::optional<int> rounds;
};

// Exact docs/depth prediction plus the literature's closed-form
// approximations as annotations, for side-by-side reporting.
struct AnalyticCost {
    std::int64_t docs_sent = 0;
    std::int64_t depth = 0;
    std::map<std::string, double> annotations;
};

inline AnalyticCost analytic_cost(CostMethod method, int n, const AnalyticParams& params = {}) {
    if (n < 1) throw std::invalid_argument("analytic_cost: n must be >= 1");
    AnalyticCost out;
    switch (method) {
        case CostMethod::pointwise:
            out.docs_sent = n;
            out.depth = 1;
            return out;
        case CostMethod::prp_allpair:
            out.docs_sent = static_cast<std::int64_t>(n) * n - n;
            out.depth = 1;
            out.annotations["pairs"] = static_cast<double>(n) * (n - 1) / 2.0;
            return out;
        case CostMethod::setwise_bubblesort: {
            if (!params.top_k || !params.per_prompt)
                throw std::invalid_argument("analytic_cost: setwise_bubblesort needs top_k and per_prompt");
            const int k = *params.top_k;
            const int c = *params.per_prompt;
            if (k < 1 || c < 2) throw std::invalid_argument("analytic_cost: setwise needs top_k >= 1, per_prompt >= 2");
            const std::int64_t passes = static_cast<std::int64_t>(k) * ((n + c - 2) / (c - 1));
            out.docs_sent = passes * c;
            out.depth = passes; // every comparison depends on the previous one
            return out;
        }
        case CostMethod::sliding_window: {
            if (!params.window || !params.step)
                throw std::invalid_argument("analytic_cost: sliding_window needs window and step");
            const int w = *params.window;
            const int s = *params.step;
            if (w > n || s < 1 || s > w)
                throw std::invalid_argument("analytic_cost: need 1 <= step <= window <= n");
            // Exact enumeration of window starts: n-w, n-w-s, ..., clamped to 0.
            std::int64_t windows = 0;
            for (int start = n - w;; start -= s) {
                if (start < 0) start = 0;
                ++windows;
                if (start == 0) break;
            }
            out.docs_sent = windows * w;
            out.depth = windows; // windows are strictly sequential
            out.annotations["closed_form_docs"] = static_cast<double>(w) * (n - w) / s;
            out.annotations["closed_form_depth"] = static_cast<double>(n - w) / s;
            out.annotations["approx_docs_2n"] = 2.0 * n;
            return out;
        }
        case CostMethod::tourrank: {
            if (!params.schedule) throw std::invalid_argument("analytic_cost: tourrank needs a schedule");
            const int r = params.rounds.value_or(params.schedule->rounds);
            if (r < 1) throw std::invalid_argument("analytic_cost: tourrank needs rounds >= 1");
            std::int64_t docs_per_round = 0;
            for (const StageSpec& s : params.schedule->stages) docs_per_round += s.n_in;
            out.docs_sent = docs_per_round * r;
            out.depth = static_cast<std::int64_t>(params.schedule->stages.size());
            out.annotations["approx_docs_2rn"] = 2.0 * r * n;
            return out;
        }
    }
    throw std::invalid_argument("analytic_cost: unknown method");
}

// Measured-vs-predicted comparison for docs_sent and depth.
struct AuditReport {
    bool docs_match = false;
    bool depth_match = false;
    std::int64_t docs_delta = 0;  // measured - predicted
    std::int64_t depth_delta = 0;

    bool ok() const { return docs_match && depth_match; }
};

inline AuditReport ledger_audit(const CostLedger& measured, const AnalyticCost& predicted) {
    AuditReport report;
    report.docs_delta = measured.docs_sent - predicted.docs_sent;
    report.depth_delta = measured.depth - predicted.depth;
    report.docs_match = report.docs_delta == 0;
    report.depth_match = report.depth_delta == 0;
    return report;
}

} // namespace tourrank
