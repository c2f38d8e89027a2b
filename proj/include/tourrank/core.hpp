#pragma once
// Domain types shared by every other header: candidates, the stage ladder,
// and the per-round / accumulated points bookkeeping.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tourrank {

// A document paired with the rank its first-stage retriever assigned
// (1 = best). The rank is stored explicitly rather than implied by list
// position so perturbation experiments can rewrite it independently.
struct Candidate {
    std::string doc_id;
    std::string text;
    int initial_rank = 0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Ground truth: doc_id -> relevance grade. Absent entries mean grade 0,
// matching the usual sparse-judgment convention.
using GradeMap = std::map<std::string, int>;

inline int grade_of(const GradeMap& grades, const std::string& doc_id) {
    auto it = grades.find(doc_id);
    return it == grades.end() ? 0 : it->second;
}

// One selection stage: n_in documents are dealt into `groups` groups of
// `group_size` (sizes differ by at most one when the division is uneven),
// and the judge keeps `select_per_group` from each group, so
// n_out = groups * select_per_group documents advance.
struct StageSpec {
    int n_in = 0;
    int n_out = 0;
    int groups = 0;
    int group_size = 0;
    int select_per_group = 0;

    friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

// The stage ladder plus how many independent rounds to accumulate over.
struct TournamentSchedule {
    std::vector<StageSpec> stages;
    int rounds = 1;

    friend bool operator==(const TournamentSchedule&, const TournamentSchedule&) = default;
};

// Integer points per document: one map per completed round, keyed by round
// index, plus their sum. Integers keep accumulation exact and order-free.
struct PointsTable {
    std::map<int, std::map<std::string, int>> per_round;
    std::map<std::string, int> accumulated;
};

inline std::map<std::string, int>
accumulate_points(const std::map<int, std::map<std::string, int>>& per_round) {
    std::map<std::string, int> total;
    for (const auto& [round, points] : per_round) {
        for (const auto& [doc, p] : points) total[doc] += p;
    }
    return total;
}

// The stock 100-document ladder: 100 -> 50 -> 20 -> 10 -> 5 -> 2 over five
// stages, ten rounds. Callers with a different pool size must supply their
// own schedule; nothing is truncated silently.
inline TournamentSchedule default_schedule() {
    TournamentSchedule schedule;
    schedule.stages = {
        {100, 50, 5, 20, 10},
        {50, 20, 5, 10, 4},
        {20, 10, 1, 20, 10},
        {10, 5, 1, 10, 5},
        {5, 2, 1, 5, 2},
    };
    schedule.rounds = 10;
    return schedule;
}

// First violated invariant of a schedule, if any. stage_index is -1 for
// schedule-level problems (round count, empty ladder).
struct ScheduleViolation {
    int stage_index = -1;
    std::string message;
};

inline std::optional<ScheduleViolation>
validate_schedule(const TournamentSchedule& schedule, int candidate_count) {
    if (schedule.rounds < 1)
        return ScheduleViolation{-1, "rounds must be >= 1, got " + std::to_string(schedule.rounds)};
    if (schedule.stages.empty())
        return ScheduleViolation{-1, "schedule has no stages"};

    for (std::size_t i = 0; i < schedule.stages.size(); ++i) {
        const StageSpec& s = schedule.stages[i];
        const std::string at = "stage " + std::to_string(i);
        if (s.n_in < 2)
            return ScheduleViolation{static_cast<int>(i), at + ": n_in must be >= 2, got " + std::to_string(s.n_in)};
        if (s.groups < 1 || s.groups > s.n_in)
            return ScheduleViolation{static_cast<int>(i), at + ": groups must be in [1, n_in], got " + std::to_string(s.groups)};
        const int smallest = s.n_in / s.groups;
        const int largest = (s.n_in + s.groups - 1) / s.groups;
        if (s.group_size != largest)
            return ScheduleViolation{static_cast<int>(i),
                                     at + ": group_size should be " + std::to_string(largest) +
                                         " for " + std::to_string(s.n_in) + " docs in " +
                                         std::to_string(s.groups) + " groups, got " + std::to_string(s.group_size)};
        if (s.select_per_group < 1 || s.select_per_group >= smallest)
            return ScheduleViolation{static_cast<int>(i),
                                     at + ": select_per_group must be in [1, " + std::to_string(smallest - 1) +
                                         "], got " + std::to_string(s.select_per_group)};
        if (s.groups * s.select_per_group != s.n_out)
            return ScheduleViolation{static_cast<int>(i),
                                     at + ": groups * select_per_group = " +
                                         std::to_string(s.groups * s.select_per_group) +
                                         " does not match n_out " + std::to_string(s.n_out)};
        if (s.n_out >= s.n_in)
            return ScheduleViolation{static_cast<int>(i), at + ": n_out must be < n_in"};
        if (i + 1 < schedule.stages.size() && s.n_out != schedule.stages[i + 1].n_in)
            return ScheduleViolation{static_cast<int>(i),
                                     at + ": n_out " + std::to_string(s.n_out) +
                                         " does not chain into stage " + std::to_string(i + 1) +
                                         " n_in " + std::to_string(schedule.stages[i + 1].n_in)};
    }

    if (schedule.stages.front().n_in != candidate_count)
        return ScheduleViolation{0, "stage 0 expects " + std::to_string(schedule.stages.front().n_in) +
                                        " inputs, got " + std::to_string(candidate_count)};
    return std::nullopt;
}

// Candidate-list invariants: unique ids, initial ranks a permutation of 1..N.
inline std::optional<std::string>
validate_candidates(const std::vector<Candidate>& candidates) {
    const int n = static_cast<int>(candidates.size());
    if (n == 0) return "candidate list is empty";
    std::map<std::string, int> seen_ids;
    std::vector<bool> rank_seen(static_cast<std::size_t>(n) + 1, false);
    for (const Candidate& c : candidates) {
        if (++seen_ids[c.doc_id] > 1) return "duplicate doc_id '" + c.doc_id + "'";
        if (c.initial_rank < 1 || c.initial_rank > n)
            return "initial_rank " + std::to_string(c.initial_rank) + " of '" + c.doc_id +
                   "' outside 1.." + std::to_string(n);
        if (rank_seen[static_cast<std::size_t>(c.initial_rank)])
            return "initial_rank " + std::to_string(c.initial_rank) + " assigned twice";
        rank_seen[static_cast<std::size_t>(c.initial_rank)] = true;
    }
    return std::nullopt;
}

} // namespace tourrank
