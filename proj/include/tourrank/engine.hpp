#pragma once
// Tournament orchestration. A round runs the schedule's stages in order,
// dealing survivors into groups, asking the judge to keep m of n per group,
// and crediting one point to every advancing document. A run executes R
// independent rounds and sums their points; the final order sorts by
// accumulated points, tie-broken by initial rank.
//
// Determinism contract: every random choice draws from a stream keyed by
// (run_seed, round index, stage index, group index), never by thread
// scheduling, so results are identical at any parallelism width.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tourrank/concurrency.hpp"
#include "tourrank/core.hpp"
#include "tourrank/cost.hpp"
#include "tourrank/grouping.hpp"
#include "tourrank/judge.hpp"
#include "tourrank/rng.hpp"

namespace tourrank {

struct EngineOptions {
    int parallelism = 1;               // max concurrent judge calls across the whole run
    bool lenient_rounds = false;       // drop rounds whose judge failed instead of aborting
    bool redeal_groups_per_round = false; // shuffle the dealing order per round (default: fixed membership)
};

struct StageOutcome {
    std::vector<Candidate> advancing; // group index order; callers re-sort
    CostLedger ledger;
};

struct RoundResult {
    int round = 0;
    std::map<std::string, int> points;                   // doc_id -> stages survived
    std::vector<std::vector<std::string>> stage_survivors; // audit trail, one list per stage
    CostLedger ledger;
};

struct RankingResult {
    std::vector<std::string> order; // doc_ids, best first
    PointsTable points_table;
    CostLedger cost;
    std::uint64_t run_seed = 0;
    int rounds_requested = 0;
    int rounds_completed = 0; // < requested only in lenient mode
    std::vector<RoundResult> rounds;
};

namespace detail {
inline std::string stage_error_context(int round_index, int stage_index, int group_index) {
    return "round " + std::to_string(round_index) + " stage " + std::to_string(stage_index) +
           " group " + std::to_string(group_index);
}

// Distinct stream ids so dealing and presentation shuffles never share an RNG.
inline constexpr std::uint64_t kRedealStream = 0xdea1dea1dea1dea1ULL;
} // namespace detail

// One selection stage: deal, shuffle presentation, judge each group, union
// the winners. Group calls are independent; the shared limit bounds fan-out.
inline StageOutcome run_stage(const StageSpec& stage, std::vector<Candidate> survivors,
                              const Judge& judge, const std::string& query, std::uint64_t stage_seed,
                              ConcurrencyLimit& limit, int round_index = 0, int stage_index = 0,
                              bool redeal = false) {
    if (static_cast<int>(survivors.size()) != stage.n_in)
        throw std::invalid_argument("stage " + std::to_string(stage_index) + " expects " +
                                    std::to_string(stage.n_in) + " inputs, got " +
                                    std::to_string(survivors.size()));

    std::sort(survivors.begin(), survivors.end(), [](const Candidate& a, const Candidate& b) {
        return a.initial_rank < b.initial_rank;
    });
    if (redeal) {
        SplitMix64 rng(mix_seed(stage_seed, detail::kRedealStream));
        seeded_shuffle(survivors, rng);
    }

    GroupAssignment assignment = assign_groups(survivors, stage.groups);
    shuffle_presentation(assignment, stage_seed);

    struct GroupOutcome {
        std::vector<Candidate> chosen;
        CostLedger ledger;
    };
    std::vector<std::function<GroupOutcome()>> tasks;
    tasks.reserve(assignment.presentation.size());
    for (std::size_t g = 0; g < assignment.presentation.size(); ++g) {
        tasks.push_back([&, g]() -> GroupOutcome {
            const std::vector<Candidate>& shown = assignment.presentation[g];
            JudgeRequest request = make_request(query, shown, stage.select_per_group);
            JudgeSelection selection;
            try {
                selection = judge.select(request);
            } catch (const AuthFailure&) {
                throw;
            } catch (const JudgeUnavailable& e) {
                throw JudgeUnavailable(
                    detail::stage_error_context(round_index, stage_index, static_cast<int>(g)) +
                    ": " + e.what());
            }
            GroupOutcome outcome;
            outcome.chosen.reserve(selection.chosen_labels.size());
            for (int label : selection.chosen_labels)
                outcome.chosen.push_back(shown[static_cast<std::size_t>(label - 1)]);
            outcome.ledger =
                judge_call_ledger(static_cast<std::int64_t>(shown.size()), selection.transport_retries);
            return outcome;
        });
    }

    std::vector<GroupOutcome> outcomes = run_all(std::move(tasks), limit);

    StageOutcome result;
    result.advancing.reserve(static_cast<std::size_t>(stage.n_out));
    for (GroupOutcome& o : outcomes) {
        for (Candidate& c : o.chosen) result.advancing.push_back(std::move(c));
        result.ledger = ledger_merge(result.ledger, o.ledger, MergeMode::parallel);
    }
    if (static_cast<int>(result.advancing.size()) != stage.n_out)
        throw std::logic_error("stage " + std::to_string(stage_index) + " advanced " +
                               std::to_string(result.advancing.size()) + " docs, wanted " +
                               std::to_string(stage.n_out));
    return result;
}

// One full tournament: stages run strictly in sequence, every advancing doc
// gains a point per stage survived.
inline RoundResult run_tournament(const std::string& query, const std::vector<Candidate>& candidates,
                                  const TournamentSchedule& schedule, const Judge& judge,
                                  std::uint64_t round_seed, ConcurrencyLimit& limit,
                                  int round_index = 0, bool redeal = false) {
    RoundResult result;
    result.round = round_index;
    for (const Candidate& c : candidates) result.points[c.doc_id] = 0;

    std::vector<Candidate> survivors = candidates;
    for (std::size_t k = 0; k < schedule.stages.size(); ++k) {
        StageOutcome stage = run_stage(schedule.stages[k], std::move(survivors), judge, query,
                                       mix_seed(round_seed, static_cast<std::uint64_t>(k)), limit,
                                       round_index, static_cast<int>(k), redeal);
        survivors = std::move(stage.advancing);
        result.ledger = ledger_merge(result.ledger, stage.ledger, MergeMode::sequential);
        std::vector<std::string> ids;
        ids.reserve(survivors.size());
        for (const Candidate& c : survivors) {
            result.points[c.doc_id] += 1;
            ids.push_back(c.doc_id);
        }
        result.stage_survivors.push_back(std::move(ids));
    }
    return result;
}

inline RoundResult run_tournament(const std::string& query, const std::vector<Candidate>& candidates,
                                  const TournamentSchedule& schedule, const Judge& judge,
                                  std::uint64_t round_seed) {
    ConcurrencyLimit serial(1);
    return run_tournament(query, candidates, schedule, judge, round_seed, serial);
}

// Accumulated points descending, then initial rank ascending. Every
// candidate must have an entry.
inline std::vector<std::string> rank_by_points(const std::map<std::string, int>& accumulated,
                                               const std::vector<Candidate>& candidates) {
    std::vector<const Candidate*> order;
    order.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        if (accumulated.find(c.doc_id) == accumulated.end())
            throw std::invalid_argument("no accumulated points for doc '" + c.doc_id + "'");
        order.push_back(&c);
    }
    std::stable_sort(order.begin(), order.end(), [&](const Candidate* a, const Candidate* b) {
        const int pa = accumulated.at(a->doc_id);
        const int pb = accumulated.at(b->doc_id);
        if (pa != pb) return pa > pb;
        return a->initial_rank < b->initial_rank;
    });
    std::vector<std::string> ids;
    ids.reserve(order.size());
    for (const Candidate* c : order) ids.push_back(c->doc_id);
    return ids;
}

// R independent rounds, points summed across them. Rounds run concurrently
// when the width allows; the ledger then merges them as parallel work.
// Lenient mode drops rounds whose judge gave up (their calls are also absent
// from the ledger, so audits only apply to complete runs) and records how
// many rounds actually counted.
inline RankingResult run_tourrank(const std::string& query, const std::vector<Candidate>& candidates,
                                  const TournamentSchedule& schedule, const Judge& judge,
                                  std::uint64_t run_seed, const EngineOptions& options,
                                  ConcurrencyLimit& limit) {
    if (auto bad = validate_candidates(candidates)) throw std::invalid_argument(*bad);
    if (auto violation = validate_schedule(schedule, static_cast<int>(candidates.size())))
        throw std::invalid_argument(violation->message);
    if (options.parallelism < 1) throw std::invalid_argument("parallelism width must be >= 1");

    const int rounds = schedule.rounds;

    struct RoundSlot {
        bool completed = false;
        RoundResult result;
        std::exception_ptr error;
    };
    std::vector<RoundSlot> slots(static_cast<std::size_t>(rounds));

    auto run_round = [&](int r) {
        RoundSlot& slot = slots[static_cast<std::size_t>(r)];
        try {
            slot.result = run_tournament(query, candidates, schedule, judge,
                                         mix_seed(run_seed, static_cast<std::uint64_t>(r)), limit, r,
                                         options.redeal_groups_per_round);
            slot.completed = true;
        } catch (...) {
            slot.error = std::current_exception();
        }
    };

    if (options.parallelism == 1) {
        for (int r = 0; r < rounds; ++r) run_round(r);
    } else {
        std::vector<std::future<void>> inflight;
        inflight.reserve(static_cast<std::size_t>(rounds));
        for (int r = 0; r < rounds; ++r)
            inflight.push_back(std::async(std::launch::async, run_round, r));
        for (std::future<void>& f : inflight) f.get();
    }

    RankingResult result;
    result.run_seed = run_seed;
    result.rounds_requested = rounds;

    const MergeMode round_merge = options.parallelism > 1 ? MergeMode::parallel : MergeMode::sequential;
    for (RoundSlot& slot : slots) {
        if (slot.error) {
            if (!options.lenient_rounds) std::rethrow_exception(slot.error);
            continue;
        }
        result.points_table.per_round[slot.result.round] = slot.result.points;
        result.cost = ledger_merge(result.cost, slot.result.ledger, round_merge);
        result.rounds_completed += 1;
        result.rounds.push_back(std::move(slot.result));
    }
    if (result.rounds_completed == 0) {
        for (RoundSlot& slot : slots)
            if (slot.error) std::rethrow_exception(slot.error);
        throw std::logic_error("no rounds ran"); // unreachable: rounds >= 1
    }

    result.points_table.accumulated = accumulate_points(result.points_table.per_round);
    result.order = rank_by_points(result.points_table.accumulated, candidates);
    return result;
}

// Convenience form that owns its in-flight limit.  Callers ranking several
// query pools concurrently should share one ConcurrencyLimit via the overload
// above so the judge-call cap holds across the whole batch.
inline RankingResult run_tourrank(const std::string& query, const std::vector<Candidate>& candidates,
                                  const TournamentSchedule& schedule, const Judge& judge,
                                  std::uint64_t run_seed, const EngineOptions& options = {}) {
    if (options.parallelism < 1) throw std::invalid_argument("parallelism width must be >= 1");
    ConcurrencyLimit limit(options.parallelism);
    return run_tourrank(query, candidates, schedule, judge, run_seed, options, limit);
}

} // namespace tourrank
