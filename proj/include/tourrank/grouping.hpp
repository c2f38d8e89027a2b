#pragma once
// Seeding-style group assignment for one selection stage, plus the
// presentation shuffle applied before documents are shown to a judge.
// Membership never changes under shuffling; only the order shown does.

#include <stdexcept>
#include <string>
#include <vector>

#include "tourrank/core.hpp"
#include "tourrank/rng.hpp"

namespace tourrank {

struct GroupAssignment {
    // Membership in dealing order (ascending initial rank within a group).
    std::vector<std::vector<Candidate>> groups;
    // Per group, a permutation of its members: the order shown to the judge.
    std::vector<std::vector<Candidate>> presentation;
};

// Round-robin dealing: the document at position p of the rank-ordered
// survivor list goes to group p mod G, so any G consecutive ranks land in
// G distinct groups. Presentation starts out equal to membership.
//
// `survivors` must already be ordered the way the caller wants them dealt
// (normally ascending initial_rank).
inline GroupAssignment assign_groups(const std::vector<Candidate>& survivors, int num_groups) {
    if (survivors.empty()) throw std::invalid_argument("assign_groups: empty survivor list");
    if (num_groups < 1 || num_groups > static_cast<int>(survivors.size()))
        throw std::invalid_argument("assign_groups: groups must be in [1, " +
                                    std::to_string(survivors.size()) + "], got " +
                                    std::to_string(num_groups));

    GroupAssignment assignment;
    assignment.groups.resize(static_cast<std::size_t>(num_groups));
    for (std::size_t p = 0; p < survivors.size(); ++p) {
        assignment.groups[p % static_cast<std::size_t>(num_groups)].push_back(survivors[p]);
    }
    assignment.presentation = assignment.groups;
    return assignment;
}

// Re-draw every group's presentation order from a generator keyed by
// (seed, group index). Same inputs, same output, regardless of how many
// other shuffles ran in between.
inline void shuffle_presentation(GroupAssignment& assignment, std::uint64_t seed) {
    for (std::size_t g = 0; g < assignment.presentation.size(); ++g) {
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(g)));
        seeded_shuffle(assignment.presentation[g], rng);
    }
}

} // namespace tourrank
