#include <catch2/catch_amalgamated.hpp>

#include "tourrank/core.hpp"
#include "tourrank/rng.hpp"

#include <algorithm>
#include <vector>

using namespace tourrank;

namespace {

std::vector<Candidate> pool(int n) {
    std::vector<Candidate> candidates;
    for (int i = 1; i <= n; ++i)
        candidates.push_back({"d" + std::to_string(i), "text " + std::to_string(i), i});
    return candidates;
}

} // namespace

TEST_CASE("splitmix64 matches the published reference sequence", "[rng]") {
    SplitMix64 zero(0);
    CHECK(zero.next() == 0xe220a8397b1dcdafULL);
    CHECK(zero.next() == 0x6e789e6aa1b965f4ULL);

    SplitMix64 g(42);
    CHECK(g.next() == 0xbdd732262feb6e95ULL);
    CHECK(g.next() == 0x28efe333b266f103ULL);
    CHECK(g.next() == 0x47526757130f9f52ULL);
}

TEST_CASE("bounded and unit draws stay in range", "[rng]") {
    SplitMix64 g(9001);
    for (int i = 0; i < 1000; ++i) {
        CHECK(g.below(10) < 10);
        const double u = g.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(g.below(1) == 0);
}

TEST_CASE("stream mixing is frozen", "[rng]") {
    // These values pin the seed-derivation scheme; changing them silently
    // re-randomizes every historical run, hence the hard-coded expectations.
    CHECK(mix_seed(7, 0) == 0xef7ac1f0c410826fULL);
    CHECK(mix_seed(7, 1) == 0x6aab57a04c0b187bULL);
    CHECK(mix_seed(7, 0) != mix_seed(8, 0));
    CHECK(kRngId == "splitmix64-fisher-yates/1");
}

TEST_CASE("fnv1a matches the reference constants", "[rng]") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("query") == 0xb1068f146c4596c3ULL);
    CHECK(fnv1a_u64(1, fnv1a("x")) != fnv1a_u64(2, fnv1a("x")));
}

TEST_CASE("seeded shuffle is a deterministic permutation", "[rng]") {
    std::vector<int> base(50);
    for (int i = 0; i < 50; ++i) base[static_cast<std::size_t>(i)] = i;

    std::vector<int> a = base, b = base, c = base;
    SplitMix64 ga(123), gb(123), gc(124);
    seeded_shuffle(a, ga);
    seeded_shuffle(b, gb);
    seeded_shuffle(c, gc);

    CHECK(a == b);
    CHECK(a != c);
    CHECK(a != base);
    std::sort(a.begin(), a.end());
    CHECK(a == base);

    std::vector<int> single = {7};
    SplitMix64 gs(5);
    seeded_shuffle(single, gs);
    CHECK(single == std::vector<int>{7});
}

TEST_CASE("stock schedule walks 100 down to 2 and validates", "[core]") {
    const TournamentSchedule schedule = default_schedule();
    REQUIRE(schedule.stages.size() == 5);
    CHECK(schedule.rounds == 10);
    CHECK(schedule.stages.front().n_in == 100);
    CHECK(schedule.stages.back().n_out == 2);
    for (std::size_t i = 0; i + 1 < schedule.stages.size(); ++i)
        CHECK(schedule.stages[i].n_out == schedule.stages[i + 1].n_in);
    CHECK_FALSE(validate_schedule(schedule, 100).has_value());
}

TEST_CASE("schedule validation pinpoints the first violation", "[core]") {
    SECTION("round count") {
        TournamentSchedule s = default_schedule();
        s.rounds = 0;
        auto v = validate_schedule(s, 100);
        REQUIRE(v.has_value());
        CHECK(v->stage_index == -1);
    }
    SECTION("no stages") {
        TournamentSchedule s;
        REQUIRE(validate_schedule(s, 10).has_value());
    }
    SECTION("head count mismatch names stage 0") {
        auto v = validate_schedule(default_schedule(), 80);
        REQUIRE(v.has_value());
        CHECK(v->stage_index == 0);
        CHECK(v->message == "stage 0 expects 100 inputs, got 80");
    }
    SECTION("broken chain") {
        TournamentSchedule s = default_schedule();
        s.stages[1].n_in = 40;
        auto v = validate_schedule(s, 100);
        REQUIRE(v.has_value());
        CHECK(v->stage_index == 0);
    }
    SECTION("non-shrinking stage") {
        TournamentSchedule s;
        s.stages = {{4, 4, 2, 2, 2}};
        auto v = validate_schedule(s, 4);
        REQUIRE(v.has_value());
    }
    SECTION("selection must leave room to reject") {
        // 2 groups of 2: keeping 2 per group would keep everything.
        TournamentSchedule s;
        s.stages = {{4, 4, 2, 2, 2}};
        REQUIRE(validate_schedule(s, 4).has_value());
    }
    SECTION("group size must match the dealing arithmetic") {
        TournamentSchedule s;
        s.stages = {{4, 2, 2, 3, 1}};
        auto v = validate_schedule(s, 4);
        REQUIRE(v.has_value());
        CHECK(v->message.find("group_size") != std::string::npos);
    }
    SECTION("n_out arithmetic") {
        TournamentSchedule s;
        s.stages = {{4, 3, 2, 2, 1}};
        REQUIRE(validate_schedule(s, 4).has_value());
    }
}

TEST_CASE("uneven pools validate when sizes differ by one", "[core]") {
    // 10 docs in 3 groups: sizes 4/3/3, keep 1 each.
    TournamentSchedule s;
    s.stages = {{10, 3, 3, 4, 1}};
    CHECK_FALSE(validate_schedule(s, 10).has_value());
}

TEST_CASE("candidate validation", "[core]") {
    CHECK_FALSE(validate_candidates(pool(5)).has_value());

    CHECK(validate_candidates({}).has_value());

    std::vector<Candidate> dup_id = pool(3);
    dup_id[2].doc_id = "d1";
    CHECK(validate_candidates(dup_id).has_value());

    std::vector<Candidate> dup_rank = pool(3);
    dup_rank[2].initial_rank = 1;
    CHECK(validate_candidates(dup_rank).has_value());

    std::vector<Candidate> out_of_range = pool(3);
    out_of_range[0].initial_rank = 4;
    CHECK(validate_candidates(out_of_range).has_value());
}

TEST_CASE("points accumulate across rounds per document", "[core]") {
    std::map<int, std::map<std::string, int>> per_round;
    per_round[0] = {{"a", 5}, {"b", 0}, {"c", 2}};
    per_round[1] = {{"a", 3}, {"b", 1}, {"c", 0}};
    per_round[2] = {{"a", 0}, {"b", 0}, {"c", 4}};

    const std::map<std::string, int> total = accumulate_points(per_round);
    CHECK(total.at("a") == 8);
    CHECK(total.at("b") == 1);
    CHECK(total.at("c") == 6);
}

TEST_CASE("missing grades read as zero", "[core]") {
    GradeMap grades = {{"d1", 3}};
    CHECK(grade_of(grades, "d1") == 3);
    CHECK(grade_of(grades, "nope") == 0);
}
