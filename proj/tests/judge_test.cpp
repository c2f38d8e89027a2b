#include <catch2/catch_amalgamated.hpp>

#include "tourrank/judge.hpp"
#include "tourrank/rng.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace tourrank;

namespace {

std::vector<Candidate> ranked(int n) {
    std::vector<Candidate> candidates;
    for (int i = 1; i <= n; ++i)
        candidates.push_back({"d" + std::to_string(i), "text", i});
    return candidates;
}

std::set<std::string> chosen_ids(const JudgeRequest& request, const JudgeSelection& selection) {
    std::set<std::string> out;
    for (int label : selection.chosen_labels)
        out.insert(request.presented[static_cast<std::size_t>(label - 1)].doc.doc_id);
    return out;
}

// Independent top-m: enumerate all docs, sort by the documented key.
std::set<std::string> brute_force_top(const JudgeRequest& request, const GradeMap& grades) {
    std::vector<std::pair<std::vector<int>, std::string>> keyed;
    for (const LabeledDoc& d : request.presented) {
        keyed.push_back({{-grade_of(grades, d.doc.doc_id), d.doc.initial_rank, d.label}, d.doc.doc_id});
    }
    std::sort(keyed.begin(), keyed.end());
    std::set<std::string> out;
    for (int i = 0; i < request.m; ++i) out.insert(keyed[static_cast<std::size_t>(i)].second);
    return out;
}

} // namespace

TEST_CASE("requests label documents 1..n in presentation order", "[judge]") {
    const JudgeRequest request = make_request("q", ranked(4), 2);
    REQUIRE(request.presented.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(request.presented[static_cast<std::size_t>(i)].label == i + 1);
        CHECK(request.presented[static_cast<std::size_t>(i)].doc.doc_id == "d" + std::to_string(i + 1));
    }
    CHECK_NOTHROW(check_request(request));
}

TEST_CASE("malformed requests are rejected", "[judge]") {
    CHECK_THROWS_AS(check_request(make_request("q", ranked(1), 1)), std::invalid_argument);
    CHECK_THROWS_AS(check_request(make_request("q", ranked(4), 0)), std::invalid_argument);
    CHECK_THROWS_AS(check_request(make_request("q", ranked(4), 4)), std::invalid_argument);

    JudgeRequest broken = make_request("q", ranked(3), 1);
    broken.presented[1].label = 7;
    CHECK_THROWS_AS(check_request(broken), std::invalid_argument);
}

TEST_CASE("oracle keeps the m highest grades", "[judge]") {
    GradeMap grades = {{"d1", 0}, {"d2", 3}, {"d3", 1}, {"d4", 2}, {"d5", 0}};
    const JudgeRequest request = make_request("q", ranked(5), 2);
    const JudgeSelection selection = oracle_select(request, grades);
    REQUIRE(selection.chosen_labels.size() == 2);
    CHECK(chosen_ids(request, selection) == std::set<std::string>{"d2", "d4"});
    CHECK_FALSE(selection.repair_applied);
}

TEST_CASE("oracle ties fall back to initial rank, then label", "[judge]") {
    // All grades equal; initial ranks 7, 3, 9 for labels 1, 2, 3.
    std::vector<Candidate> docs = {{"a", "", 7}, {"b", "", 3}, {"c", "", 9}};
    const JudgeRequest request = make_request("q", docs, 2);
    const JudgeSelection selection = oracle_select(request, {});
    CHECK(selection.chosen_labels == std::vector<int>{2, 1});
}

TEST_CASE("oracle equals brute force on random instances", "[judge]") {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(19));
        const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
        std::vector<Candidate> docs = ranked(n);
        // Random distinct-rank order with random grades.
        SplitMix64 shuffler(rng.next());
        seeded_shuffle(docs, shuffler);
        GradeMap grades;
        for (const Candidate& c : docs) grades[c.doc_id] = static_cast<int>(rng.below(4));

        const JudgeRequest request = make_request("q", docs, m);
        const JudgeSelection selection = oracle_select(request, grades);
        REQUIRE(static_cast<int>(selection.chosen_labels.size()) == m);
        CHECK(chosen_ids(request, selection) == brute_force_top(request, grades));
    }
}

TEST_CASE("oracle choice is stable under presentation reshuffling", "[judge]") {
    GradeMap grades = {{"d1", 3}, {"d2", 1}, {"d3", 2}, {"d4", 0}, {"d5", 2}, {"d6", 1}};
    std::vector<Candidate> docs = ranked(6);
    const JudgeRequest base = make_request("q", docs, 3);
    const std::set<std::string> expected = chosen_ids(base, oracle_select(base, grades));

    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        seeded_shuffle(docs, rng);
        const JudgeRequest shuffled = make_request("q", docs, 3);
        CHECK(chosen_ids(shuffled, oracle_select(shuffled, grades)) == expected);
    }
}

TEST_CASE("zero noise reproduces the oracle exactly", "[judge]") {
    GradeMap grades = {{"d1", 2}, {"d2", 0}, {"d3", 3}, {"d4", 1}};
    const JudgeRequest request = make_request("q", ranked(4), 2);
    const JudgeSelection pure = oracle_select(request, grades);
    const JudgeSelection noisy = noisy_select(request, grades, {0.0, 555});
    CHECK(noisy.chosen_labels == pure.chosen_labels);
}

TEST_CASE("certain noise always swaps the single chosen slot", "[judge]") {
    GradeMap grades = {{"d1", 3}, {"d2", 0}};
    const JudgeRequest request = make_request("q", ranked(2), 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const JudgeSelection selection = noisy_select(request, grades, {1.0, seed});
        REQUIRE(selection.chosen_labels.size() == 1);
        CHECK(selection.chosen_labels[0] == 2); // the oracle would keep label 1
    }
}

TEST_CASE("noisy selections replay identically for the same request and seed", "[judge]") {
    GradeMap grades;
    std::vector<Candidate> docs = ranked(10);
    for (const Candidate& c : docs) grades[c.doc_id] = c.initial_rank % 4;
    const JudgeRequest request = make_request("which", docs, 4);
    const NoiseSpec noise{0.5, 777};

    const JudgeSelection first = noisy_select(request, grades, noise);
    // Interleave unrelated calls; the keyed stream must not care.
    const JudgeRequest other = make_request("other", ranked(6), 2);
    (void)noisy_select(other, grades, noise);
    const JudgeSelection second = noisy_select(request, grades, noise);
    CHECK(first.chosen_labels == second.chosen_labels);

    // Selections stay valid: m distinct in-range labels.
    std::set<int> labels(first.chosen_labels.begin(), first.chosen_labels.end());
    CHECK(labels.size() == first.chosen_labels.size());
    for (int label : first.chosen_labels) {
        CHECK(label >= 1);
        CHECK(label <= 10);
    }
}

TEST_CASE("noise actually perturbs at intermediate epsilon", "[judge]") {
    GradeMap grades;
    std::vector<Candidate> docs = ranked(10);
    for (const Candidate& c : docs) grades[c.doc_id] = 10 - c.initial_rank;
    int changed = 0;
    for (int q = 0; q < 50; ++q) {
        const JudgeRequest request = make_request("q" + std::to_string(q), docs, 4);
        const JudgeSelection pure = oracle_select(request, grades);
        const JudgeSelection noisy = noisy_select(request, grades, {0.5, 4242});
        if (noisy.chosen_labels != pure.chosen_labels) ++changed;
    }
    CHECK(changed > 10);
}

TEST_CASE("judge classes wrap the free functions", "[judge]") {
    GradeMap grades = {{"d1", 1}, {"d2", 3}, {"d3", 2}};
    const JudgeRequest request = make_request("q", ranked(3), 1);

    const OracleJudge oracle(grades);
    CHECK(oracle.select(request).chosen_labels == std::vector<int>{2});

    const NoisyJudge noisy(grades, {0.0, 1});
    CHECK(noisy.select(request).chosen_labels == std::vector<int>{2});
}

TEST_CASE("prompt transcript for three documents", "[judge][prompt]") {
    std::vector<Candidate> docs = {{"a", "alpha text", 1}, {"b", "beta text", 2}, {"c", "gamma text", 3}};
    const JudgeRequest request = make_request("best beverage", docs, 2);
    const std::vector<ChatMessage> messages = build_prompt(request);

    REQUIRE(messages.size() == 10); // 2n + 4 for n = 3
    CHECK(messages[0].role == "system");
    CHECK(messages[0].content ==
          "You are an intelligent assistant that can compare multiple documents based on their "
          "relevancy to the given query.");
    CHECK(messages[1].role == "user");
    CHECK(messages[1].content ==
          "I will provide you with the given query and 3 documents. Consider the content of all the "
          "documents comprehensively and select the 2 documents that are most relevant to the given "
          "query: best beverage.");
    CHECK(messages[2].role == "assistant");
    CHECK(messages[2].content == "Okay, please provide the documents.");
    CHECK(messages[3] == ChatMessage{"user", "Document 1: alpha text"});
    CHECK(messages[4] == ChatMessage{"assistant", "Received Document 1."});
    CHECK(messages[5] == ChatMessage{"user", "Document 2: beta text"});
    CHECK(messages[6] == ChatMessage{"assistant", "Received Document 2."});
    CHECK(messages[7] == ChatMessage{"user", "Document 3: gamma text"});
    CHECK(messages[8] == ChatMessage{"assistant", "Received Document 3."});
    CHECK(messages[9].role == "user");
    CHECK(messages[9].content ==
          "The Query is: best beverage. Now, you must output the top 2 documents that are most "
          "relevant to the Query using the following format strictly, and nothing else. Don't "
          "output any explanation, just the following format: \nDocument 3, ..., Document 1");
}

TEST_CASE("prompt scales as two messages per document plus four", "[judge][prompt]") {
    for (int n : {2, 5, 20}) {
        const JudgeRequest request = make_request("q", ranked(n), 1);
        CHECK(build_prompt(request).size() == static_cast<std::size_t>(2 * n + 4));
    }
}

TEST_CASE("well-formed replies parse without repair", "[judge][parse]") {
    const JudgeSelection s = parse_selection("Document 4, Document 1, Document 2", 5, 3);
    CHECK(s.chosen_labels == std::vector<int>{4, 1, 2});
    CHECK_FALSE(s.repair_applied);
}

TEST_CASE("parser tolerates whitespace and prose around labels", "[judge][parse]") {
    const JudgeSelection s =
        parse_selection("Sure! The ranking is:\nDocument  3\nthen Document 1.", 4, 2);
    CHECK(s.chosen_labels == std::vector<int>{3, 1});
    CHECK_FALSE(s.repair_applied);
}

TEST_CASE("duplicate labels keep their first occurrence", "[judge][parse]") {
    const JudgeSelection s = parse_selection("Document 2, Document 2, Document 1", 4, 2);
    CHECK(s.chosen_labels == std::vector<int>{2, 1});
    CHECK(s.repair_applied);
}

TEST_CASE("out-of-range labels are dropped and the gap refilled", "[judge][parse]") {
    const JudgeSelection s = parse_selection("Document 7, Document 1", 5, 2);
    CHECK(s.chosen_labels == std::vector<int>{1, 2});
    CHECK(s.repair_applied);
}

TEST_CASE("over-delivery is truncated to m", "[judge][parse]") {
    const JudgeSelection s = parse_selection("Document 1, Document 2, Document 3", 5, 2);
    CHECK(s.chosen_labels == std::vector<int>{1, 2});
    CHECK(s.repair_applied);
}

TEST_CASE("label-free replies fall back to presentation order", "[judge][parse]") {
    const JudgeSelection s = parse_selection("I cannot rank these documents.", 4, 2);
    CHECK(s.chosen_labels == std::vector<int>{1, 2});
    CHECK(s.repair_applied);
}

TEST_CASE("absurd numbers do not overflow the parser", "[judge][parse]") {
    const JudgeSelection s =
        parse_selection("Document 99999999999999999999999, Document 3", 4, 2);
    CHECK(s.chosen_labels == std::vector<int>{3, 1});
    CHECK(s.repair_applied);
}

TEST_CASE("full-permutation parses are allowed", "[judge][parse]") {
    const JudgeSelection s = parse_selection("Document 2, Document 3, Document 1", 3, 3);
    CHECK(s.chosen_labels == std::vector<int>{2, 3, 1});
    CHECK_FALSE(s.repair_applied);
}

TEST_CASE("parser always yields m distinct in-range labels", "[judge][parse]") {
    SplitMix64 rng(20240817);
    const std::string alphabet = "Document 0123456789,.:;!?\n\t abcdefgh";
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(24));
        const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        std::string text;
        const int len = static_cast<int>(rng.below(120));
        for (int i = 0; i < len; ++i)
            text += alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))];

        const JudgeSelection s = parse_selection(text, n, m);
        REQUIRE(static_cast<int>(s.chosen_labels.size()) == m);
        std::set<int> distinct(s.chosen_labels.begin(), s.chosen_labels.end());
        CHECK(distinct.size() == s.chosen_labels.size());
        for (int label : s.chosen_labels) {
            CHECK(label >= 1);
            CHECK(label <= n);
        }
    }
}
