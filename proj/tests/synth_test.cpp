#include <catch2/catch_amalgamated.hpp>

#include "tourrank/synth.hpp"

#include "temp_dir.hpp"

#include <fstream>
#include <set>
#include <string>
#include <vector>

using namespace tourrank;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("synthetic datasets have the requested shape", "[synth]") {
    SynthSpec spec;
    spec.num_queries = 5;
    spec.pool_size = 100;
    spec.seed = 7;
    const SynthDataset dataset = make_synthetic_dataset(spec);

    REQUIRE(dataset.queries.size() == 5);
    CHECK(dataset.corpus.size() == 500);
    for (const auto& [qid, text] : dataset.queries) {
        CHECK(dataset.qrels.at(qid).size() == 100);
        const auto& entries = dataset.candidates.per_query.at(qid);
        REQUIRE(entries.size() == 100);

        std::set<std::string> ids;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            CHECK(entries[i].rank == static_cast<int>(i) + 1);
            CHECK(dataset.corpus.count(entries[i].doc_id) == 1);
            ids.insert(entries[i].doc_id);
        }
        CHECK(ids.size() == 100);

        // Candidate order is the true order: grades never increase.
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            CHECK(dataset.qrels.at(qid).at(entries[i].doc_id) >=
                  dataset.qrels.at(qid).at(entries[i + 1].doc_id));
        }
    }
}

TEST_CASE("document text embeds the id but never the grade", "[synth]") {
    SynthSpec spec;
    spec.num_queries = 1;
    spec.pool_size = 20;
    spec.seed = 3;
    const SynthDataset dataset = make_synthetic_dataset(spec);
    for (const auto& [doc_id, text] : dataset.corpus) {
        CHECK(text.find(doc_id) != std::string::npos);
        CHECK(text.find("grade") == std::string::npos);
        CHECK(text.find("relevan") == std::string::npos);
    }
}

TEST_CASE("generation is deterministic per seed", "[synth]") {
    SynthSpec spec;
    spec.num_queries = 3;
    spec.pool_size = 50;
    spec.seed = 42;

    const SynthDataset a = make_synthetic_dataset(spec);
    const SynthDataset b = make_synthetic_dataset(spec);
    CHECK(a.corpus == b.corpus);
    CHECK(a.qrels == b.qrels);
    CHECK(a.queries == b.queries);
    CHECK(a.candidates == b.candidates);

    spec.seed = 43;
    const SynthDataset c = make_synthetic_dataset(spec);
    CHECK(a.qrels != c.qrels);
}

TEST_CASE("distinct mode hands every doc its own grade", "[synth]") {
    SynthSpec spec;
    spec.num_queries = 2;
    spec.pool_size = 100;
    spec.grades.distinct = true;
    spec.seed = 11;
    const SynthDataset dataset = make_synthetic_dataset(spec);

    for (const auto& [qid, grades] : dataset.qrels) {
        std::set<int> seen;
        for (const auto& [doc_id, g] : grades) seen.insert(g);
        CHECK(seen.size() == 100);
        CHECK(*seen.begin() == 1);
        CHECK(*seen.rbegin() == 100);
    }
}

TEST_CASE("drawn grades track the configured distribution", "[synth]") {
    SynthSpec spec;
    spec.num_queries = 100;
    spec.pool_size = 100; // 10,000 draws in total
    spec.seed = 99;
    const SynthDataset dataset = make_synthetic_dataset(spec);

    std::map<int, int> counts;
    int total = 0;
    for (const auto& [qid, grades] : dataset.qrels) {
        for (const auto& [doc_id, g] : grades) {
            counts[g] += 1;
            total += 1;
        }
    }
    REQUIRE(total == 10000);
    for (const auto& [grade, weight] : spec.grades.weights) {
        const double share = static_cast<double>(counts[grade]) / total;
        CHECK(share == Catch::Approx(weight).margin(0.02));
    }
}

TEST_CASE("weights validation", "[synth]") {
    SynthSpec spec;
    spec.grades.weights = {{0, 0.0}};
    CHECK_THROWS_AS(make_synthetic_dataset(spec), std::invalid_argument);
    spec.grades.weights = {{0, -1.0}, {1, 2.0}};
    CHECK_THROWS_AS(make_synthetic_dataset(spec), std::invalid_argument);
    spec.num_queries = 0;
    CHECK_THROWS_AS(make_synthetic_dataset(spec), std::invalid_argument);
}

TEST_CASE("dataset files are byte-identical per seed and read back losslessly", "[synth][io]") {
    SynthSpec spec;
    spec.num_queries = 4;
    spec.pool_size = 30;
    spec.seed = 1234;
    const SynthDataset dataset = make_synthetic_dataset(spec);

    TempDir tmp;
    write_corpus(tmp.file("corpus.jsonl"), dataset.corpus);
    write_queries(tmp.file("queries.tsv"), dataset.queries);
    write_qrels(tmp.file("qrels.txt"), dataset.qrels);
    write_run(tmp.file("candidates.run"), dataset.candidates);

    CHECK(read_corpus(tmp.file("corpus.jsonl")) == dataset.corpus);
    CHECK(read_queries(tmp.file("queries.tsv")) == dataset.queries);
    CHECK(read_qrels(tmp.file("qrels.txt")) == dataset.qrels);
    CHECK(read_run(tmp.file("candidates.run")) == dataset.candidates);

    write_corpus(tmp.file("corpus2.jsonl"), make_synthetic_dataset(spec).corpus);
    CHECK(slurp(tmp.file("corpus.jsonl")) == slurp(tmp.file("corpus2.jsonl")));
}

TEST_CASE("candidate assembly joins run order with corpus text", "[synth]") {
    SynthSpec spec;
    spec.num_queries = 1;
    spec.pool_size = 10;
    spec.seed = 6;
    const SynthDataset dataset = make_synthetic_dataset(spec);
    const std::string qid = dataset.queries[0].first;

    const std::vector<Candidate> candidates =
        assemble_candidates(dataset.candidates, dataset.corpus, qid);
    REQUIRE(candidates.size() == 10);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        CHECK(candidates[i].initial_rank == static_cast<int>(i) + 1);
        CHECK(candidates[i].text == dataset.corpus.at(candidates[i].doc_id));
    }
    CHECK_FALSE(validate_candidates(candidates).has_value());

    CHECK_THROWS_AS(assemble_candidates(dataset.candidates, dataset.corpus, "missing"),
                    std::invalid_argument);
    CHECK_THROWS_AS(assemble_candidates(dataset.candidates, {}, qid), std::invalid_argument);
}
