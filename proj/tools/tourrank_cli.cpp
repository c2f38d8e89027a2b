// tourrank_cli.cpp: command-line surface for the tournament re-ranker.
//
// Subcommands:
//   synth    write a synthetic corpus / queries / qrels / candidates bundle
//   rank     tournament re-ranking of candidate pools into a TREC run file
//   compare  methods x initial-order perturbations, mean NDCG table
//   cost     analytic judge-budget prediction for a method
//   eval     NDCG@k of a run file against qrels
//
// Option precedence is flags > config file > environment > defaults, and the
// resolved values are echoed on one `effective-config:` line so any invocation
// can be replayed verbatim. The API key is read only from TOURRANK_API_KEY and
// is never echoed.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or bad input, 3 endpoint auth
// failure, 4 endpoint gave up.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tourrank/baselines.hpp"
#include "tourrank/chat_client.hpp"
#include "tourrank/concurrency.hpp"
#include "tourrank/core.hpp"
#include "tourrank/cost.hpp"
#include "tourrank/engine.hpp"
#include "tourrank/eval.hpp"
#include "tourrank/llm_judge.hpp"
#include "tourrank/synth.hpp"

using namespace tourrank;

namespace {

// One seed stream per independent random decision, so toggling a feature
// never shifts the randomness of another.
constexpr std::uint64_t kPerturbStream = 0x70657274ULL;
constexpr std::uint64_t kEngineStream = 0x656e67ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f6973ULL;

std::string api_key_from_env() {
    const char* raw = std::getenv("TOURRANK_API_KEY");
    return raw ? std::string(raw) : std::string();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
    if (given) return *given;
    std::random_device entropy;
    return (static_cast<std::uint64_t>(entropy()) << 32) ^ static_cast<std::uint64_t>(entropy());
}

std::string real_str(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void echo_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cout << "effective-config:";
    for (const auto& [key, value] : kv) std::cout << ' ' << key << '=' << value;
    std::cout << '\n';
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> parse_cutoffs(const std::string& csv) {
    std::vector<int> ks;
    for (const std::string& item : split_csv(csv)) {
        std::size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || k < 1)
            throw std::invalid_argument("bad NDCG cutoff '" + item + "'");
        ks.push_back(k);
    }
    if (ks.empty()) throw std::invalid_argument("need at least one NDCG cutoff");
    return ks;
}

// Schedule files are JSON: {"rounds": R, "stages": [{"n_in": ..., "n_out": ...,
// "groups": ..., "group_size": ..., "select_per_group": ...}, ...]}. The
// literal "default" selects the built-in 100-doc schedule.
int require_int(const nlohmann::json& node, const char* key, const std::string& where) {
    if (!node.contains(key) || !node[key].is_number_integer())
        throw std::runtime_error(where + ": '" + key + "' must be an integer");
    return node[key].get<int>();
}

TournamentSchedule load_schedule(const std::string& arg) {
    if (arg == "default") return default_schedule();

    std::ifstream in = detail::open_for_read(arg);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("schedule file '" + arg + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("stages") || !doc["stages"].is_array() ||
        doc["stages"].empty())
        throw std::runtime_error("schedule file '" + arg + "': need an object with a non-empty 'stages' array");

    TournamentSchedule schedule;
    schedule.rounds = doc.contains("rounds") ? require_int(doc, "rounds", "schedule file '" + arg + "'") : 1;
    int index = 0;
    for (const nlohmann::json& node : doc["stages"]) {
        const std::string where = "schedule file '" + arg + "': stages[" + std::to_string(index) + "]";
        if (!node.is_object()) throw std::runtime_error(where + ": must be an object");
        StageSpec stage;
        stage.n_in = require_int(node, "n_in", where);
        stage.n_out = require_int(node, "n_out", where);
        stage.groups = require_int(node, "groups", where);
        stage.group_size = require_int(node, "group_size", where);
        stage.select_per_group = require_int(node, "select_per_group", where);
        schedule.stages.push_back(stage);
        ++index;
    }
    // Structural check against the schedule's own head count; the per-query
    // pool-size check happens again at run time.
    if (auto violation = validate_schedule(schedule, schedule.stages.front().n_in))
        throw std::runtime_error("schedule file '" + arg + "': " + violation->message);
    return schedule;
}

struct JudgeOpts {
    std::string judge = "oracle";
    double epsilon = 0.2;
    std::string endpoint;
    std::string model;
};

// Builds per-query judge instances for whichever contract a method needs:
// select-m-of-n, full ordering, or pointwise scoring. The llm variants share
// one transport client; the graded variants pull each query's judgments from
// qrels and share one content-keyed noise stream.
class JudgeFactory {
public:
    JudgeFactory(JudgeOpts opts, const Qrels* qrels, std::uint64_t noise_seed, int parallelism)
        : opts_(std::move(opts)), qrels_(qrels), noise_{opts_.epsilon, noise_seed} {
        if (opts_.judge == "llm") {
            if (opts_.endpoint.empty() || opts_.model.empty())
                throw std::invalid_argument("the llm judge needs --endpoint and --model");
            const std::string key = api_key_from_env();
            if (key.empty())
                throw AuthFailure("TOURRANK_API_KEY is not set; the llm judge cannot authenticate");
            ChatEndpointConfig config;
            config.endpoint = opts_.endpoint;
            config.model = opts_.model;
            config.api_key = key;
            config.max_in_flight = parallelism;
            client_ = std::make_shared<ChatClient>(std::move(config));
        } else if (qrels_ == nullptr) {
            throw std::invalid_argument("--qrels is required for the oracle and noisy judges");
        }
    }

    std::unique_ptr<Judge> selector(const std::string& qid) const {
        if (opts_.judge == "llm") return std::make_unique<LlmJudge>(client_);
        if (opts_.judge == "noisy") return std::make_unique<NoisyJudge>(grades_for(qid), noise_);
        return std::make_unique<OracleJudge>(grades_for(qid));
    }

    std::unique_ptr<OrderingJudge> orderer(const std::string& qid) const {
        if (opts_.judge == "llm") return std::make_unique<LlmOrderingJudge>(client_);
        if (opts_.judge == "noisy") return std::make_unique<NoisyOrderingJudge>(grades_for(qid), noise_);
        return std::make_unique<OracleOrderingJudge>(grades_for(qid));
    }

    std::function<double(const std::string&, const Candidate&)> scorer(const std::string& qid) const {
        if (opts_.judge == "llm")
            throw std::invalid_argument("pointwise needs a graded scorer; use --judge oracle or noisy");
        if (opts_.judge == "noisy") return make_noisy_scorer(grades_for(qid), noise_);
        return make_oracle_scorer(grades_for(qid));
    }

private:
    const GradeMap& grades_for(const std::string& qid) const {
        auto it = qrels_->find(qid);
        if (it == qrels_->end())
            throw std::runtime_error("the " + opts_.judge + " judge needs judgments, but qrels lists none for query '" + qid + "'");
        return it->second;
    }

    JudgeOpts opts_;
    const Qrels* qrels_;
    NoiseSpec noise_;
    std::shared_ptr<ChatClient> client_;
};

// Runs one job per query with a small number of pools in flight. Judge-call
// concurrency is capped separately by the limit the jobs share, so the cap on
// simultaneous endpoint traffic stays global; the pool cap only bounds memory
// and thread fan-out.
template <typename Out>
std::vector<Out> for_each_query(int query_count, int parallelism, const std::function<Out(int)>& job) {
    const int concurrent = parallelism > 1 ? std::min(parallelism, 4) : 1;
    ConcurrencyLimit pools(concurrent);
    std::vector<std::function<Out()>> tasks;
    tasks.reserve(static_cast<std::size_t>(query_count));
    for (int i = 0; i < query_count; ++i) tasks.push_back([&job, i] { return job(i); });
    return run_all<Out>(std::move(tasks), pools);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string out_dir = ".";
    int num_queries = 50;
    int pool_size = 100;
    std::optional<std::uint64_t> seed;
    bool distinct = false;
};

int cmd_synth(const SynthArgs& args) {
    const std::uint64_t seed = resolve_seed(args.seed);
    echo_config({{"cmd", "synth"},
                 {"queries", std::to_string(args.num_queries)},
                 {"pool", std::to_string(args.pool_size)},
                 {"distinct", args.distinct ? "1" : "0"},
                 {"seed", std::to_string(seed)},
                 {"out", args.out_dir},
                 {"rng", std::string(kRngId)}});

    SynthSpec spec;
    spec.num_queries = args.num_queries;
    spec.pool_size = args.pool_size;
    spec.grades.distinct = args.distinct;
    spec.seed = seed;
    const SynthDataset dataset = make_synthetic_dataset(spec);

    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    const std::string corpus_path = (dir / "corpus.jsonl").string();
    const std::string queries_path = (dir / "queries.tsv").string();
    const std::string qrels_path = (dir / "qrels.txt").string();
    const std::string candidates_path = (dir / "candidates.run").string();

    write_corpus(corpus_path, dataset.corpus);
    write_queries(queries_path, dataset.queries);
    write_qrels(qrels_path, dataset.qrels);
    write_run(candidates_path, dataset.candidates);

    std::cout << "wrote " << corpus_path << " (" << dataset.corpus.size() << " docs)\n"
              << "wrote " << queries_path << " (" << dataset.queries.size() << " queries)\n"
              << "wrote " << qrels_path << '\n'
              << "wrote " << candidates_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// rank

struct RankArgs {
    std::string corpus;
    std::string queries;
    std::string candidates;
    std::string qrels;
    JudgeOpts judge;
    std::string schedule_arg = "default";
    int rounds = 0; // 0 keeps the schedule's own round count
    std::optional<std::uint64_t> seed;
    int parallelism = 8;
    std::string perturb = "keep";
    bool lenient = false;
    std::string out = "tourrank.run";
    std::string tag = "tourrank";
    std::string cost_report;
};

struct QueryRanking {
    std::string qid;
    std::vector<RunEntry> entries;
    CostLedger cost;
    int rounds_completed = 0;
};

int cmd_rank(const RankArgs& args) {
    const std::uint64_t seed = resolve_seed(args.seed);
    TournamentSchedule schedule = load_schedule(args.schedule_arg);
    if (args.rounds > 0) schedule.rounds = args.rounds;

    std::vector<std::pair<std::string, std::string>> config{
        {"cmd", "rank"},
        {"judge", args.judge.judge},
        {"epsilon", real_str(args.judge.epsilon)},
        {"schedule", args.schedule_arg},
        {"rounds", std::to_string(schedule.rounds)},
        {"seed", std::to_string(seed)},
        {"parallelism", std::to_string(args.parallelism)},
        {"perturb", args.perturb},
        {"mode", args.lenient ? "lenient" : "strict"},
        {"tag", args.tag},
        {"rng", std::string(kRngId)}};
    if (args.judge.judge == "llm") {
        config.push_back({"endpoint", args.judge.endpoint});
        config.push_back({"model", args.judge.model});
        config.push_back({"api_key", api_key_from_env().empty() ? "(unset)" : "(set)"});
    }
    echo_config(config);

    const PerturbMode perturb = parse_perturb_mode(args.perturb);
    const auto corpus = read_corpus(args.corpus);
    const auto queries = read_queries(args.queries);
    const RunFile candidates = read_run(args.candidates);
    std::optional<Qrels> qrels;
    if (!args.qrels.empty()) qrels = read_qrels(args.qrels);

    const JudgeFactory factory(args.judge, qrels ? &*qrels : nullptr, mix_seed(seed, kNoiseStream),
                               args.parallelism);
    EngineOptions engine_options;
    engine_options.parallelism = args.parallelism;
    engine_options.lenient_rounds = args.lenient;
    ConcurrencyLimit judge_limit(args.parallelism);

    const auto rank_one = [&](int index) {
        const auto& [qid, text] = queries[static_cast<std::size_t>(index)];
        const std::uint64_t query_seed = mix_seed(seed, static_cast<std::uint64_t>(index));

        std::vector<Candidate> pool = assemble_candidates(candidates, corpus, qid);
        pool = perturb_initial(std::move(pool), perturb, mix_seed(query_seed, kPerturbStream));
        const int pool_size = static_cast<int>(pool.size());

        const auto judge = factory.selector(qid);
        const RankingResult ranked = run_tourrank(text, pool, schedule, *judge,
                                                  mix_seed(query_seed, kEngineStream),
                                                  engine_options, judge_limit);

        std::map<std::string, int> rank_of;
        for (const Candidate& c : pool) rank_of[c.doc_id] = c.initial_rank;

        QueryRanking out;
        out.qid = qid;
        out.cost = ranked.cost;
        out.rounds_completed = ranked.rounds_completed;
        int rank = 1;
        for (const std::string& doc_id : ranked.order) {
            const int points = ranked.points_table.accumulated.at(doc_id);
            out.entries.push_back({doc_id, rank, run_score(points, rank_of.at(doc_id), pool_size)});
            ++rank;
        }
        return out;
    };

    const std::vector<QueryRanking> per_query =
        for_each_query<QueryRanking>(static_cast<int>(queries.size()), args.parallelism, rank_one);

    RunFile run;
    run.tag = args.tag;
    CostLedger total;
    int short_runs = 0;
    for (const QueryRanking& q : per_query) {
        run.per_query[q.qid] = q.entries;
        total = ledger_merge(total, q.cost, MergeMode::parallel);
        if (q.rounds_completed < schedule.rounds) ++short_runs;
    }
    write_run(args.out, run);
    std::cout << "wrote " << args.out << " (" << run.per_query.size() << " queries)\n";
    if (short_runs > 0)
        std::cout << "note: " << short_runs << " queries finished with dropped rounds (lenient mode)\n";

    // Depth prediction depends on the width: rounds only overlap when more
    // than one judge call may be in flight.
    AnalyticParams params;
    params.schedule = &schedule;
    AnalyticCost predicted = analytic_cost(CostMethod::tourrank, schedule.stages.front().n_in, params);
    const std::int64_t stage_count = static_cast<std::int64_t>(schedule.stages.size());
    if (args.parallelism == 1) predicted.depth = stage_count * schedule.rounds;
    const std::int64_t query_count = static_cast<std::int64_t>(per_query.size());

    AnalyticCost predicted_total = predicted;
    predicted_total.docs_sent *= query_count;
    const AuditReport audit = ledger_audit(total, predicted_total);

    std::cout << "cost\tinvocations\tdocs_sent\tdepth\tretries\n"
              << "measured-total\t" << total.invocations << '\t' << total.docs_sent << '\t'
              << total.depth << '\t' << total.retries << '\n'
              << "analytic-per-query\t-\t" << predicted.docs_sent << '\t' << predicted.depth << "\t-\n";
    if (short_runs == 0) {
        std::cout << "audit\t" << (audit.ok() ? "ok" : "MISMATCH") << "\tdocs_delta="
                  << audit.docs_delta << "\tdepth_delta=" << audit.depth_delta << '\n';
    } else {
        std::cout << "audit\tskipped (dropped rounds leave the ledger short of a full run)\n";
    }

    if (!args.cost_report.empty()) {
        nlohmann::ordered_json report{
            {"method", "tourrank"},
            {"queries", query_count},
            {"seed", seed},
            {"measured_total",
             {{"invocations", total.invocations},
              {"docs_sent", total.docs_sent},
              {"depth", total.depth},
              {"retries", total.retries}}},
            {"analytic_per_query",
             {{"docs_sent", predicted.docs_sent},
              {"depth", predicted.depth},
              {"annotations", predicted.annotations}}},
        };
        if (short_runs == 0) {
            report["audit"] = {{"ok", audit.ok()},
                               {"docs_delta", audit.docs_delta},
                               {"depth_delta", audit.depth_delta}};
        }
        std::ofstream out = detail::open_for_write(args.cost_report);
        out << report.dump(2) << '\n';
        std::cout << "wrote " << args.cost_report << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// compare

enum class MethodKind { tournament, sliding, serial, pointwise };

struct MethodSpec {
    std::string label;
    MethodKind kind = MethodKind::tournament;
    int rounds = 0;     // tournament
    int iterations = 0; // serial
};

int parse_method_suffix(const std::string& name, std::size_t prefix_len, const char* what) {
    const std::string digits = name.substr(prefix_len);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos ||
        digits.size() > 6)
        throw std::invalid_argument(std::string("bad ") + what + " in method '" + name + "'");
    const int value = std::atoi(digits.c_str());
    if (value < 1) throw std::invalid_argument(std::string("bad ") + what + " in method '" + name + "'");
    return value;
}

MethodSpec parse_method(const std::string& name) {
    MethodSpec spec;
    spec.label = name;
    if (name.rfind("tourrank-", 0) == 0) {
        spec.kind = MethodKind::tournament;
        spec.rounds = parse_method_suffix(name, 9, "round count");
        return spec;
    }
    if (name == "sliding-window") {
        spec.kind = MethodKind::sliding;
        return spec;
    }
    if (name.rfind("sliding-window-serial-", 0) == 0) {
        spec.kind = MethodKind::serial;
        spec.iterations = parse_method_suffix(name, 22, "iteration count");
        return spec;
    }
    if (name == "pointwise") {
        spec.kind = MethodKind::pointwise;
        return spec;
    }
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected tourrank-<rounds>, sliding-window, "
                                "sliding-window-serial-<iterations>, or pointwise)");
}

struct CompareArgs {
    std::string corpus;
    std::string queries;
    std::string candidates;
    std::string qrels;
    std::string methods = "tourrank-10,sliding-window,pointwise";
    std::string perturbs = "keep,shuffle,reverse";
    JudgeOpts judge;
    std::string schedule_arg = "default";
    std::optional<std::uint64_t> seed;
    int parallelism = 8;
    int window = 20;
    int step = 10;
    std::string cutoffs = "10";
    std::string json_out;
};

struct QueryQuality {
    bool judged = false;
    std::map<int, double> ndcg;     // final order, one entry per cutoff
    std::vector<double> trajectory; // serial methods: first cutoff, one per iteration
    CostLedger cost;
};

struct ComboRow {
    std::string method;
    std::string perturb;
    CostLedger cost;
    std::map<int, double> mean;
    std::vector<double> trajectory;
    int judged = 0;
    int skipped = 0;
};

int cmd_compare(const CompareArgs& args) {
    const std::uint64_t seed = resolve_seed(args.seed);

    std::vector<MethodSpec> methods;
    for (const std::string& name : split_csv(args.methods)) methods.push_back(parse_method(name));
    if (methods.empty()) throw std::invalid_argument("--methods must list at least one method");

    std::vector<PerturbMode> perturbs;
    std::vector<std::string> perturb_names = split_csv(args.perturbs);
    for (const std::string& name : perturb_names) perturbs.push_back(parse_perturb_mode(name));
    if (perturbs.empty()) throw std::invalid_argument("--perturbations must list at least one mode");

    const std::vector<int> ks = parse_cutoffs(args.cutoffs);
    const TournamentSchedule base_schedule = load_schedule(args.schedule_arg);
    const WindowSpec wspec{args.window, args.step};

    std::vector<std::pair<std::string, std::string>> config{
        {"cmd", "compare"},
        {"methods", args.methods},
        {"perturbations", args.perturbs},
        {"judge", args.judge.judge},
        {"epsilon", real_str(args.judge.epsilon)},
        {"schedule", args.schedule_arg},
        {"window", std::to_string(args.window)},
        {"step", std::to_string(args.step)},
        {"k", args.cutoffs},
        {"seed", std::to_string(seed)},
        {"parallelism", std::to_string(args.parallelism)},
        {"rng", std::string(kRngId)}};
    if (args.judge.judge == "llm") {
        config.push_back({"endpoint", args.judge.endpoint});
        config.push_back({"model", args.judge.model});
        config.push_back({"api_key", api_key_from_env().empty() ? "(unset)" : "(set)"});
    }
    echo_config(config);

    const auto corpus = read_corpus(args.corpus);
    const auto queries = read_queries(args.queries);
    const RunFile candidates = read_run(args.candidates);
    const Qrels qrels = read_qrels(args.qrels);

    const JudgeFactory factory(args.judge, &qrels, mix_seed(seed, kNoiseStream), args.parallelism);
    EngineOptions engine_options;
    engine_options.parallelism = args.parallelism;
    ConcurrencyLimit judge_limit(args.parallelism);

    std::vector<ComboRow> rows;
    for (const MethodSpec& method : methods) {
        TournamentSchedule schedule = base_schedule;
        if (method.kind == MethodKind::tournament) schedule.rounds = method.rounds;

        for (std::size_t p = 0; p < perturbs.size(); ++p) {
            const PerturbMode perturb = perturbs[p];

            const auto run_one = [&](int index) {
                const auto& [qid, text] = queries[static_cast<std::size_t>(index)];
                const std::uint64_t query_seed = mix_seed(seed, static_cast<std::uint64_t>(index));

                std::vector<Candidate> pool = assemble_candidates(candidates, corpus, qid);
                pool = perturb_initial(std::move(pool), perturb, mix_seed(query_seed, kPerturbStream));

                QueryQuality out;
                std::vector<std::vector<std::string>> orders;
                switch (method.kind) {
                case MethodKind::tournament: {
                    const auto judge = factory.selector(qid);
                    const RankingResult ranked =
                        run_tourrank(text, pool, schedule, *judge,
                                     mix_seed(query_seed, kEngineStream), engine_options, judge_limit);
                    orders.push_back(ranked.order);
                    out.cost = ranked.cost;
                    break;
                }
                case MethodKind::sliding: {
                    const auto judge = factory.orderer(qid);
                    RerankResult pass = sliding_window_rerank(text, pool, wspec, *judge);
                    out.cost = pass.cost;
                    orders.push_back(std::move(pass.order));
                    break;
                }
                case MethodKind::serial: {
                    const auto judge = factory.orderer(qid);
                    TrajectoryResult trajectory = serial_rerank(
                        pool, method.iterations, [&](const std::vector<Candidate>& current) {
                            return sliding_window_rerank(text, current, wspec, *judge);
                        });
                    out.cost = trajectory.cost;
                    orders = std::move(trajectory.orders);
                    break;
                }
                case MethodKind::pointwise: {
                    RerankResult pass = pointwise_rerank(text, pool, factory.scorer(qid));
                    out.cost = pass.cost;
                    orders.push_back(std::move(pass.order));
                    break;
                }
                }

                auto judged = qrels.find(qid);
                if (judged != qrels.end()) {
                    out.judged = true;
                    for (int k : ks) out.ndcg[k] = ndcg_at_k(orders.back(), judged->second, k);
                    for (const auto& order : orders)
                        out.trajectory.push_back(ndcg_at_k(order, judged->second, ks.front()));
                }
                return out;
            };

            const std::vector<QueryQuality> outcomes =
                for_each_query<QueryQuality>(static_cast<int>(queries.size()), args.parallelism, run_one);

            ComboRow row;
            row.method = method.label;
            row.perturb = perturb_names[p];
            std::vector<double> trajectory_sum;
            for (const QueryQuality& q : outcomes) {
                row.cost = ledger_merge(row.cost, q.cost, MergeMode::parallel);
                if (!q.judged) {
                    ++row.skipped;
                    continue;
                }
                ++row.judged;
                for (int k : ks) row.mean[k] += q.ndcg.at(k);
                trajectory_sum.resize(std::max(trajectory_sum.size(), q.trajectory.size()), 0.0);
                for (std::size_t it = 0; it < q.trajectory.size(); ++it)
                    trajectory_sum[it] += q.trajectory[it];
            }
            if (row.judged == 0)
                throw std::runtime_error("no compare query has qrels judgments; nothing to average");
            for (int k : ks) row.mean[k] /= row.judged;
            for (double total : trajectory_sum) row.trajectory.push_back(total / row.judged);
            rows.push_back(std::move(row));
        }
    }

    std::cout << "method\tperturb\tdocs_sent";
    for (int k : ks) std::cout << "\tndcg@" << k;
    std::cout << '\n';
    for (const ComboRow& row : rows) {
        std::cout << row.method << '\t' << row.perturb << '\t' << row.cost.docs_sent;
        for (int k : ks) std::cout << '\t' << fixed4(row.mean.at(k));
        std::cout << '\n';
    }

    std::cout << "spread ndcg@" << ks.front() << " (max-min across perturbations):\n";
    for (const MethodSpec& method : methods) {
        double lo = 1.0, hi = 0.0;
        for (const ComboRow& row : rows) {
            if (row.method != method.label) continue;
            lo = std::min(lo, row.mean.at(ks.front()));
            hi = std::max(hi, row.mean.at(ks.front()));
        }
        std::cout << method.label << '\t' << fixed4(hi - lo) << '\n';
    }

    for (const ComboRow& row : rows) {
        if (row.trajectory.size() < 2) continue;
        std::cout << "trajectory " << row.method << ' ' << row.perturb << " ndcg@" << ks.front() << ':';
        for (double value : row.trajectory) std::cout << ' ' << fixed4(value);
        std::cout << '\n';
    }

    const int skipped = rows.empty() ? 0 : rows.front().skipped;
    if (skipped > 0) std::cout << "note: " << skipped << " queries had no qrels and were not averaged\n";

    if (!args.json_out.empty()) {
        nlohmann::ordered_json doc;
        doc["seed"] = seed;
        doc["ks"] = ks;
        doc["rows"] = nlohmann::ordered_json::array();
        for (const ComboRow& row : rows) {
            nlohmann::ordered_json cell{{"method", row.method},
                                        {"perturb", row.perturb},
                                        {"docs_sent", row.cost.docs_sent},
                                        {"invocations", row.cost.invocations},
                                        {"judged", row.judged}};
            for (int k : ks) cell["ndcg"][std::to_string(k)] = row.mean.at(k);
            if (!row.trajectory.empty()) cell["trajectory"] = row.trajectory;
            doc["rows"].push_back(std::move(cell));
        }
        std::ofstream out = detail::open_for_write(args.json_out);
        out << doc.dump(2) << '\n';
        std::cout << "wrote " << args.json_out << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// cost

struct CostArgs {
    std::string method = "tourrank";
    int n = 100;
    std::string schedule_arg = "default";
    int rounds = 0;
    int window = 20;
    int step = 10;
    int top_k = 10;
    int per_prompt = 3;
    std::string json_out;
};

int cmd_cost(const CostArgs& args) {
    const auto method = parse_cost_method(args.method);
    if (!method)
        throw std::invalid_argument("unknown cost method '" + args.method +
                                    "' (expected pointwise, prp_allpair, setwise_bubblesort, "
                                    "sliding_window, or tourrank)");

    TournamentSchedule schedule = load_schedule(args.schedule_arg);
    if (args.rounds > 0) schedule.rounds = args.rounds;

    AnalyticParams params;
    params.window = args.window;
    params.step = args.step;
    params.top_k = args.top_k;
    params.per_prompt = args.per_prompt;
    params.schedule = &schedule;

    echo_config({{"cmd", "cost"},
                 {"method", args.method},
                 {"n", std::to_string(args.n)},
                 {"schedule", args.schedule_arg},
                 {"rounds", std::to_string(schedule.rounds)},
                 {"window", std::to_string(args.window)},
                 {"step", std::to_string(args.step)},
                 {"top_k", std::to_string(args.top_k)},
                 {"per_prompt", std::to_string(args.per_prompt)}});

    const AnalyticCost cost = analytic_cost(*method, args.n, params);
    std::cout << "method\tn\tdocs_sent\tdepth\n"
              << args.method << '\t' << args.n << '\t' << cost.docs_sent << '\t' << cost.depth << '\n';
    for (const auto& [key, value] : cost.annotations)
        std::cout << "annotation\t" << key << '\t' << real_str(value) << '\n';

    if (!args.json_out.empty()) {
        nlohmann::ordered_json doc{{"method", args.method},
                                   {"n", args.n},
                                   {"docs_sent", cost.docs_sent},
                                   {"depth", cost.depth},
                                   {"annotations", cost.annotations}};
        std::ofstream out = detail::open_for_write(args.json_out);
        out << doc.dump(2) << '\n';
        std::cout << "wrote " << args.json_out << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string run;
    std::string qrels;
    std::string cutoffs = "10";
    std::string json_out;
};

int cmd_eval(const EvalArgs& args) {
    const std::vector<int> ks = parse_cutoffs(args.cutoffs);
    echo_config({{"cmd", "eval"}, {"run", args.run}, {"qrels", args.qrels}, {"k", args.cutoffs}});

    const RunFile run = read_run(args.run);
    const Qrels qrels = read_qrels(args.qrels);
    const EvalReport report = evaluate(run, qrels, ks);

    std::cout << "query";
    for (int k : ks) std::cout << "\tndcg@" << k;
    std::cout << '\n';
    for (const auto& [qid, by_k] : report.per_query) {
        std::cout << qid;
        for (int k : ks) std::cout << '\t' << fixed4(by_k.at(k));
        std::cout << '\n';
    }
    std::cout << "mean";
    for (int k : ks) std::cout << '\t' << fixed4(report.mean.at(k));
    std::cout << '\n';
    if (!report.skipped.empty()) {
        std::cout << "skipped (no qrels):";
        for (const std::string& qid : report.skipped) std::cout << ' ' << qid;
        std::cout << '\n';
    }

    if (!args.json_out.empty()) {
        nlohmann::ordered_json doc;
        doc["ks"] = ks;
        for (const auto& [qid, by_k] : report.per_query)
            for (int k : ks) doc["per_query"][qid][std::to_string(k)] = by_k.at(k);
        for (int k : ks) doc["mean"][std::to_string(k)] = report.mean.at(k);
        doc["skipped"] = report.skipped;
        std::ofstream out = detail::open_for_write(args.json_out);
        out << doc.dump(2) << '\n';
        std::cout << "wrote " << args.json_out << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

void add_judge_options(CLI::App* cmd, JudgeOpts& judge) {
    cmd->add_option("--judge", judge.judge, "judge backend: oracle, noisy, or llm")
        ->check(CLI::IsMember({"oracle", "noisy", "llm"}))
        ->envname("TOURRANK_JUDGE")
        ->capture_default_str();
    cmd->add_option("--epsilon", judge.epsilon, "noisy-judge error rate in [0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->envname("TOURRANK_EPSILON")
        ->capture_default_str();
    cmd->add_option("--endpoint", judge.endpoint, "chat-completions URL for the llm judge")
        ->envname("TOURRANK_ENDPOINT");
    cmd->add_option("--model", judge.model, "model name for the llm judge")
        ->envname("TOURRANK_MODEL");
}

void add_seed_option(CLI::App* cmd, std::optional<std::uint64_t>& seed) {
    cmd->add_option("--seed", seed, "RNG seed; drawn and printed when absent")
        ->envname("TOURRANK_SEED");
}

void add_parallelism_option(CLI::App* cmd, int& parallelism) {
    cmd->add_option("--parallelism", parallelism, "max concurrent judge calls")
        ->check(CLI::PositiveNumber)
        ->envname("TOURRANK_PARALLELISM")
        ->capture_default_str();
}

void add_schedule_options(CLI::App* cmd, std::string& schedule_arg, int& rounds) {
    cmd->add_option("--schedule", schedule_arg, "'default' or a JSON schedule file")
        ->envname("TOURRANK_SCHEDULE")
        ->capture_default_str();
    cmd->add_option("--rounds", rounds, "override the schedule's round count")
        ->check(CLI::PositiveNumber)
        ->envname("TOURRANK_ROUNDS");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tournament-based zero-shot document re-ranking"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read option defaults from a TOML file, one [section] per subcommand");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "write a synthetic corpus/queries/qrels/candidates bundle");
    synth->add_option("--out", synth_args.out_dir, "output directory")->capture_default_str();
    synth->add_option("--queries", synth_args.num_queries, "number of queries")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--pool", synth_args.pool_size, "candidate pool size per query")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_flag("--distinct", synth_args.distinct, "give every doc in a pool a distinct grade");
    add_seed_option(synth, synth_args.seed);

    RankArgs rank_args;
    CLI::App* rank = app.add_subcommand("rank", "tournament re-ranking into a TREC run file");
    rank->add_option("--corpus", rank_args.corpus, "corpus JSONL (doc_id, text)")->required();
    rank->add_option("--queries", rank_args.queries, "queries TSV (qid<TAB>text)")->required();
    rank->add_option("--candidates", rank_args.candidates, "initial retrieval run file")->required();
    rank->add_option("--qrels", rank_args.qrels, "qrels file (required for oracle and noisy judges)");
    add_judge_options(rank, rank_args.judge);
    add_schedule_options(rank, rank_args.schedule_arg, rank_args.rounds);
    add_seed_option(rank, rank_args.seed);
    add_parallelism_option(rank, rank_args.parallelism);
    rank->add_option("--perturb", rank_args.perturb, "initial-order perturbation before ranking")
        ->check(CLI::IsMember({"keep", "shuffle", "reverse"}))
        ->envname("TOURRANK_PERTURB")
        ->capture_default_str();
    rank->add_flag("--lenient,!--strict", rank_args.lenient,
                   "drop rounds whose judge gave up instead of aborting");
    rank->add_option("--out", rank_args.out, "run file to write")->capture_default_str();
    rank->add_option("--tag", rank_args.tag, "run tag")->capture_default_str();
    rank->add_option("--cost-report", rank_args.cost_report, "also write the cost report as JSON");

    CompareArgs compare_args;
    CLI::App* compare = app.add_subcommand("compare", "methods x perturbations, mean NDCG table");
    compare->add_option("--corpus", compare_args.corpus, "corpus JSONL")->required();
    compare->add_option("--queries", compare_args.queries, "queries TSV")->required();
    compare->add_option("--candidates", compare_args.candidates, "initial retrieval run file")->required();
    compare->add_option("--qrels", compare_args.qrels, "qrels file")->required();
    compare->add_option("--methods", compare_args.methods,
                        "comma list: tourrank-<r>, sliding-window, sliding-window-serial-<i>, pointwise")
        ->capture_default_str();
    compare->add_option("--perturbations", compare_args.perturbs, "comma list: keep, shuffle, reverse")
        ->capture_default_str();
    add_judge_options(compare, compare_args.judge);
    compare->add_option("--schedule", compare_args.schedule_arg,
                        "'default' or a JSON schedule file; tourrank-<r> fixes the rounds")
        ->envname("TOURRANK_SCHEDULE")
        ->capture_default_str();
    add_seed_option(compare, compare_args.seed);
    add_parallelism_option(compare, compare_args.parallelism);
    compare->add_option("--window", compare_args.window, "sliding window size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    compare->add_option("--step", compare_args.step, "sliding window step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    compare->add_option("--k", compare_args.cutoffs, "comma list of NDCG cutoffs")->capture_default_str();
    compare->add_option("--json", compare_args.json_out, "also write the table as JSON");

    CostArgs cost_args;
    CLI::App* cost = app.add_subcommand("cost", "analytic judge-budget prediction");
    cost->add_option("--method", cost_args.method,
                     "pointwise, prp_allpair, setwise_bubblesort, sliding_window, or tourrank")
        ->capture_default_str();
    cost->add_option("--n", cost_args.n, "pool size")->check(CLI::PositiveNumber)->capture_default_str();
    add_schedule_options(cost, cost_args.schedule_arg, cost_args.rounds);
    cost->add_option("--window", cost_args.window, "sliding window size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cost->add_option("--step", cost_args.step, "sliding window step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cost->add_option("--top-k", cost_args.top_k, "setwise: ranks to settle")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cost->add_option("--per-prompt", cost_args.per_prompt, "setwise: docs per call")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cost->add_option("--json", cost_args.json_out, "also write the prediction as JSON");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "NDCG@k of a run file against qrels");
    eval->add_option("--run", eval_args.run, "run file")->required();
    eval->add_option("--qrels", eval_args.qrels, "qrels file")->required();
    eval->add_option("--k", eval_args.cutoffs, "comma list of NDCG cutoffs")->capture_default_str();
    eval->add_option("--json", eval_args.json_out, "also write the report as JSON");

    // Root options such as --config stay usable after a subcommand name.
    for (CLI::App* sub : {synth, rank, compare, cost, eval}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_args);
        if (rank->parsed()) return cmd_rank(rank_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        if (cost->parsed()) return cmd_cost(cost_args);
        if (eval->parsed()) return cmd_eval(eval_args);
    } catch (const AuthFailure& e) {
        std::cerr << "auth error: " << e.what() << '\n';
        return 3;
    } catch (const JudgeUnavailable& e) {
        std::cerr << "judge error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
