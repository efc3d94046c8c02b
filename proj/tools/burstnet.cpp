// burstnet command-line driver.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "burstnet/burst.hpp"
#include "burstnet/egonet.hpp"
#include "burstnet/eval.hpp"
#include "burstnet/event_store.hpp"
#include "burstnet/model.hpp"
#include "burstnet/parallel.hpp"
#include "burstnet/random.hpp"
#include "burstnet/synthgen.hpp"
#include "burstnet/textsim.hpp"
#include "burstnet/tokens.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace burstnet;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    std::string snapshot = "snapshot.csv";
    std::string events = "events.jsonl";
    std::string out = ".";
    std::string config;
    std::uint64_t seed = 42;
    bool seed_given = false;
    int threads = 0;
    double threshold = 2.0;
    int window_hours = 72;
    double min_count = 5.0;
    std::optional<Timestamp> t_start;
    std::optional<Timestamp> t_end;
    bool skip_inconsistent = false;

    // subcommand specific
    std::string pairs;
    std::string vectors;
    std::string params;
    std::string truth;
    std::string metric = "all";
    std::string type = "retweet-follow";
    std::vector<int> offsets{-3, -2, -1, 0, 1, 2, 3};
    bool prose_follower_baseline = false;
    std::uint64_t min_support = 10;
    double confidence = 0.95;
    double train_fraction = 0.5;
    std::size_t n2_cap = 200'000;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw DataError(p.string(), 0, "cannot open file");
    }
    std::uint64_t h = fnv1a64("");
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

// Formats a double so reruns produce identical bytes.
std::string num(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class Run {
public:
    Run(std::string name, const Options& o) : name_(std::move(name)), o_(o), start_(std::chrono::steady_clock::now()) {
        fs::create_directories(o_.out);
    }

    void input(const fs::path& p) { inputs_[p.string()] = hex64(file_digest(p)); }

    std::ofstream output(const std::string& file) {
        outputs_.push_back(file);
        std::ofstream f(fs::path(o_.out) / file, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (fs::path(o_.out) / file).string());
        }
        return f;
    }

    void finish(const json& settings) {
        json m;
        m["subcommand"] = name_;
        m["config_hash"] = hex64(fnv1a64(settings.dump()));
        m["settings"] = settings;
        m["inputs"] = inputs_;
        m["outputs"] = outputs_;
        m["seed"] = o_.seed;
        m["tool_version"] = kVersion;
        m["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ofstream f(fs::path(o_.out) / (name_ + ".manifest.json"), std::ios::binary);
        f << m.dump(2) << '\n';
    }

private:
    std::string name_;
    const Options& o_;
    std::chrono::steady_clock::time_point start_;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
};

json base_settings(const Options& o) {
    json s;
    s["threshold"] = o.threshold;
    s["min_count"] = o.min_count;
    s["window_hours"] = o.window_hours;
    s["seed"] = o.seed;
    s["t_start"] = o.t_start ? json(*o.t_start) : json(nullptr);
    s["t_end"] = o.t_end ? json(*o.t_end) : json(nullptr);
    s["skip_inconsistent"] = o.skip_inconsistent;
    return s;
}

IngestResult load(const Options& o, Run& run) {
    IngestOptions io;
    io.policy = o.skip_inconsistent ? InconsistencyPolicy::Skip : InconsistencyPolicy::Reject;
    io.window_start = o.t_start;
    io.window_end = o.t_end;
    run.input(o.snapshot);
    run.input(o.events);
    auto r = ingest(fs::path(o.snapshot), fs::path(o.events), io);
    for (const auto& w : r.report.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    return r;
}

DetectOptions detect_options(const Options& o) {
    DetectOptions d;
    d.threshold_sigma = o.threshold;
    d.min_count = o.min_count;
    return d;
}

UserVectors vectors_for(const Options& o, const TemporalGraph& g, Run& run) {
    if (!o.vectors.empty() && fs::exists(o.vectors)) {
        run.input(o.vectors);
        std::ifstream in(o.vectors);
        return read_vectors(in, g, o.vectors);
    }
    return build_user_vectors(g);
}

ExperimentOptions experiment_options(const Options& o) {
    ExperimentOptions e;
    e.seed = o.seed;
    e.train_fraction = o.train_fraction;
    e.observations.window_hours = o.window_hours;
    e.observations.seed = o.seed;
    e.observations.n2_cap = o.n2_cap;
    e.scoring.seed = o.seed;
    e.scoring.n2_cap = o.n2_cap;
    e.threads = o.threads;
    if (o.prose_follower_baseline) {
        e.methods = {Method::Model, Method::Exposures, Method::Retweets, Method::FollowBursts, Method::Random};
    }
    return e;
}

ModelParams read_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(path, 0, "cannot open params file");
    }
    try {
        const auto j = json::parse(in);
        ModelParams p;
        p.C = j.at("C").get<double>();
        p.alpha = j.at("alpha").get<double>();
        p.n_obs = j.value("n_obs", std::size_t{0});
        p.fit_window_hours = j.value("window_hours", 72);
        if (!(p.C > 0.0 && p.C < 1.0) || !std::isfinite(p.alpha)) {
            throw DataError(path, 1, "params out of range: need 0 < C < 1 and finite alpha");
        }
        return p;
    } catch (const json::exception& e) {
        throw DataError(path, 1, e.what());
    }
}

void write_params(std::ostream& out, const ModelParams& p) {
    out << "{\"C\": " << num(p.C) << ", \"alpha\": " << num(p.alpha) << ", \"n_obs\": " << p.n_obs
        << ", \"window_hours\": " << p.fit_window_hours << "}\n";
}

std::vector<CoBurst> cobursts_of_type(const BurstCatalog& cat, const std::string& type) {
    std::vector<CoBurst> out;
    for (const auto& cb : cat.cobursts) {
        if (to_string(cb.type) == type) {
            out.push_back(cb);
        }
    }
    return out;
}

// ---- subcommands -----------------------------------------------------------

int cmd_generate(const Options& o) {
    Run run("generate", o);
    SynthConfig c;
    if (!o.config.empty()) {
        run.input(o.config);
        c = load_config(o.config);
    }
    if (o.seed_given) {
        c.seed = o.seed;
    }
    const auto out = generate(c);
    write_output(out, o.out);
    run.finish(json::parse(config_to_json(c)));
    std::cerr << "generated " << out.events.size() << " events for " << out.users.size() << " users into " << o.out
              << '\n';
    return 0;
}

int cmd_ingest(const Options& o) {
    Run run("ingest", o);
    const auto r = load(o, run);
    json j;
    j["users"] = r.graph.user_count();
    j["initial_edges"] = r.report.initial_edges;
    for (auto k : {EventKind::Follow, EventKind::Unfollow, EventKind::Tweet, EventKind::Retweet}) {
        j["counts"][std::string(to_string(k))] = r.report.count(k);
    }
    j["skipped"] = r.report.skipped;
    j["window"] = {{"start", r.graph.window().start}, {"end", r.graph.window().end}};
    auto f = run.output("ingest.json");
    f << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    run.finish(base_settings(o));
    return 0;
}

int cmd_summary(const Options& o) {
    Run run("summary", o);
    const auto r = load(o, run);
    const auto s = descriptive_stats(r.graph, o.window_hours);
    {
        auto f = run.output("summary.csv");
        f << "metric,value\n";
        f << "users," << s.users << '\n';
        f << "initial_edges," << s.initial_edges << '\n';
        for (auto k : {EventKind::Follow, EventKind::Unfollow, EventKind::Tweet, EventKind::Retweet}) {
            f << to_string(k) << "s," << s.kind_counts[static_cast<std::size_t>(k)] << '\n';
        }
        f << "churn_fraction," << num(s.churn_fraction) << '\n';
        f << "deletion_creation_ratio," << num(s.deletion_creation) << '\n';
        f << "top_quintile_share," << num(s.top_quintile_share) << '\n';
        f << "exposed_follows," << s.exposed_follows << '\n';
        f << "exposed_follows_path_query," << s.exposed_follows_query << '\n';
        f << "exposure_fraction," << num(s.exposure_fraction) << '\n';
        f << "exposure_window_hours," << s.exposure_window_hours << '\n';
    }
    {
        auto f = run.output("degree_bins.csv");
        f << "indegree_lo,indegree_hi,users,follows,unfollows,tweets,retweets\n";
        for (const auto& b : s.degree_bins) {
            f << b.lo << ',' << b.hi << ',' << b.users << ',' << num(b.follows) << ',' << num(b.unfollows) << ','
              << num(b.tweets) << ',' << num(b.retweets) << '\n';
        }
    }
    {
        auto f = run.output("unfollows_by_tweets.csv");
        f << "tweets_lo,tweets_hi,users,unfollows_per_follower\n";
        for (const auto& b : s.tweet_bins) {
            f << b.lo << ',' << b.hi << ',' << b.users << ',' << num(b.unfollows_per_follower) << '\n';
        }
    }
    run.finish(base_settings(o));
    return 0;
}

void write_bursts(std::ostream& f, const TemporalGraph& g, const BurstCatalog& cat) {
    f << "user,kind,hour,end_hour,start_ts,magnitude_sigma,raw_count\n";
    for (const auto& b : cat.all()) {
        f << g.users().name(b.user) << ',' << to_string(b.kind) << ',' << b.hour << ',' << b.end_hour << ','
          << g.window().hour_start(b.hour) << ',' << num(b.magnitude_sigma) << ',' << num(b.raw_count) << '\n';
    }
}

int cmd_detect(const Options& o) {
    Run run("detect-bursts", o);
    const auto r = load(o, run);
    const auto cat = detect_all(r.graph, detect_options(o), o.threads);
    auto f = run.output("bursts.csv");
    write_bursts(f, r.graph, cat);
    run.finish(base_settings(o));
    return 0;
}

int cmd_cobursts(const Options& o) {
    Run run("cobursts", o);
    const auto r = load(o, run);
    const auto cat = detect_all(r.graph, detect_options(o), o.threads);
    auto f = run.output("cobursts.csv");
    f << "type,user,trigger_hour,response_hour,lag_hours,trigger_sigma,response_sigma\n";
    for (const auto& cb : cat.cobursts) {
        f << to_string(cb.type) << ',' << r.graph.users().name(cb.trigger.user) << ',' << cb.trigger.hour << ','
          << cb.response.hour << ',' << cb.lag_hours << ',' << num(cb.trigger.magnitude_sigma) << ','
          << num(cb.response.magnitude_sigma) << '\n';
    }
    auto m = run.output("magnitudes.csv");
    const auto mc = magnitude_correlation(r.graph, cat, o.threads);
    m << "user,hour,retweet_sigma,next_hour_follow_sigma\n";
    for (const auto& p : mc.pairs) {
        m << r.graph.users().name(p.user) << ',' << p.hour << ',' << num(p.retweet_sigma) << ','
          << num(p.follow_sigma) << '\n';
    }
    m << "# pearson," << (mc.pearson ? num(*mc.pearson) : "undefined") << '\n';
    run.finish(base_settings(o));
    return 0;
}

int cmd_similarity(const Options& o) {
    Run run("similarity", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto vectors = vectors_for(o, g, run);
    {
        auto f = run.output("vectors.tsv");
        write_vectors(f, g, vectors);
    }
    if (!o.pairs.empty()) {
        run.input(o.pairs);
        std::ifstream in(o.pairs);
        auto f = run.output("similarity.csv");
        f << "a,b,similarity\n";
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line == "a,b") {
                continue;
            }
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw DataError(o.pairs, lineno, "expected 'a,b'");
            }
            const auto a = g.users().find(line.substr(0, comma));
            const auto b = g.users().find(line.substr(comma + 1));
            if (!a || !b) {
                throw DataError(o.pairs, lineno, "unknown user");
            }
            f << line.substr(0, comma) << ',' << line.substr(comma + 1) << ',' << num(vectors.similarity(*a, *b))
              << '\n';
        }
    }
    run.finish(base_settings(o));
    return 0;
}

std::vector<EgoMetric> metrics_of(const std::string& name) {
    if (name == "all") {
        return {EgoMetric::Similarity, EgoMetric::Coherence, EgoMetric::Components, EgoMetric::Density};
    }
    const auto m = parse_ego_metric(name);
    if (!m) {
        throw CLI::ValidationError("--metric", "unknown metric '" + name + "'");
    }
    return {*m};
}

int cmd_ego_curves(const Options& o) {
    Run run("ego-curves", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto vectors = vectors_for(o, g, run);
    const auto cat = detect_all(g, detect_options(o), o.threads);
    const auto bursts = cobursts_of_type(cat, o.type);
    auto f = run.output("ego_curves.csv");
    f << "metric,offset_days,value,bursts\n";
    CoherenceOptions co;
    co.seed = o.seed;
    for (auto m : metrics_of(o.metric)) {
        const auto fn = make_metric(g, vectors, m, co);
        const auto curve = metric_curves(g, bursts, fn, o.offsets, std::string(to_string(m)), o.threads);
        for (std::size_t k = 0; k < curve.offsets.size(); ++k) {
            f << curve.metric << ',' << curve.offsets[k] << ',' << num(curve.values[k]) << ',' << curve.counts[k]
              << '\n';
        }
    }
    json s = base_settings(o);
    s["type"] = o.type;
    s["metric"] = o.metric;
    s["offsets"] = o.offsets;
    run.finish(s);
    return 0;
}

int cmd_acceleration(const Options& o) {
    Run run("acceleration", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto vectors = vectors_for(o, g, run);
    const auto cat = detect_all(g, detect_options(o), o.threads);
    auto f = run.output("acceleration.csv");
    f << "type,metric,percent,burst_rate,baseline_rate,used,skipped\n";
    CoherenceOptions co;
    co.seed = o.seed;
    for (const std::string type : {"retweet-follow", "tweet-unfollow"}) {
        const auto bursts = cobursts_of_type(cat, type);
        for (auto m : metrics_of(o.metric)) {
            const auto acc = rate_acceleration(g, bursts, make_metric(g, vectors, m, co), o.threads);
            f << type << ',' << to_string(m) << ',' << (acc.percent ? num(*acc.percent) : "undefined") << ','
              << num(acc.burst_rate) << ',' << num(acc.baseline_rate) << ',' << acc.used << ',' << acc.skipped << '\n';
        }
    }
    json s = base_settings(o);
    s["metric"] = o.metric;
    run.finish(s);
    return 0;
}

int cmd_shuffle_control(const Options& o) {
    Run run("shuffle-control", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    auto shuffled_events = shuffled_control(g, o.seed);
    {
        auto f = run.output("events.shuffled.jsonl");
        write_events(f, g.users(), shuffled_events);
    }
    IngestOptions io;
    io.window_start = g.window().start;
    io.window_end = g.window().end;
    auto shuffled = TemporalGraph::build(g.users(), g.initial_edges(), std::move(shuffled_events), io);
    const auto vectors = vectors_for(o, g, run);
    const auto cat = detect_all(g, detect_options(o), o.threads);
    const auto bursts = cobursts_of_type(cat, o.type);
    auto f = run.output("shuffle_control.csv");
    f << "variant,metric,offset_days,value,bursts\n";
    for (auto m : metrics_of(o.metric == "all" ? "similarity" : o.metric)) {
        for (const TemporalGraph* graph : {&g, static_cast<const TemporalGraph*>(&shuffled)}) {
            const auto fn = make_metric(*graph, vectors, m, CoherenceOptions{500, 10'000, o.seed});
            const auto curve = metric_curves(*graph, bursts, fn, o.offsets, std::string(to_string(m)), o.threads);
            for (std::size_t k = 0; k < curve.offsets.size(); ++k) {
                f << (graph == &g ? "original" : "shuffled") << ',' << curve.metric << ',' << curve.offsets[k] << ','
                  << num(curve.values[k]) << ',' << curve.counts[k] << '\n';
            }
        }
    }
    json s = base_settings(o);
    s["type"] = o.type;
    s["offsets"] = o.offsets;
    run.finish(s);
    return 0;
}

int cmd_fit(const Options& o) {
    Run run("fit", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto vectors = vectors_for(o, g, run);
    const auto cat = detect_all(g, detect_options(o), o.threads);
    const auto e = experiment_options(o);
    const auto bursts = label_retweet_bursts(g, cat);
    const auto split = split_bursts(bursts, e.train_fraction, e.seed);
    ObservationReport rep;
    const auto obs = training_observations(g, vectors, split.train, e.observations, &rep, o.threads);
    FitOptions fo;
    fo.window_hours = o.window_hours;
    const auto params = fit(obs, fo);
    auto f = run.output("params.json");
    write_params(f, params);
    json s = base_settings(o);
    s["train_fraction"] = o.train_fraction;
    s["n2_cap"] = o.n2_cap;
    run.finish(s);
    std::cerr << "fit on " << obs.size() << " observations (" << rep.positives << " positive, " << rep.undefined_y
              << " undefined Y skipped)\n";
    return 0;
}

int cmd_predict(const Options& o) {
    if (o.params.empty()) {
        throw CLI::RequiredError("--params");
    }
    Run run("predict", o);
    run.input(o.params);
    const auto params = read_params(o.params);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto vectors = vectors_for(o, g, run);
    const auto cat = detect_all(g, detect_options(o), o.threads);
    const auto bursts = label_retweet_bursts(g, cat);
    std::vector<std::optional<double>> scores(bursts.size());
    ScoreOptions so;
    so.seed = o.seed;
    so.n2_cap = o.n2_cap;
    parallel_for(
        bursts.size(),
        [&](std::size_t k) {
            const auto& b = bursts[k];
            scores[k] = burst_score(params, g, vectors, b.trigger.user, exposure_set(g, b.trigger.user, b.t0, b.t1), so)
                            .score;
        },
        o.threads);
    auto f = run.output("predictions.csv");
    f << "user,t0,t1,score\n";
    for (std::size_t k = 0; k < bursts.size(); ++k) {
        f << g.users().name(bursts[k].trigger.user) << ',' << bursts[k].t0 << ',' << bursts[k].t1 << ','
          << (scores[k] ? num(*scores[k]) : "undefined") << '\n';
    }
    run.finish(base_settings(o));
    return 0;
}

int cmd_evaluate(const Options& o) {
    Run run("evaluate", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto vectors = vectors_for(o, g, run);
    const auto cat = detect_all(g, detect_options(o), o.threads);
    const auto e = experiment_options(o);
    Pipeline p;
    if (!o.params.empty()) {
        run.input(o.params);
        p.params = read_params(o.params);
        p.bursts = label_retweet_bursts(g, cat);
        p.split = split_bursts(p.bursts, e.train_fraction, e.seed);
        p.results = run_experiment(g, vectors, cat, p.split.test, p.params, e);
    } else {
        p = run_pipeline(g, vectors, cat, e);
        auto pf = run.output("params.json");
        write_params(pf, p.params);
    }
    {
        auto f = run.output("ap_by_method.csv");
        f << "method,AUC\n";
        for (const auto& res : p.results) {
            f << to_string(res.method) << ',' << (res.ap ? num(*res.ap) : "undefined") << '\n';
        }
    }
    {
        auto f = run.output("pr_curves.csv");
        f << "method,rank,recall,precision\n";
        for (const auto& res : p.results) {
            const auto curve = pr_curve(res.ranked);
            for (std::size_t k = 0; k < curve.size(); ++k) {
                f << to_string(res.method) << ',' << k + 1 << ',' << num(curve[k].recall) << ','
                  << num(curve[k].precision) << '\n';
            }
        }
    }
    json s = base_settings(o);
    s["train_fraction"] = o.train_fraction;
    s["n2_cap"] = o.n2_cap;
    s["prose_follower_baseline"] = o.prose_follower_baseline;
    s["params"] = o.params;
    run.finish(s);
    std::cerr << "test bursts: " << p.split.test.size() << ", positive rate " << num(p.positive_rate()) << '\n';
    return 0;
}

int cmd_tokens(const Options& o) {
    Run run("tokens", o);
    const auto r = load(o, run);
    const auto& g = r.graph;
    const auto cat = detect_all(g, detect_options(o), o.threads);
    const auto bursts = label_retweet_bursts(g, cat);
    TokenOptions to;
    to.min_support = o.min_support;
    to.confidence = o.confidence;
    const auto stats = token_analysis(token_bursts(g, bursts), to);
    auto f = run.output("tokens.csv");
    f << "token,R,chi2,support\n";
    for (const auto& s : stats) {
        f << s.token << ',' << num(s.ratio) << ',' << num(s.chi2) << ',' << s.support() << '\n';
    }
    json s = base_settings(o);
    s["min_support"] = o.min_support;
    s["confidence"] = o.confidence;
    run.finish(s);
    return 0;
}

int cmd_truth_report(const Options& o) {
    if (o.truth.empty()) {
        throw CLI::RequiredError("--truth");
    }
    Run run("truth-report", o);
    run.input(o.truth);
    const auto truth = load_truth(o.truth);
    const auto r = load(o, run);
    const auto cat = detect_all(r.graph, detect_options(o), o.threads);
    std::optional<ModelParams> fitted;
    if (!o.params.empty()) {
        run.input(o.params);
        fitted = read_params(o.params);
    }
    const auto s = truth_report(truth, r.graph, cat, fitted);
    json j;
    j["planted_retweet_bursts"] = s.planted_retweet;
    j["recovered_retweet_bursts"] = s.recovered_retweet;
    j["retweet_recall"] = s.retweet_recall();
    j["planted_tweet_bursts"] = s.planted_tweet;
    j["recovered_tweet_bursts"] = s.recovered_tweet;
    j["tweet_recall"] = s.tweet_recall();
    j["detected_retweet_bursts"] = s.detected_retweet;
    j["detector_precision"] = s.precision();
    j["coupled_plants"] = s.coupled;
    j["label_agreement"] = s.label_agreement();
    if (s.alpha_error) {
        j["alpha_relative_error"] = *s.alpha_error;
        j["C_relative_error"] = *s.C_error;
    }
    auto f = run.output("truth_report.json");
    f << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    run.finish(base_settings(o));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"burstnet: bursts, cascades and follow prediction on temporal follower graphs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options o;

    auto common = [&](CLI::App* sub, bool data = true) {
        if (data) {
            sub->add_option("--snapshot", o.snapshot, "initial follower snapshot (follower,followee per line)");
            sub->add_option("--events", o.events, "event log, JSON lines");
            sub->add_option("--t-start", o.t_start, "observation window start (epoch seconds)");
            sub->add_option("--t-end", o.t_end, "observation window end (epoch seconds, exclusive)");
            sub->add_flag("--skip-inconsistent", o.skip_inconsistent,
                          "skip duplicate follows / phantom unfollows with a warning instead of failing");
        }
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--config", o.config, "JSON config file");
        sub->add_option("--seed", o.seed, "seed for every random stream")->each([&](const std::string&) {
            o.seed_given = true;
        });
        sub->add_option("--threads", o.threads, "worker threads (default: BURSTNET_THREADS or all cores)");
        sub->add_option("--threshold", o.threshold, "burst threshold in residual standard deviations");
        sub->add_option("--window-hours", o.window_hours, "follow label / exposure window in hours");
        sub->add_option("--min-count", o.min_count, "minimum raw count in a burst hour");
    };

    std::map<std::string, std::function<int(const Options&)>> handlers;
    auto add = [&](const std::string& name, const std::string& help, std::function<int(const Options&)> fn,
                   bool data = true) {
        auto* sub = app.add_subcommand(name, help);
        common(sub, data);
        handlers[name] = std::move(fn);
        return sub;
    };

    add("generate", "write a synthetic snapshot, event log and ground truth", cmd_generate, false);
    add("ingest", "validate an event log and report counts", cmd_ingest);
    add("summary", "descriptive statistics of the graph dynamics", cmd_summary);
    add("detect-bursts", "deseasonalize hourly series and flag bursts", cmd_detect);
    add("cobursts", "pair trigger and response bursts", cmd_cobursts);
    auto* sim = add("similarity", "TF-IDF vectors and pairwise similarities", cmd_similarity);
    sim->add_option("--pairs", o.pairs, "CSV of user pairs to score");
    sim->add_option("--vectors", o.vectors, "vector cache to read if present");
    for (auto* sub : {add("ego-curves", "ego-network metric curves around co-bursts", cmd_ego_curves),
                      add("shuffle-control", "same curves with randomized follow/unfollow recipients",
                          cmd_shuffle_control)}) {
        sub->add_option("--metric", o.metric, "similarity, coherence, components, density or all");
        sub->add_option("--type", o.type, "retweet-follow or tweet-unfollow");
        sub->add_option("--offsets", o.offsets, "day offsets around the burst")->delimiter(',');
        sub->add_option("--vectors", o.vectors, "vector cache to read if present");
    }
    auto* acc = add("acceleration", "metric change rate inside bursts vs the whole window", cmd_acceleration);
    acc->add_option("--metric", o.metric, "similarity, coherence, components, density or all");
    acc->add_option("--vectors", o.vectors, "vector cache to read if present");
    for (auto* sub : {add("fit", "fit the follow-probability law", cmd_fit),
                      add("predict", "score retweet bursts", cmd_predict),
                      add("evaluate", "train/test experiment with baselines", cmd_evaluate)}) {
        sub->add_option("--params", o.params, "params JSON from fit");
        sub->add_option("--vectors", o.vectors, "vector cache to read if present");
        sub->add_option("--train-fraction", o.train_fraction, "share of retweet bursts used for fitting");
        sub->add_option("--n2-cap", o.n2_cap, "2-hop candidates sampled above this size");
        sub->add_flag("--prose-follower-baseline", o.prose_follower_baseline,
                      "rank by previous follow bursts instead of follower count");
    }
    auto* tok = add("tokens", "tokens that shift the follow-burst probability", cmd_tokens);
    tok->add_option("--min-support", o.min_support, "minimum tweets containing the token");
    tok->add_option("--confidence", o.confidence, "chi-square confidence level");
    auto* tr = add("truth-report", "score detector output against generator ground truth", cmd_truth_report);
    tr->add_option("--truth", o.truth, "truth.jsonl from generate");
    tr->add_option("--params", o.params, "fitted params JSON");

    if (argc < 2) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    set_default_threads(resolve_threads(o.threads));
    try {
        for (const auto& [name, fn] : handlers) {
            if (app.got_subcommand(name)) {
                return fn(o);
            }
        }
        std::cerr << app.help();
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 1;
    } catch (const UndefinedError& e) {
        std::cerr << "undefined: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
