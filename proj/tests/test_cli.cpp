#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "burstnet/synthgen.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(BURSTNET_CLI) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) {
        r.out.append(buf, n);
    }
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// One small generated world shared by every case.
const fs::path& world() {
    static const fs::path dir = [] {
        const auto d = fs::temp_directory_path() / "burstnet_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        burstnet::SynthConfig c;
        c.n_users = 1500;
        c.n_days = 10;
        c.n_retweet_bursts = 150;
        c.plant_min_indegree = 15;
        c.n_tweet_unfollow_bursts = 30;
        std::ofstream(d / "small.json") << burstnet::config_to_json(c);
        const auto r = run("generate --config " + (d / "small.json").string() + " --out " + d.string());
        REQUIRE(r.code == 0);
        return d;
    }();
    return dir;
}

std::string data_args(const fs::path& out) {
    return " --snapshot " + (world() / "snapshot.csv").string() + " --events " + (world() / "events.jsonl").string() +
           " --out " + out.string();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").code == 2);
    CHECK(run("no-such-command").code == 2);
    CHECK(run("summary --no-such-flag").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("bad inputs exit with 1") {
    const auto out = fs::temp_directory_path() / "burstnet_cli_bad";
    fs::remove_all(out);
    CHECK(run("summary --snapshot /nonexistent.csv --events /nonexistent.jsonl --out " + out.string()).code == 1);
    fs::create_directories(out);
    std::ofstream(out / "params.json") << R"({"C": 5, "alpha": 1})";
    CHECK(run("predict" + data_args(out) + " --params " + (out / "params.json").string()).code == 1);
    std::ofstream(out / "broken.jsonl") << R"({"ts":1,"seq":0,"kind":"unfollow","actor":"a","target":"b"})" << '\n';
    std::ofstream(out / "empty.csv") << "";
    const std::string broken =
        " --snapshot " + (out / "empty.csv").string() + " --events " + (out / "broken.jsonl").string();
    CHECK(run("ingest" + broken + " --out " + out.string()).code == 1);
    CHECK(run("ingest" + broken + " --skip-inconsistent --out " + out.string()).code == 0);
    fs::remove_all(out);
}

TEST_CASE("generate writes the dataset and a manifest") {
    const auto& d = world();
    for (const auto* f : {"snapshot.csv", "events.jsonl", "truth.jsonl", "config.json", "generate.manifest.json"}) {
        CHECK(fs::exists(d / f));
    }
    const auto m = json::parse(slurp(d / "generate.manifest.json"));
    for (const auto* key : {"subcommand", "config_hash", "settings", "inputs", "outputs", "seed", "tool_version",
                            "wall_clock_seconds"}) {
        CHECK(m.contains(key));
    }
    CHECK(m["subcommand"] == "generate");
}

TEST_CASE("every analysis subcommand runs and records its outputs") {
    const auto out = world() / "run";
    const auto args = data_args(out);
    std::ofstream(world() / "pairs.csv") << "a,b\nu00000,u00001\nu00002,u00003\n";
    const std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
        {"ingest", {}},
        {"summary", {"summary.csv", "degree_bins.csv"}},
        {"detect-bursts", {"bursts.csv"}},
        {"cobursts", {"cobursts.csv", "magnitudes.csv"}},
        {"similarity --pairs " + (world() / "pairs.csv").string(), {"vectors.tsv", "similarity.csv"}},
        {"ego-curves --metric similarity --vectors " + (out / "vectors.tsv").string(), {"ego_curves.csv"}},
        {"ego-curves --metric components", {"ego_curves.csv"}},
        {"acceleration --metric density", {"acceleration.csv"}},
        {"shuffle-control --metric components", {"shuffle_control.csv", "events.shuffled.jsonl"}},
        {"fit", {"params.json"}},
        {"predict --params " + (out / "params.json").string(), {"predictions.csv"}},
        {"evaluate", {"ap_by_method.csv", "pr_curves.csv", "params.json"}},
        {"tokens --min-support 3", {"tokens.csv"}},
        {"truth-report --truth " + (world() / "truth.jsonl").string(), {"truth_report.json"}},
    };
    for (const auto& [cmd, files] : steps) {
        CAPTURE(cmd);
        const auto r = run(cmd + args);
        CHECK(r.code == 0);
        const auto sub = cmd.substr(0, cmd.find(' '));
        const auto manifest = out / (sub + ".manifest.json");
        REQUIRE(fs::exists(manifest));
        const auto m = json::parse(slurp(manifest));
        CHECK(m["subcommand"] == sub);
        CHECK(m["inputs"].size() >= 2);
        for (const auto& f : files) {
            CHECK(fs::exists(out / f));
            CHECK(std::find(m["outputs"].begin(), m["outputs"].end(), f) != m["outputs"].end());
        }
    }
    const auto table = slurp(out / "ap_by_method.csv");
    for (const auto* method : {"model", "retweet-exposures", "retweets", "followers", "random"}) {
        CHECK(table.find(method) != std::string::npos);
    }
    const auto params = json::parse(slurp(out / "params.json"));
    CHECK(params["C"].get<double>() > 0.0);
    CHECK(params["alpha"].is_number());
}

TEST_CASE("reruns are byte-identical across thread counts") {
    const auto a = world() / "rerun_a";
    const auto b = world() / "rerun_b";
    REQUIRE(run("evaluate" + data_args(a) + " --threads 1").code == 0);
    REQUIRE(run("evaluate" + data_args(b) + " --threads 3").code == 0);
    for (const auto* f : {"ap_by_method.csv", "pr_curves.csv", "params.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    REQUIRE(run("detect-bursts" + data_args(a)).code == 0);
    REQUIRE(run("detect-bursts" + data_args(b)).code == 0);
    CHECK(slurp(a / "bursts.csv") == slurp(b / "bursts.csv"));
}

TEST_CASE("seed flag overrides the config seed") {
    const auto d = world() / "seeded";
    REQUIRE(run("generate --config " + (world() / "small.json").string() + " --seed 7 --out " + d.string()).code == 0);
    CHECK(slurp(d / "events.jsonl") != slurp(world() / "events.jsonl"));
    const auto cfg = json::parse(slurp(d / "config.json"));
    CHECK(cfg["seed"] == 7);
}
