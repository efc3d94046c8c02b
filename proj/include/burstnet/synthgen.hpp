#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "burstnet/burst.hpp"
#include "burstnet/eval.hpp"
#include "burstnet/event_store.hpp"

namespace burstnet {

/// Explicit retweet plant; replaces the random plants when the config lists any.
struct PlantSpec {
    std::string user;  // generator user id, e.g. "u00042"
    int hour = 0;
    int retweets = 0;
    double boost = 0.0;
    bool couples_follow = false;
};

struct SynthConfig {
    std::size_t n_users = 10'000;
    int n_days = 30;
    std::uint64_t seed = 42;
    Timestamp t_start = 1320105600;  // 2011-11-01 00:00 UTC
    std::array<double, 24> diurnal_profile{};  // rescaled to mean 1; all zero means the default curve

    // initial graph
    double indegree_exponent = 2.2;
    std::size_t min_indegree = 8;
    std::size_t max_indegree = 0;  // 0: n_users / 10
    double homophily = 0.75;

    // text
    int n_topics = 20;
    int words_per_topic = 25;
    int n_common_words = 40;
    double dominant_weight = 0.7;
    double tweets_per_day = 1.2;
    int tokens_min = 6;
    int tokens_max = 10;

    // background churn; negative rates / gamma mean "calibrate"
    double base_follow_rate = -1.0;    // background follows per hour, whole network
    double base_unfollow_rate = -1.0;  // background unfollows per hour, whole network
    double follow_rate_gamma = -1.0;   // per-followee weight indegree^gamma
    bool calibrate_gamma = true;
    double top_quintile_target = 0.594;
    double deletion_ratio = 1.0 / 3.0;
    double exposure_fraction = 0.21;
    int calibration_passes = 3;

    // follow law for exposed 2-hop users
    double model_C = 0.02;
    double model_alpha = 1.0;
    double response_delay_minutes = 15.0;

    // planted retweet bursts
    std::size_t n_retweet_bursts = 5600;
    std::size_t plant_min_indegree = 30;
    int min_burst_spacing_hours = 72;
    double retweets_mean = 8.0;
    int retweets_min = 6;
    double coupled_magnitude_factor = 1.15;
    double cohort_boost = 3.0;
    double audience_boost = 1.0;  // coupled plants weight retweeters by audience size^this
    double couple_rate = 0.165;  // P(couples_follow) without the hot token
    std::string hot_token = "breaking";
    double hot_token_rate = 0.2;
    double hot_token_effect = 3.0;
    double stranger_mean = 3.0;  // extra non-exposed follows per coupled burst
    std::vector<PlantSpec> planted_bursts;

    // planted tweet-unfollow bursts
    std::size_t n_tweet_unfollow_bursts = 300;
    double tweet_flood_mean = 12.0;
    double unfollow_flood_mean = 8.0;

    /// Standard config with every plant removed and a flat diurnal profile.
    static SynthConfig null_model(std::size_t n_users = 10'000, int n_days = 30, std::uint64_t seed = 42);

    [[nodiscard]] std::size_t hours() const { return static_cast<std::size_t>(n_days) * 24; }
    [[nodiscard]] std::array<double, 24> diurnal() const;
    /// Throws std::invalid_argument naming the first infeasible setting.
    void validate() const;
};

SynthConfig config_from_json(const std::string& text);
SynthConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const SynthConfig& config);

struct PlantedBurst {
    enum class Kind { Retweet, TweetUnfollow } kind = Kind::Retweet;
    std::string user;
    int hour = 0;
    int triggers = 0;  // retweets or flood tweets emitted
    double boost = 0.0;
    bool couples_follow = false;
    bool hot = false;
    std::string tweet_id;
    std::size_t exposed = 0;    // first-time exposures drawn against the law
    std::size_t responses = 0;  // follows (or unfollows) emitted for this plant
};

struct LawBin {
    double lo = 0.0, hi = 0.0;
    std::size_t n = 0;
    std::size_t follows = 0;
    double expected = 0.0;  // sum of the law probabilities drawn in this bin
};

struct GroundTruth {
    SynthConfig config;  // resolved: calibrated rates filled in
    std::uint64_t events_digest = 0;
    std::array<std::size_t, 4> kind_counts{};  // by EventKind
    std::size_t background_follows = 0;
    std::size_t response_follows = 0;
    std::size_t stranger_follows = 0;
    std::size_t measured_exposed_follows = 0;
    std::size_t planted_unfollows = 0;
    std::vector<PlantedBurst> bursts;
    std::vector<LawBin> law;
    std::vector<std::pair<std::string, std::vector<double>>> mixtures;
};

struct SynthOutput {
    UserTable users;
    std::vector<Edge> snapshot;
    std::vector<Event> events;
    GroundTruth truth;
};

SynthOutput generate(const SynthConfig& config);

/// FNV-1a over the serialized event log (the exact bytes of events.jsonl).
std::uint64_t events_digest(const UserTable& users, std::span<const Event> events);

/// Writes snapshot.csv, events.jsonl, truth.jsonl and config.json into `dir`.
void write_output(const SynthOutput& out, const std::filesystem::path& dir);

void write_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth(std::istream& in, const std::string& name = "<truth>");
GroundTruth load_truth(const std::filesystem::path& path);

struct Scorecard {
    std::size_t planted_retweet = 0;
    std::size_t recovered_retweet = 0;
    std::size_t planted_tweet = 0;
    std::size_t recovered_tweet = 0;
    std::size_t detected_retweet = 0;   // retweet bursts found by the detector
    std::size_t matched_retweet = 0;    // of those, overlapping a plant
    std::size_t coupled = 0;            // plants with couples_follow
    std::size_t label_agree = 0;        // recovered plants whose co-burst label equals couples_follow
    std::optional<double> alpha_error;  // relative, when fitted params are given
    std::optional<double> C_error;

    [[nodiscard]] double retweet_recall() const;
    [[nodiscard]] double tweet_recall() const;
    [[nodiscard]] double precision() const;
    [[nodiscard]] double label_agreement() const;
};

/// Compares detector output (and optionally fitted params) with the planted truth.
/// Throws DataError when the graph's event log is not the one the truth describes.
Scorecard truth_report(const GroundTruth& truth, const TemporalGraph& g, const BurstCatalog& catalog,
                       const std::optional<ModelParams>& fitted = std::nullopt);

}  // namespace burstnet
