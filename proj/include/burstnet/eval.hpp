#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "burstnet/burst.hpp"
#include "burstnet/event_store.hpp"
#include "burstnet/model.hpp"
#include "burstnet/textsim.hpp"
#include "burstnet/tokens.hpp"

namespace burstnet {

/// Mean of precision@rank over the positives of a ranked label list.
/// Throws UndefinedError when there is no positive.
double average_precision(std::span<const std::uint8_t> ranked_labels);

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;
};

/// One point per rank: (recall, precision) after the first k items.
std::vector<PRPoint> pr_curve(std::span<const std::uint8_t> ranked_labels);

/// Orders labels by descending score after a seeded shuffle (so ties land in a fixed random
/// order); undefined scores go last.
std::vector<std::uint8_t> rank_labels(std::span<const std::optional<double>> scores,
                                      std::span<const std::uint8_t> labels, std::uint64_t seed,
                                      std::string_view stream);

enum class Method { Model, Exposures, Retweets, Followers, FollowBursts, Random };
std::string_view to_string(Method m);

inline constexpr std::array<Method, 5> kTableMethods = {Method::Model, Method::Exposures, Method::Retweets,
                                                       Method::Followers, Method::Random};

/// A retweet burst with its co-burst label and the tweet that drove it.
struct LabeledBurst {
    std::uint32_t id = 0;  // position in the catalog's retweet-burst list
    Burst trigger;
    std::uint8_t label = 0;
    Timestamp t0 = 0;  // start of the first burst hour
    Timestamp t1 = 0;  // end of the last burst hour (exclusive)
    std::optional<std::uint32_t> tweet;  // most-retweeted tweet inside the burst
};

std::vector<LabeledBurst> label_retweet_bursts(const TemporalGraph& g, const BurstCatalog& catalog);

struct Split {
    std::vector<LabeledBurst> train;
    std::vector<LabeledBurst> test;
};

/// Seeded split. Throws std::logic_error if a burst id lands on both sides.
Split split_bursts(std::span<const LabeledBurst> bursts, double train_fraction, std::uint64_t seed);
void assert_disjoint(const Split& split);

struct PRResult {
    Method method = Method::Random;
    std::vector<std::uint8_t> ranked;
    std::optional<double> ap;
    std::size_t undefined = 0;  // bursts the method could not score, ranked last
};

struct ExperimentOptions {
    std::uint64_t seed = 42;
    double train_fraction = 0.5;
    ObservationOptions observations;
    ScoreOptions scoring;
    std::vector<Method> methods{kTableMethods.begin(), kTableMethods.end()};
    int threads = 0;
};

/// Scores the given bursts with every method and ranks them.
std::vector<PRResult> run_experiment(const TemporalGraph& g, const UserVectors& vectors, const BurstCatalog& catalog,
                                     std::span<const LabeledBurst> bursts, const ModelParams& params,
                                     const ExperimentOptions& options = {});

struct Pipeline {
    std::vector<LabeledBurst> bursts;
    Split split;
    ObservationReport observation_report;
    std::size_t n_observations = 0;
    ModelParams params;
    std::vector<PRResult> results;

    [[nodiscard]] double positive_rate() const;
};

/// Label, split, fit on the training bursts' tweets, evaluate on the held-out bursts.
Pipeline run_pipeline(const TemporalGraph& g, const UserVectors& vectors, const BurstCatalog& catalog,
                      const ExperimentOptions& options = {});

/// Training observations from the tweets behind the given bursts.
std::vector<FollowObservation> training_observations(const TemporalGraph& g, const UserVectors& vectors,
                                                     std::span<const LabeledBurst> bursts,
                                                     const ObservationOptions& options,
                                                     ObservationReport* report = nullptr, int threads = 0);

struct MagnitudePair {
    UserIndex user = kNoUser;
    int hour = 0;
    double retweet_sigma = 0.0;
    double follow_sigma = 0.0;  // deseasonalized follows one hour later, in sigmas
};

struct MagnitudeTable {
    std::vector<MagnitudePair> pairs;
    std::optional<double> pearson;
};

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pairs each retweet burst's magnitude with the follow residual of the next hour.
MagnitudeTable magnitude_correlation(const TemporalGraph& g, const BurstCatalog& catalog, int threads = 0);

struct DegreeBin {
    std::size_t lo = 0, hi = 0;  // initial indegree range [lo, hi)
    std::size_t users = 0;
    double follows = 0.0, unfollows = 0.0, tweets = 0.0, retweets = 0.0;  // mean per user
};

struct TweetBin {
    std::size_t lo = 0, hi = 0;  // tweets authored [lo, hi)
    std::size_t users = 0;
    double unfollows_per_follower = 0.0;
};

struct DescriptiveStats {
    std::size_t users = 0;
    std::size_t initial_edges = 0;
    std::array<std::size_t, 4> kind_counts{};  // by EventKind
    double churn_fraction = 0.0;               // distinct pairs touched / initial edges
    double deletion_creation = 0.0;            // unfollows / follows
    double top_quintile_share = 0.0;           // follows+unfollows received by the top 20% by initial indegree
    std::size_t exposed_follows = 0;           // streaming flag
    std::size_t exposed_follows_query = 0;     // post-hoc path query
    double exposure_fraction = 0.0;
    int exposure_window_hours = 72;
    std::vector<DegreeBin> degree_bins;
    std::vector<TweetBin> tweet_bins;
};

/// A follow j -> r counts as exposure-driven when some k that j followed at the time
/// retweeted r within the previous window (strictly earlier in the log).
DescriptiveStats descriptive_stats(const TemporalGraph& g, int exposure_window_hours = 72);

/// Token inputs for the labeled bursts that have a triggering tweet.
std::vector<TokenBurst> token_bursts(const TemporalGraph& g, std::span<const LabeledBurst> bursts);

}  // namespace burstnet
