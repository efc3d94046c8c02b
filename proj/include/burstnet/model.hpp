#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "burstnet/event_store.hpp"
#include "burstnet/textsim.hpp"

namespace burstnet {

/// P(j follows i) = C exp(alpha Y_ij).
struct ModelParams {
    double C = 3.32e-4;
    double alpha = 0.6445;
    int fit_window_hours = 72;
    std::size_t n_obs = 0;
};

struct FollowObservation {
    UserIndex i = kNoUser;
    UserIndex j = kNoUser;
    double y = 0.0;
    std::uint8_t label = 0;
};

struct ObservationOptions {
    int window_hours = 72;
    std::size_t n2_cap = 200'000;
    std::uint64_t seed = 42;
};

struct ObservationReport {
    std::size_t tweets_used = 0;
    std::size_t tweets_skipped = 0;  // author's similarity stats unusable
    std::size_t undefined_y = 0;     // candidates with S == 0
    std::size_t positives = 0;
};

/// One observation per (tweet, 2-hop candidate j): label 1 when j follows the author within
/// (t, t + window]. `tweet_events` index into g.events() and must point at Tweet events.
std::vector<FollowObservation> collect_observations(const TemporalGraph& g, const UserVectors& vectors,
                                                    std::span<const std::uint32_t> tweet_events,
                                                    const ObservationOptions& options = {},
                                                    ObservationReport* report = nullptr, int threads = 0);

inline constexpr double kMaxFitProbability = 1.0 - 1e-9;

double log_likelihood(double C, double alpha, std::span<const FollowObservation> obs);

struct FitOptions {
    double gradient_tol = 1e-10;  // on the per-observation gradient
    int max_iterations = 200;
    int window_hours = 72;
};

/// Bernoulli maximum likelihood over (ln C, alpha) by damped Newton.
/// Throws UndefinedError on fewer than 2 observations, a single label, or complete separation.
ModelParams fit(std::span<const FollowObservation> obs, const FitOptions& options = {});

/// min(C exp(alpha Y), 1).
double p_hat(const ModelParams& params, double y);

struct ExposureSet {
    UserIndex i = kNoUser;
    Timestamp t0 = 0;
    Timestamp t1 = 0;
    std::vector<UserIndex> users;  // sorted
};

/// Followers (as of the end of [t0, t1)) of everyone who retweeted i inside [t0, t1),
/// restricted to N2(i) at t0.
ExposureSet exposure_set(const TemporalGraph& g, UserIndex i, Timestamp t0, Timestamp t1);

/// Distinct retweeters of i inside [t0, t1).
std::vector<UserIndex> retweeters(const TemporalGraph& g, UserIndex i, Timestamp t0, Timestamp t1);

struct ScoreOptions {
    std::size_t n2_cap = 200'000;
    std::uint64_t seed = 42;
};

struct BurstScore {
    std::optional<double> score;
    std::size_t n2 = 0;
    std::size_t exposed = 0;
    bool sampled = false;
};

/// sum_{N_RT} p / sum_{N2} p with p = p_hat(Y_ji). Undefined when N2 is empty, the author's
/// similarity stats are unusable, or the denominator vanishes.
BurstScore burst_score(const ModelParams& params, const TemporalGraph& g, const UserVectors& vectors, UserIndex i,
                       const ExposureSet& exposure, const ScoreOptions& options = {});

/// Ratio of the flagged mass to the total; nullopt for a zero total.
std::optional<double> probability_ratio(std::span<const double> p, std::span<const std::uint8_t> exposed);

}  // namespace burstnet
