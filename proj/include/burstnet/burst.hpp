#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "burstnet/event_store.hpp"

namespace burstnet {

/// Same-hour residuals f_i = x_i - E[x | hour of day], where the expectation is an
/// exponentially weighted mean of the values 24 h and 48 h away (self excluded).
struct DeseasonalizedSeries {
    UserIndex user = kNoUser;
    SeriesKind kind = SeriesKind::IncomingFollows;
    std::vector<double> x;
    std::vector<double> f;
    std::vector<std::uint8_t> defined;
    double sigma_f = 0.0;
    double lambda = 0.0;
};

struct Burst {
    UserIndex user = kNoUser;
    SeriesKind kind = SeriesKind::IncomingFollows;
    int hour = 0;      // first flagged hour
    int end_hour = 0;  // last flagged hour of the merged run
    double magnitude_sigma = 0.0;  // max f / sigma_f over the run
    double raw_count = 0.0;        // events summed over the run

    friend bool operator==(const Burst&, const Burst&) = default;
};

enum class CoBurstType { RetweetFollow, TweetUnfollow };
std::string_view to_string(CoBurstType t);

struct CoBurst {
    CoBurstType type = CoBurstType::RetweetFollow;
    Burst trigger;
    Burst response;
    int lag_hours = 0;
};

struct DetectOptions {
    double threshold_sigma = 2.0;
    double min_count = 5.0;
};

inline constexpr double kMaxDecay = 5.0;
inline constexpr std::size_t kMinFitHours = 72;

/// Sum of squared residuals over defined hours; the quantity fit_decay minimizes.
double decay_objective(std::span<const double> x, double lambda);

/// Golden-section search over [0, 5]. Returns 0 when the objective is flat at the lower end.
/// Throws std::invalid_argument for series shorter than 72 hours.
double fit_decay(const HourlySeries& series);
double fit_decay(std::span<const double> x);

DeseasonalizedSeries deseasonalize(const HourlySeries& series, double lambda);
DeseasonalizedSeries deseasonalize(std::span<const double> x, double lambda);

/// Flags hours with f > threshold * sigma_f and x >= min_count; consecutive hours merge.
std::vector<Burst> detect_bursts(const DeseasonalizedSeries& d, const DetectOptions& options = {});

using BurstsByKind = std::array<std::vector<Burst>, 4>;  // indexed by SeriesKind

/// Pairs trigger bursts (retweets received / tweets) with response bursts (follows / unfollows)
/// starting 0 or 1 hours later. Each response takes the nearest preceding eligible trigger.
std::vector<CoBurst> pair_cobursts(const BurstsByKind& bursts_by_kind);

struct BurstCatalog {
    std::vector<BurstsByKind> by_user;  // indexed by UserIndex
    std::vector<CoBurst> cobursts;       // ordered by (user, response hour)

    [[nodiscard]] std::vector<Burst> all() const;  // ordered by (user, kind, hour)
    [[nodiscard]] std::vector<Burst> of_kind(SeriesKind kind) const;
};

/// Runs fit_decay, deseasonalize, detect_bursts for every (user, kind), then pairs co-bursts.
BurstCatalog detect_all(const TemporalGraph& g, const DetectOptions& options = {}, int threads = 0);

}  // namespace burstnet
