#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "burstnet/burst.hpp"
#include "burstnet/event_store.hpp"
#include "burstnet/textsim.hpp"

namespace burstnet {

/// The subgraph induced on a user's followers at one instant (the user excluded).
struct EgoSnapshot {
    UserIndex center = kNoUser;
    Timestamp t = 0;
    std::vector<UserIndex> members;  // sorted
    std::vector<Edge> edges;         // directed, sorted by (follower, followee)
};

EgoSnapshot ego_snapshot(const TemporalGraph& g, UserIndex u, Timestamp t);

/// Weakly connected components of the snapshot; 0 for an empty snapshot.
std::size_t wcc_count(const EgoSnapshot& s);

/// |edges| / (k (k - 1)); nullopt for fewer than two members.
std::optional<double> edge_density(const EgoSnapshot& s);

struct MeanSimilarity {
    std::optional<double> value;
    std::size_t used = 0;
    std::size_t excluded = 0;  // members with zero vectors
};

/// Mean S(center, m) over members with non-zero vectors.
MeanSimilarity follower_similarity(const EgoSnapshot& s, const UserVectors& vectors, const TfIdfVector& center);

struct CoherenceOptions {
    std::size_t exact_cap = 500;         // exact all-pairs mean up to this many usable members
    std::size_t sampled_pairs = 10'000;  // uniform pairs drawn above the cap
    std::uint64_t seed = 42;
};

/// Mean pairwise S over unordered member pairs (usable members only).
MeanSimilarity follower_coherence(const EgoSnapshot& s, const UserVectors& vectors, const CoherenceOptions& options = {});

enum class EgoMetric { Similarity, Coherence, Components, Density };
std::string_view to_string(EgoMetric m);
std::optional<EgoMetric> parse_ego_metric(std::string_view text);

/// Metric value for (user, instant); nullopt when undefined.
using MetricFn = std::function<std::optional<double>(UserIndex, Timestamp)>;

MetricFn make_metric(const TemporalGraph& g, const UserVectors& vectors, EgoMetric metric,
                     const CoherenceOptions& coherence = {});

/// Instant a co-burst is measured at: the last second of its response burst.
Timestamp burst_instant(const Window& w, const CoBurst& b);

struct MetricCurve {
    std::string metric;
    std::vector<int> offsets;         // days
    std::vector<double> values;       // mean of metric(offset) / metric(0)
    std::vector<std::size_t> counts;  // bursts contributing at each offset
    std::size_t skipped = 0;          // bursts with an undefined or zero value at offset 0
};

/// Averages each burst's trajectory normalized by its value at the burst instant.
/// Throws UndefinedError when every burst is skipped.
MetricCurve metric_curves(const TemporalGraph& g, std::span<const CoBurst> bursts, const MetricFn& metric,
                          std::span<const int> offsets, const std::string& metric_name = "", int threads = 0);

struct Acceleration {
    std::optional<double> percent;  // signed: negative when the metric is falling faster
    double burst_rate = 0.0;        // mean change per hour inside burst windows
    double baseline_rate = 0.0;     // mean change per hour over the whole window
    std::size_t used = 0;
    std::size_t skipped = 0;
};

/// (burst-window rate / whole-window rate - 1) in percent, signed by the baseline direction.
/// The burst window runs from the trigger's first hour through one hour past the response.
Acceleration rate_acceleration(const TemporalGraph& g, std::span<const CoBurst> bursts, const MetricFn& metric,
                               int threads = 0);

/// Replaces each Follow/Unfollow recipient at random while keeping actors, times and order.
/// Follows go to a uniform user the actor does not currently follow; unfollows drop a uniform
/// current followee, so the output replays cleanly against the same snapshot.
std::vector<Event> shuffled_control(const TemporalGraph& g, std::uint64_t seed);

}  // namespace burstnet
