#include "burstnet/egonet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "burstnet/parallel.hpp"
#include "burstnet/random.hpp"

namespace burstnet {

namespace {

constexpr Timestamp kSecondsPerDay = 24 * kSecondsPerHour;

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            ++rank_[a];
        }
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::uint8_t> rank_;
};

}  // namespace

EgoSnapshot ego_snapshot(const TemporalGraph& g, UserIndex u, Timestamp t) {
    EgoSnapshot s;
    s.center = u;
    s.t = t;
    const auto k = EventKey::at_end_of(t);
    s.members = g.followers_at(u, k);
    for (auto m : s.members) {
        for (const auto& iv : g.in_intervals(m)) {
            if (iv.follower != u && iv.live_at(k) &&
                std::binary_search(s.members.begin(), s.members.end(), iv.follower)) {
                s.edges.push_back({iv.follower, m});
            }
        }
    }
    std::sort(s.edges.begin(), s.edges.end(), [](const Edge& a, const Edge& b) {
        return std::pair(a.follower, a.followee) < std::pair(b.follower, b.followee);
    });
    return s;
}

std::size_t wcc_count(const EgoSnapshot& s) {
    const auto k = s.members.size();
    DisjointSets sets(k);
    std::size_t components = k;
    auto pos = [&](UserIndex m) {
        return static_cast<std::size_t>(std::lower_bound(s.members.begin(), s.members.end(), m) - s.members.begin());
    };
    for (const auto& e : s.edges) {
        if (sets.unite(pos(e.follower), pos(e.followee))) {
            --components;
        }
    }
    return components;
}

std::optional<double> edge_density(const EgoSnapshot& s) {
    const auto k = static_cast<double>(s.members.size());
    if (s.members.size() < 2) {
        return std::nullopt;
    }
    return static_cast<double>(s.edges.size()) / (k * (k - 1.0));
}

MeanSimilarity follower_similarity(const EgoSnapshot& s, const UserVectors& vectors, const TfIdfVector& center) {
    MeanSimilarity out;
    double sum = 0.0;
    for (auto m : s.members) {
        const auto& v = vectors.of(m);
        if (v.is_zero()) {
            ++out.excluded;
            continue;
        }
        sum += cosine(center, v);
        ++out.used;
    }
    if (out.used > 0 && !center.is_zero()) {
        out.value = sum / static_cast<double>(out.used);
    }
    return out;
}

MeanSimilarity follower_coherence(const EgoSnapshot& s, const UserVectors& vectors, const CoherenceOptions& options) {
    MeanSimilarity out;
    std::vector<const TfIdfVector*> usable;
    for (auto m : s.members) {
        const auto& v = vectors.of(m);
        if (v.is_zero()) {
            ++out.excluded;
        } else {
            usable.push_back(&v);
        }
    }
    out.used = usable.size();
    const auto k = usable.size();
    if (k < 2) {
        return out;
    }
    double sum = 0.0;
    if (k <= options.exact_cap) {
        std::size_t pairs = 0;
        for (std::size_t a = 0; a + 1 < k; ++a) {
            DenseQuery q(*usable[a], vectors.vocab.size());
            for (std::size_t b = a + 1; b < k; ++b) {
                sum += q.cosine(*usable[b]);
                ++pairs;
            }
        }
        out.value = sum / static_cast<double>(pairs);
        return out;
    }
    auto rng = make_rng(options.seed, "coherence", (static_cast<std::uint64_t>(s.center) << 32) ^
                                                       static_cast<std::uint64_t>(s.t));
    for (std::size_t p = 0; p < options.sampled_pairs; ++p) {
        const auto a = uniform_below(rng, k);
        auto b = uniform_below(rng, k - 1);
        if (b >= a) {
            ++b;
        }
        sum += cosine(*usable[a], *usable[b]);
    }
    out.value = sum / static_cast<double>(options.sampled_pairs);
    return out;
}

std::string_view to_string(EgoMetric m) {
    switch (m) {
        case EgoMetric::Similarity: return "similarity";
        case EgoMetric::Coherence: return "coherence";
        case EgoMetric::Components: return "components";
        case EgoMetric::Density: return "density";
    }
    return "?";
}

std::optional<EgoMetric> parse_ego_metric(std::string_view text) {
    for (auto m : {EgoMetric::Similarity, EgoMetric::Coherence, EgoMetric::Components, EgoMetric::Density}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    return std::nullopt;
}

MetricFn make_metric(const TemporalGraph& g, const UserVectors& vectors, EgoMetric metric,
                     const CoherenceOptions& coherence) {
    switch (metric) {
        case EgoMetric::Similarity:
            return [&g, &vectors](UserIndex u, Timestamp t) -> std::optional<double> {
                // only members are needed, skip the induced edges
                EgoSnapshot s;
                s.center = u;
                s.t = t;
                s.members = g.followers_at(u, t);
                return follower_similarity(s, vectors, vectors.of(u)).value;
            };
        case EgoMetric::Coherence:
            return [&g, &vectors, coherence](UserIndex u, Timestamp t) -> std::optional<double> {
                EgoSnapshot s;
                s.center = u;
                s.t = t;
                s.members = g.followers_at(u, t);
                return follower_coherence(s, vectors, coherence).value;
            };
        case EgoMetric::Components:
            return [&g](UserIndex u, Timestamp t) -> std::optional<double> {
                return static_cast<double>(wcc_count(ego_snapshot(g, u, t)));
            };
        case EgoMetric::Density:
            return [&g](UserIndex u, Timestamp t) -> std::optional<double> {
                return edge_density(ego_snapshot(g, u, t));
            };
    }
    return {};
}

Timestamp burst_instant(const Window& w, const CoBurst& b) {
    return w.hour_start(b.response.end_hour + 1) - 1;
}

MetricCurve metric_curves(const TemporalGraph& g, std::span<const CoBurst> bursts, const MetricFn& metric,
                          std::span<const int> offsets, const std::string& metric_name, int threads) {
    MetricCurve curve;
    curve.metric = metric_name;
    curve.offsets.assign(offsets.begin(), offsets.end());
    const auto n_off = offsets.size();
    // per burst: relative value per offset, NaN when not evaluated
    std::vector<std::vector<double>> rel(bursts.size(), std::vector<double>(n_off, std::nan("")));
    std::vector<std::uint8_t> skipped(bursts.size(), 0);
    const auto& w = g.window();
    parallel_for(
        bursts.size(),
        [&](std::size_t b) {
            const auto& cb = bursts[b];
            const UserIndex u = cb.response.user;
            const Timestamp t0 = burst_instant(w, cb);
            const auto base = metric(u, t0);
            if (!base || *base == 0.0) {
                skipped[b] = 1;
                return;
            }
            for (std::size_t k = 0; k < n_off; ++k) {
                if (offsets[k] == 0) {
                    rel[b][k] = 1.0;
                    continue;
                }
                const Timestamp t = t0 + offsets[k] * kSecondsPerDay;
                if (!w.contains(t)) {
                    continue;
                }
                if (const auto v = metric(u, t)) {
                    rel[b][k] = *v / *base;
                }
            }
        },
        threads);
    std::vector<double> sums(n_off, 0.0);
    curve.counts.assign(n_off, 0);
    for (std::size_t b = 0; b < bursts.size(); ++b) {
        if (skipped[b]) {
            ++curve.skipped;
            continue;
        }
        for (std::size_t k = 0; k < n_off; ++k) {
            if (!std::isnan(rel[b][k])) {
                sums[k] += rel[b][k];
                ++curve.counts[k];
            }
        }
    }
    if (curve.skipped == bursts.size()) {
        throw UndefinedError("metric undefined at the burst instant for every burst");
    }
    curve.values.resize(n_off);
    for (std::size_t k = 0; k < n_off; ++k) {
        curve.values[k] = curve.counts[k] ? sums[k] / static_cast<double>(curve.counts[k]) : std::nan("");
    }
    return curve;
}

Acceleration rate_acceleration(const TemporalGraph& g, std::span<const CoBurst> bursts, const MetricFn& metric,
                               int threads) {
    Acceleration acc;
    const auto& w = g.window();
    struct Rates {
        double burst = 0.0;
        double baseline = 0.0;
        bool ok = false;
    };
    std::vector<Rates> rates(bursts.size());
    parallel_for(
        bursts.size(),
        [&](std::size_t b) {
            const auto& cb = bursts[b];
            const UserIndex u = cb.response.user;
            const int first = cb.trigger.hour;
            const int last = std::min(cb.response.end_hour + 1, w.hours() - 1);
            const auto before = metric(u, w.hour_start(first) - 1);
            const auto after = metric(u, w.hour_start(last + 1) - 1);
            const auto month_start = metric(u, w.start - 1);
            const auto month_end = metric(u, w.end - 1);
            if (!before || !after || !month_start || !month_end) {
                return;
            }
            rates[b].burst = (*after - *before) / static_cast<double>(last - first + 1);
            rates[b].baseline = (*month_end - *month_start) / static_cast<double>(w.hours());
            rates[b].ok = true;
        },
        threads);
    double sum_burst = 0.0;
    double sum_base = 0.0;
    for (const auto& r : rates) {
        if (!r.ok) {
            ++acc.skipped;
            continue;
        }
        sum_burst += r.burst;
        sum_base += r.baseline;
        ++acc.used;
    }
    if (acc.used == 0) {
        return acc;
    }
    acc.burst_rate = sum_burst / static_cast<double>(acc.used);
    acc.baseline_rate = sum_base / static_cast<double>(acc.used);
    if (acc.baseline_rate != 0.0) {
        const double sign = acc.baseline_rate > 0.0 ? 1.0 : -1.0;
        acc.percent = sign * (acc.burst_rate / acc.baseline_rate - 1.0) * 100.0;
    }
    return acc;
}

std::vector<Event> shuffled_control(const TemporalGraph& g, std::uint64_t seed) {
    const auto n = g.user_count();
    auto rng = make_rng(seed, "shuffle-control");
    std::vector<std::vector<UserIndex>> outs(n);
    std::unordered_map<std::uint64_t, std::size_t> pos;
    auto key = [](UserIndex a, UserIndex b) { return (static_cast<std::uint64_t>(a) << 32) | b; };
    auto add = [&](UserIndex a, UserIndex b) {
        pos[key(a, b)] = outs[a].size();
        outs[a].push_back(b);
    };
    auto remove = [&](UserIndex a, UserIndex b) {
        auto it = pos.find(key(a, b));
        const std::size_t p = it->second;
        pos.erase(it);
        const UserIndex last = outs[a].back();
        outs[a][p] = last;
        outs[a].pop_back();
        if (last != b) {
            pos[key(a, last)] = p;
        }
    };
    for (const auto& e : g.initial_edges()) {
        add(e.follower, e.followee);
    }
    std::vector<Event> out;
    out.reserve(g.events().size());
    for (const auto& ev : g.events()) {
        Event copy = ev;
        if (ev.kind == EventKind::Follow) {
            if (outs[ev.actor].size() + 1 >= n) {
                throw DataError("shuffled control: actor " + g.users().name(ev.actor) + " already follows everyone");
            }
            UserIndex c;
            do {
                c = static_cast<UserIndex>(uniform_below(rng, n));
            } while (c == ev.actor || pos.count(key(ev.actor, c)));
            copy.target = c;
            add(ev.actor, c);
        } else if (ev.kind == EventKind::Unfollow) {
            const auto& list = outs[ev.actor];
            if (list.empty()) {
                throw DataError("shuffled control: unfollow by " + g.users().name(ev.actor) + " with no followees");
            }
            const UserIndex c = list[uniform_below(rng, list.size())];
            copy.target = c;
            remove(ev.actor, c);
        }
        out.push_back(std::move(copy));
    }
    return out;
}

}  // namespace burstnet
