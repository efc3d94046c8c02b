#pragma once

// Instance builders and brute-force oracles shared by the module tests and the acceptance
// binary. Oracles only read the raw snapshot and event list, never the graph's indexes.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "burstnet/burst.hpp"
#include "burstnet/egonet.hpp"
#include "burstnet/event_store.hpp"
#include "burstnet/random.hpp"

namespace bt {

using namespace burstnet;

class GraphBuilder {
public:
    explicit GraphBuilder(Timestamp t0 = 0) : t0_(t0) {}

    UserIndex u(const std::string& name) { return users_.intern(name); }

    GraphBuilder& edge(const std::string& follower, const std::string& followee) {
        edges_.push_back({u(follower), u(followee)});
        return *this;
    }
    GraphBuilder& follow(Timestamp ts, const std::string& a, const std::string& b) {
        return add(ts, EventKind::Follow, a, b);
    }
    GraphBuilder& unfollow(Timestamp ts, const std::string& a, const std::string& b) {
        return add(ts, EventKind::Unfollow, a, b);
    }
    GraphBuilder& tweet(Timestamp ts, const std::string& a, const std::string& text, const std::string& id = "") {
        Event e = make(ts, EventKind::Tweet, a);
        e.text = text;
        e.tweet_id = id.empty() ? "tw" + std::to_string(events_.size()) : id;
        events_.push_back(std::move(e));
        return *this;
    }
    GraphBuilder& retweet(Timestamp ts, const std::string& a, const std::string& author, const std::string& id = "") {
        Event e = make(ts, EventKind::Retweet, a);
        e.target = u(author);
        e.tweet_id = id;
        events_.push_back(std::move(e));
        return *this;
    }

    TemporalGraph build(std::optional<Timestamp> start = std::nullopt, std::optional<Timestamp> end = std::nullopt) {
        IngestOptions o;
        o.window_start = start ? start : std::optional<Timestamp>(t0_);
        o.window_end = end;
        return TemporalGraph::build(users_, edges_, events_, o);
    }

    UserTable users_;
    std::vector<Edge> edges_;
    std::vector<Event> events_;

private:
    Event make(Timestamp ts, EventKind kind, const std::string& a) {
        Event e;
        e.ts = ts;
        e.seq = static_cast<std::int64_t>(events_.size());
        e.kind = kind;
        e.actor = u(a);
        return e;
    }
    GraphBuilder& add(Timestamp ts, EventKind kind, const std::string& a, const std::string& b) {
        Event e = make(ts, kind, a);
        e.target = u(b);
        events_.push_back(std::move(e));
        return *this;
    }

    Timestamp t0_;
};

struct RandomGraphSpec {
    std::size_t users = 12;
    double edge_prob = 0.2;
    std::size_t events = 60;
    Timestamp span = 10 * kSecondsPerHour;
    double retweet_share = 0.25;
};

/// Valid random temporal graph: follows only on absent edges, unfollows only on live ones.
/// Timestamps collide on purpose so that seq tie-breaking is exercised.
inline TemporalGraph random_graph(Rng& rng, const RandomGraphSpec& spec = {}) {
    UserTable users;
    for (std::size_t k = 0; k < spec.users; ++k) {
        users.intern("n" + std::to_string(k));
    }
    std::set<std::pair<UserIndex, UserIndex>> live;
    std::vector<Edge> edges;
    for (UserIndex a = 0; a < spec.users; ++a) {
        for (UserIndex b = 0; b < spec.users; ++b) {
            if (a != b && bernoulli(rng, spec.edge_prob)) {
                edges.push_back({a, b});
                live.insert({a, b});
            }
        }
    }
    std::vector<Timestamp> times(spec.events);
    for (auto& t : times) {
        t = static_cast<Timestamp>(uniform_below(rng, static_cast<std::uint64_t>(spec.span / 60))) * 60;
    }
    std::sort(times.begin(), times.end());
    std::vector<Event> events;
    for (std::size_t k = 0; k < spec.events; ++k) {
        Event e;
        e.ts = times[k];
        e.seq = static_cast<std::int64_t>(k);
        const auto a = static_cast<UserIndex>(uniform_below(rng, spec.users));
        auto b = static_cast<UserIndex>(uniform_below(rng, spec.users - 1));
        if (b >= a) {
            ++b;
        }
        e.actor = a;
        e.target = b;
        if (bernoulli(rng, spec.retweet_share)) {
            e.kind = EventKind::Retweet;
            e.tweet_id = "t" + std::to_string(b);
        } else if (live.count({a, b})) {
            e.kind = EventKind::Unfollow;
            live.erase({a, b});
        } else {
            e.kind = EventKind::Follow;
            live.insert({a, b});
        }
        events.push_back(std::move(e));
    }
    IngestOptions o;
    o.window_start = 0;
    o.window_end = spec.span;
    return TemporalGraph::build(std::move(users), std::move(edges), std::move(events), o);
}

/// Ego snapshot over members 0..k-1 with each ordered pair present with probability p.
inline EgoSnapshot random_ego(Rng& rng, std::size_t k, double p) {
    EgoSnapshot s;
    s.center = static_cast<UserIndex>(k + 100);
    for (std::size_t i = 0; i < k; ++i) {
        s.members.push_back(static_cast<UserIndex>(i));
    }
    for (UserIndex a = 0; a < k; ++a) {
        for (UserIndex b = 0; b < k; ++b) {
            if (a != b && bernoulli(rng, p)) {
                s.edges.push_back({a, b});
            }
        }
    }
    return s;
}

/// Edge set after naive replay of every event with key <= k.
inline std::set<std::pair<UserIndex, UserIndex>> replay_edges(const TemporalGraph& g, EventKey k) {
    std::set<std::pair<UserIndex, UserIndex>> live;
    for (const auto& e : g.initial_edges()) {
        live.insert({e.follower, e.followee});
    }
    for (const auto& e : g.events()) {
        if (e.key() > k) {
            continue;
        }
        if (e.kind == EventKind::Follow) {
            live.insert({e.actor, e.target});
        } else if (e.kind == EventKind::Unfollow) {
            live.erase({e.actor, e.target});
        }
    }
    return live;
}

inline std::vector<UserIndex> followers_oracle(const TemporalGraph& g, UserIndex u, EventKey k) {
    std::vector<UserIndex> out;
    for (const auto& [a, b] : replay_edges(g, k)) {
        if (b == u) {
            out.push_back(a);
        }
    }
    return out;
}

/// Plain double loop over the replayed edge set.
inline std::vector<UserIndex> two_hop_oracle(const TemporalGraph& g, UserIndex u, Timestamp t) {
    const auto live = replay_edges(g, EventKey::at_end_of(t));
    const auto n = static_cast<UserIndex>(g.user_count());
    std::vector<UserIndex> out;
    for (UserIndex w = 0; w < n; ++w) {
        if (w == u || live.count({w, u})) {
            continue;
        }
        bool reach = false;
        for (UserIndex v = 0; v < n && !reach; ++v) {
            reach = live.count({v, u}) && live.count({w, v});
        }
        if (reach) {
            out.push_back(w);
        }
    }
    return out;
}

/// Triple loop: w in N2(i) at t0 and w follows some retweeter of i (retweet in [t0, t1)) at t1 - 1.
inline std::vector<UserIndex> exposure_oracle(const TemporalGraph& g, UserIndex i, Timestamp t0, Timestamp t1) {
    std::set<UserIndex> rts;
    for (const auto& e : g.events()) {
        if (e.kind == EventKind::Retweet && e.target == i && e.ts >= t0 && e.ts < t1) {
            rts.insert(e.actor);
        }
    }
    const auto n2 = two_hop_oracle(g, i, t0);
    const auto late = replay_edges(g, EventKey::at_end_of(t1 - 1));
    std::vector<UserIndex> out;
    for (auto w : n2) {
        for (auto r : rts) {
            if (late.count({w, r})) {
                out.push_back(w);
                break;
            }
        }
    }
    return out;
}

/// Components by repeated BFS over the undirected version of the snapshot.
inline std::size_t wcc_oracle(const EgoSnapshot& s) {
    std::map<UserIndex, std::vector<UserIndex>> adj;
    for (auto m : s.members) {
        adj[m];
    }
    for (const auto& e : s.edges) {
        adj[e.follower].push_back(e.followee);
        adj[e.followee].push_back(e.follower);
    }
    std::set<UserIndex> seen;
    std::size_t comps = 0;
    for (const auto& [start, unused] : adj) {
        if (seen.count(start)) {
            continue;
        }
        ++comps;
        std::vector<UserIndex> queue{start};
        seen.insert(start);
        for (std::size_t q = 0; q < queue.size(); ++q) {
            for (auto v : adj[queue[q]]) {
                if (seen.insert(v).second) {
                    queue.push_back(v);
                }
            }
        }
    }
    return comps;
}

inline std::optional<double> density_oracle(const EgoSnapshot& s) {
    const double k = static_cast<double>(s.members.size());
    if (k < 2) {
        return std::nullopt;
    }
    std::size_t count = 0;
    for (auto a : s.members) {
        for (auto b : s.members) {
            if (a != b && std::find(s.edges.begin(), s.edges.end(), Edge{a, b}) != s.edges.end()) {
                ++count;
            }
        }
    }
    return static_cast<double>(count) / (k * (k - 1.0));
}

/// Residual by direct summation of w(d) = exp(-lambda |d| / 24) over same-hour neighbors at
/// 24 and 48 hours in either direction.
struct DirectResiduals {
    std::vector<double> f;
    std::vector<bool> defined;
    double sigma = 0.0;
};

inline DirectResiduals deseasonalize_oracle(const std::vector<double>& x, double lambda) {
    DirectResiduals r;
    const long n = static_cast<long>(x.size());
    r.f.assign(x.size(), 0.0);
    r.defined.assign(x.size(), false);
    for (long i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (long j = std::max(0L, i - 48); j <= std::min(n - 1, i + 48); ++j) {
            const long d = std::labs(j - i);
            if (d == 0 || d % 24 != 0) {
                continue;
            }
            const double w = std::exp(-lambda * static_cast<double>(d) / 24.0);
            num += w * x[static_cast<std::size_t>(j)];
            den += w;
        }
        if (den > 0) {
            r.f[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - num / den;
            r.defined[static_cast<std::size_t>(i)] = true;
        }
    }
    std::vector<double> vals;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (r.defined[i]) {
            vals.push_back(r.f[i]);
        }
    }
    if (!vals.empty()) {
        double mean = 0.0;
        for (double v : vals) {
            mean += v / static_cast<double>(vals.size());
        }
        double var = 0.0;
        for (double v : vals) {
            var += (v - mean) * (v - mean) / static_cast<double>(vals.size());
        }
        r.sigma = std::sqrt(var);
    }
    return r;
}

/// Area under the precision-recall staircase, integrating precision over each recall step
/// at every threshold.
inline double ap_oracle(const std::vector<std::uint8_t>& labels) {
    double positives = 0;
    for (auto l : labels) {
        positives += l;
    }
    double area = 0.0, prev_recall = 0.0, hits = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        hits += labels[k];
        const double recall = hits / positives;
        const double precision = hits / static_cast<double>(k + 1);
        area += precision * (recall - prev_recall);
        prev_recall = recall;
    }
    return area;
}

}  // namespace bt
