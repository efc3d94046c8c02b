#include "burstnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "burstnet/parallel.hpp"
#include "burstnet/random.hpp"

namespace burstnet {

namespace {

std::span<const std::uint32_t> events_between(const TemporalGraph& g, std::span<const std::uint32_t> idx, Timestamp lo,
                                              Timestamp hi) {
    const auto& evs = g.events();
    auto first = std::lower_bound(idx.begin(), idx.end(), lo, [&](std::uint32_t e, Timestamp t) { return evs[e].ts < t; });
    auto last = std::lower_bound(first, idx.end(), hi, [&](std::uint32_t e, Timestamp t) { return evs[e].ts < t; });
    return {first, last};
}

std::uint64_t pair_key(UserIndex a, UserIndex b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

double average_precision(std::span<const std::uint8_t> ranked_labels) {
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < ranked_labels.size(); ++k) {
        if (ranked_labels[k]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(k + 1);
        }
    }
    if (hits == 0) {
        throw UndefinedError("average precision needs at least one positive");
    }
    return sum / static_cast<double>(hits);
}

std::vector<PRPoint> pr_curve(std::span<const std::uint8_t> ranked_labels) {
    const auto total = std::count(ranked_labels.begin(), ranked_labels.end(), std::uint8_t{1});
    std::vector<PRPoint> out;
    out.reserve(ranked_labels.size());
    std::size_t hits = 0;
    for (std::size_t k = 0; k < ranked_labels.size(); ++k) {
        hits += ranked_labels[k] ? 1 : 0;
        out.push_back({total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0,
                       static_cast<double>(hits) / static_cast<double>(k + 1)});
    }
    return out;
}

std::vector<std::uint8_t> rank_labels(std::span<const std::optional<double>> scores,
                                      std::span<const std::uint8_t> labels, std::uint64_t seed,
                                      std::string_view stream) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("rank_labels: scores and labels differ in length");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, stream);
    shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& sa = scores[a];
        const auto& sb = scores[b];
        if (sa.has_value() != sb.has_value()) {
            return sa.has_value();
        }
        return sa && *sa > *sb;
    });
    std::vector<std::uint8_t> out;
    out.reserve(order.size());
    for (auto k : order) {
        out.push_back(labels[k]);
    }
    return out;
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Model: return "model";
        case Method::Exposures: return "retweet-exposures";
        case Method::Retweets: return "retweets";
        case Method::Followers: return "followers";
        case Method::FollowBursts: return "previous-follow-bursts";
        case Method::Random: return "random";
    }
    return "?";
}

std::vector<LabeledBurst> label_retweet_bursts(const TemporalGraph& g, const BurstCatalog& catalog) {
    std::unordered_set<std::uint64_t> positive;
    for (const auto& cb : catalog.cobursts) {
        if (cb.type == CoBurstType::RetweetFollow) {
            positive.insert(pair_key(cb.trigger.user, static_cast<UserIndex>(cb.trigger.hour)));
        }
    }
    const auto& w = g.window();
    const auto& evs = g.events();
    std::vector<LabeledBurst> out;
    for (const auto& b : catalog.of_kind(SeriesKind::RetweetsReceived)) {
        LabeledBurst lb;
        lb.id = static_cast<std::uint32_t>(out.size());
        lb.trigger = b;
        lb.label = positive.count(pair_key(b.user, static_cast<UserIndex>(b.hour))) ? 1 : 0;
        lb.t0 = w.hour_start(b.hour);
        lb.t1 = std::min(w.hour_start(b.end_hour + 1), w.end);
        std::map<std::string, std::pair<std::size_t, std::uint32_t>> counts;  // id -> (count, first event)
        for (auto e : events_between(g, g.series_events(b.user, SeriesKind::RetweetsReceived), lb.t0, lb.t1)) {
            if (evs[e].tweet_id.empty()) {
                continue;
            }
            auto [it, fresh] = counts.try_emplace(evs[e].tweet_id, 0, e);
            ++it->second.first;
        }
        const std::string* best = nullptr;
        std::pair<std::size_t, std::uint32_t> best_val{0, 0};
        for (const auto& [id, val] : counts) {
            if (!best || val.first > best_val.first ||
                (val.first == best_val.first && val.second < best_val.second)) {
                best = &id;
                best_val = val;
            }
        }
        if (best) {
            lb.tweet = g.find_tweet(*best);
        }
        out.push_back(std::move(lb));
    }
    return out;
}

void assert_disjoint(const Split& split) {
    std::unordered_set<std::uint32_t> ids;
    for (const auto& b : split.train) {
        ids.insert(b.id);
    }
    for (const auto& b : split.test) {
        if (ids.count(b.id)) {
            throw std::logic_error("burst " + std::to_string(b.id) + " appears in both train and test");
        }
    }
}

Split split_bursts(std::span<const LabeledBurst> bursts, double train_fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(bursts.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed, "train-test-split");
    shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(bursts.size())));
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    Split s;
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < n_train ? s.train : s.test).push_back(bursts[order[k]]);
    }
    assert_disjoint(s);
    return s;
}

std::vector<PRResult> run_experiment(const TemporalGraph& g, const UserVectors& vectors, const BurstCatalog& catalog,
                                     std::span<const LabeledBurst> bursts, const ModelParams& params,
                                     const ExperimentOptions& options) {
    const auto n = bursts.size();
    const auto n_methods = options.methods.size();
    std::vector<std::vector<std::optional<double>>> scores(n_methods, std::vector<std::optional<double>>(n));
    parallel_for(
        n,
        [&](std::size_t k) {
            const auto& lb = bursts[k];
            const UserIndex i = lb.trigger.user;
            std::optional<ExposureSet> exposure;
            auto get_exposure = [&]() -> const ExposureSet& {
                if (!exposure) {
                    exposure = exposure_set(g, i, lb.t0, lb.t1);
                }
                return *exposure;
            };
            for (std::size_t m = 0; m < n_methods; ++m) {
                auto& slot = scores[m][k];
                switch (options.methods[m]) {
                    case Method::Model:
                        slot = burst_score(params, g, vectors, i, get_exposure(), options.scoring).score;
                        break;
                    case Method::Exposures:
                        slot = static_cast<double>(get_exposure().users.size());
                        break;
                    case Method::Retweets:
                        slot = lb.trigger.raw_count;
                        break;
                    case Method::Followers:
                        slot = static_cast<double>(g.follower_count_at(i, lb.t0 - 1));
                        break;
                    case Method::FollowBursts: {
                        const auto& follows = catalog.by_user.at(i)[static_cast<std::size_t>(SeriesKind::IncomingFollows)];
                        slot = static_cast<double>(std::count_if(follows.begin(), follows.end(), [&](const Burst& b) {
                            return b.end_hour < lb.trigger.hour;
                        }));
                        break;
                    }
                    case Method::Random: {
                        auto rng = make_rng(options.seed, "random-baseline", lb.id);
                        slot = uniform01(rng);
                        break;
                    }
                }
            }
        },
        options.threads);
    std::vector<std::uint8_t> labels;
    labels.reserve(n);
    for (const auto& lb : bursts) {
        labels.push_back(lb.label);
    }
    std::vector<PRResult> out;
    for (std::size_t m = 0; m < n_methods; ++m) {
        PRResult r;
        r.method = options.methods[m];
        r.undefined = static_cast<std::size_t>(
            std::count_if(scores[m].begin(), scores[m].end(), [](const auto& s) { return !s.has_value(); }));
        r.ranked = rank_labels(scores[m], labels, options.seed, std::string("rank-") + std::string(to_string(r.method)));
        if (std::find(labels.begin(), labels.end(), 1) != labels.end()) {
            r.ap = average_precision(r.ranked);
        }
        out.push_back(std::move(r));
    }
    return out;
}

double Pipeline::positive_rate() const {
    if (split.test.empty()) {
        return 0.0;
    }
    double pos = 0.0;
    for (const auto& b : split.test) {
        pos += b.label;
    }
    return pos / static_cast<double>(split.test.size());
}

std::vector<FollowObservation> training_observations(const TemporalGraph& g, const UserVectors& vectors,
                                                     std::span<const LabeledBurst> bursts,
                                                     const ObservationOptions& options, ObservationReport* report,
                                                     int threads) {
    std::vector<std::uint32_t> tweets;
    for (const auto& b : bursts) {
        if (b.tweet) {
            tweets.push_back(*b.tweet);
        }
    }
    std::sort(tweets.begin(), tweets.end());
    tweets.erase(std::unique(tweets.begin(), tweets.end()), tweets.end());
    return collect_observations(g, vectors, tweets, options, report, threads);
}

Pipeline run_pipeline(const TemporalGraph& g, const UserVectors& vectors, const BurstCatalog& catalog,
                      const ExperimentOptions& options) {
    Pipeline p;
    p.bursts = label_retweet_bursts(g, catalog);
    p.split = split_bursts(p.bursts, options.train_fraction, options.seed);
    const auto obs = training_observations(g, vectors, p.split.train, options.observations, &p.observation_report,
                                           options.threads);
    p.n_observations = obs.size();
    FitOptions fo;
    fo.window_hours = options.observations.window_hours;
    p.params = fit(obs, fo);
    p.results = run_experiment(g, vectors, catalog, p.split.test, p.params, options);
    return p;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = x.size();
    if (n < 2 || y.size() != n) {
        return std::nullopt;
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return std::nullopt;
    }
    return sxy / std::sqrt(sxx * syy);
}

MagnitudeTable magnitude_correlation(const TemporalGraph& g, const BurstCatalog& catalog, int threads) {
    const auto n = catalog.by_user.size();
    std::vector<std::vector<MagnitudePair>> per_user(n);
    const auto hours = static_cast<std::size_t>(g.window().hours());
    parallel_for(
        n,
        [&](std::size_t u) {
            const auto& rts = catalog.by_user[u][static_cast<std::size_t>(SeriesKind::RetweetsReceived)];
            if (rts.empty()) {
                return;
            }
            const auto series = g.hourly_series(static_cast<UserIndex>(u), SeriesKind::IncomingFollows);
            const double lambda = hours >= kMinFitHours ? fit_decay(series) : 0.0;
            const auto d = deseasonalize(series, lambda);
            if (!(d.sigma_f > 1e-12)) {
                return;
            }
            for (const auto& b : rts) {
                const auto h = static_cast<std::size_t>(b.hour + 1);
                if (h >= d.f.size() || !d.defined[h]) {
                    continue;
                }
                per_user[u].push_back({b.user, b.hour, b.magnitude_sigma, d.f[h] / d.sigma_f});
            }
        },
        threads);
    MagnitudeTable t;
    std::vector<double> xs, ys;
    for (auto& v : per_user) {
        for (auto& p : v) {
            xs.push_back(p.retweet_sigma);
            ys.push_back(p.follow_sigma);
            t.pairs.push_back(p);
        }
    }
    t.pearson = pearson(xs, ys);
    return t;
}

DescriptiveStats descriptive_stats(const TemporalGraph& g, int exposure_window_hours) {
    DescriptiveStats s;
    const auto n = g.user_count();
    const auto& evs = g.events();
    s.users = n;
    s.initial_edges = g.initial_edges().size();
    s.exposure_window_hours = exposure_window_hours;
    const Timestamp horizon = static_cast<Timestamp>(exposure_window_hours) * kSecondsPerHour;

    std::vector<std::size_t> indeg(n, 0), follows(n, 0), unfollows(n, 0), tweets(n, 0), retweets(n, 0);
    for (const auto& e : g.initial_edges()) {
        ++indeg[e.followee];
    }

    // streaming pass: replay the graph, flag follows preceded by a retweet exposure
    std::vector<std::vector<UserIndex>> live(n);
    std::unordered_map<std::uint64_t, std::size_t> pos;
    auto add = [&](UserIndex follower, UserIndex followee) {
        pos[pair_key(follower, followee)] = live[followee].size();
        live[followee].push_back(follower);
    };
    auto remove = [&](UserIndex follower, UserIndex followee) {
        auto it = pos.find(pair_key(follower, followee));
        const auto p = it->second;
        pos.erase(it);
        const UserIndex last = live[followee].back();
        live[followee][p] = last;
        live[followee].pop_back();
        if (last != follower) {
            pos[pair_key(last, followee)] = p;
        }
    };
    for (const auto& e : g.initial_edges()) {
        add(e.follower, e.followee);
    }
    std::unordered_map<std::uint64_t, Timestamp> last_exposure;  // (j, author) -> latest retweet seen by j
    std::unordered_set<std::uint64_t> touched;
    std::vector<std::uint32_t> follow_events;
    for (std::uint32_t k = 0; k < evs.size(); ++k) {
        const auto& e = evs[k];
        ++s.kind_counts[static_cast<std::size_t>(e.kind)];
        switch (e.kind) {
            case EventKind::Follow: {
                ++follows[e.target];
                touched.insert(pair_key(e.actor, e.target));
                follow_events.push_back(k);
                auto it = last_exposure.find(pair_key(e.actor, e.target));
                if (it != last_exposure.end() && e.ts - it->second <= horizon) {
                    ++s.exposed_follows;
                }
                add(e.actor, e.target);
                break;
            }
            case EventKind::Unfollow:
                ++unfollows[e.target];
                touched.insert(pair_key(e.actor, e.target));
                remove(e.actor, e.target);
                break;
            case EventKind::Tweet:
                ++tweets[e.actor];
                break;
            case EventKind::Retweet:
                ++retweets[e.target];
                for (auto j : live[e.actor]) {
                    if (j != e.target) {
                        last_exposure[pair_key(j, e.target)] = e.ts;
                    }
                }
                break;
        }
    }

    // post-hoc path query: a retweet of r by someone j followed at that moment
    std::vector<std::uint8_t> flagged(follow_events.size(), 0);
    parallel_for(follow_events.size(), [&](std::size_t idx) {
        const auto& f = evs[follow_events[idx]];
        for (auto r : events_between(g, g.series_events(f.target, SeriesKind::RetweetsReceived), f.ts - horizon,
                                     f.ts + 1)) {
            const auto& rt = evs[r];
            if (rt.key() < f.key() && g.follows_at(f.actor, rt.actor, rt.key())) {
                flagged[idx] = 1;
                return;
            }
        }
    });
    s.exposed_follows_query = static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), std::uint8_t{1}));

    const auto n_follow = s.kind_counts[static_cast<std::size_t>(EventKind::Follow)];
    const auto n_unfollow = s.kind_counts[static_cast<std::size_t>(EventKind::Unfollow)];
    if (n_follow > 0) {
        s.deletion_creation = static_cast<double>(n_unfollow) / static_cast<double>(n_follow);
        s.exposure_fraction = static_cast<double>(s.exposed_follows) / static_cast<double>(n_follow);
    }
    if (s.initial_edges > 0) {
        s.churn_fraction = static_cast<double>(touched.size()) / static_cast<double>(s.initial_edges);
    }

    if (n > 0) {
        std::vector<UserIndex> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) { return indeg[a] > indeg[b]; });
        const std::size_t top = (n + 4) / 5;
        double top_changes = 0.0;
        for (std::size_t k = 0; k < top; ++k) {
            top_changes += static_cast<double>(follows[order[k]] + unfollows[order[k]]);
        }
        const double all = static_cast<double>(n_follow + n_unfollow);
        s.top_quintile_share = all > 0.0 ? top_changes / all : 0.0;
    }

    // log2 bins: [0,1), [1,2), [2,4), [4,8), ...
    auto bin_of = [](std::size_t v) {
        std::size_t b = 0;
        while (v > 0) {
            v >>= 1;
            ++b;
        }
        return b;
    };
    auto bin_range = [](std::size_t b) -> std::pair<std::size_t, std::size_t> {
        if (b == 0) {
            return {0, 1};
        }
        return {std::size_t{1} << (b - 1), std::size_t{1} << b};
    };
    for (UserIndex u = 0; u < n; ++u) {
        const auto b = bin_of(indeg[u]);
        if (s.degree_bins.size() <= b) {
            s.degree_bins.resize(b + 1);
        }
        auto& db = s.degree_bins[b];
        ++db.users;
        db.follows += static_cast<double>(follows[u]);
        db.unfollows += static_cast<double>(unfollows[u]);
        db.tweets += static_cast<double>(tweets[u]);
        db.retweets += static_cast<double>(retweets[u]);
    }
    for (std::size_t b = 0; b < s.degree_bins.size(); ++b) {
        auto& db = s.degree_bins[b];
        std::tie(db.lo, db.hi) = bin_range(b);
        if (db.users) {
            const auto m = static_cast<double>(db.users);
            db.follows /= m;
            db.unfollows /= m;
            db.tweets /= m;
            db.retweets /= m;
        }
    }
    for (UserIndex u = 0; u < n; ++u) {
        if (indeg[u] == 0) {
            continue;
        }
        const auto b = bin_of(tweets[u]);
        if (s.tweet_bins.size() <= b) {
            s.tweet_bins.resize(b + 1);
        }
        auto& tb = s.tweet_bins[b];
        ++tb.users;
        tb.unfollows_per_follower += static_cast<double>(unfollows[u]) / static_cast<double>(indeg[u]);
    }
    for (std::size_t b = 0; b < s.tweet_bins.size(); ++b) {
        auto& tb = s.tweet_bins[b];
        std::tie(tb.lo, tb.hi) = bin_range(b);
        if (tb.users) {
            tb.unfollows_per_follower /= static_cast<double>(tb.users);
        }
    }
    return s;
}

std::vector<TokenBurst> token_bursts(const TemporalGraph& g, std::span<const LabeledBurst> bursts) {
    std::vector<TokenBurst> out;
    for (const auto& b : bursts) {
        if (!b.tweet) {
            continue;
        }
        out.push_back({tokenize(g.events()[*b.tweet].text), b.label != 0});
    }
    return out;
}

}  // namespace burstnet
