#include "burstnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "burstnet/parallel.hpp"
#include "burstnet/random.hpp"

namespace burstnet {

namespace {

const double kLogMaxP = std::log(kMaxFitProbability);

// Indices of series events with ts in [lo, hi).
std::span<const std::uint32_t> events_between(const TemporalGraph& g, std::span<const std::uint32_t> idx, Timestamp lo,
                                              Timestamp hi) {
    const auto& evs = g.events();
    auto first = std::lower_bound(idx.begin(), idx.end(), lo, [&](std::uint32_t e, Timestamp t) { return evs[e].ts < t; });
    auto last = std::lower_bound(first, idx.end(), hi, [&](std::uint32_t e, Timestamp t) { return evs[e].ts < t; });
    return {first, last};
}

// Uniform subset of `size` positions out of `n`, sorted, via partial Fisher-Yates.
std::vector<std::size_t> sample_positions(std::size_t n, std::size_t size, Rng& rng) {
    std::vector<std::size_t> pos(n);
    for (std::size_t k = 0; k < n; ++k) {
        pos[k] = k;
    }
    for (std::size_t k = 0; k < size; ++k) {
        const auto r = k + uniform_below(rng, n - k);
        std::swap(pos[k], pos[r]);
    }
    pos.resize(size);
    std::sort(pos.begin(), pos.end());
    return pos;
}

struct Derivatives {
    double ll = 0.0;
    double g0 = 0.0, g1 = 0.0;
    double h00 = 0.0, h01 = 0.0, h11 = 0.0;
};

Derivatives derivatives(double a, double alpha, std::span<const FollowObservation> obs) {
    Derivatives d;
    for (const auto& o : obs) {
        const double eta = a + alpha * o.y;
        if (eta >= kLogMaxP) {
            // clamped: constant in the parameters
            d.ll += o.label ? kLogMaxP : std::log1p(-kMaxFitProbability);
            continue;
        }
        const double p = std::exp(eta);
        if (o.label) {
            d.ll += eta;
            const double s = 1.0;
            d.g0 += s;
            d.g1 += s * o.y;
        } else {
            d.ll += std::log1p(-p);
            const double q = 1.0 - p;
            const double s = -p / q;
            const double h = -p / (q * q);
            d.g0 += s;
            d.g1 += s * o.y;
            d.h00 += h;
            d.h01 += h * o.y;
            d.h11 += h * o.y * o.y;
        }
    }
    return d;
}

}  // namespace

std::vector<FollowObservation> collect_observations(const TemporalGraph& g, const UserVectors& vectors,
                                                    std::span<const std::uint32_t> tweet_events,
                                                    const ObservationOptions& options, ObservationReport* report,
                                                    int threads) {
    const auto& evs = g.events();
    struct Slot {
        std::vector<FollowObservation> obs;
        std::size_t undefined = 0;
        bool used = false;
    };
    std::vector<Slot> slots(tweet_events.size());
    const Timestamp horizon = static_cast<Timestamp>(options.window_hours) * kSecondsPerHour;
    parallel_for(
        tweet_events.size(),
        [&](std::size_t k) {
            const auto& tw = evs.at(tweet_events[k]);
            if (tw.kind != EventKind::Tweet) {
                throw std::invalid_argument("collect_observations: event " + std::to_string(tweet_events[k]) +
                                            " is not a tweet");
            }
            const UserIndex i = tw.actor;
            const auto stats = similarity_stats(g, i, tw.ts, vectors);
            if (!stats.usable()) {
                return;
            }
            auto& slot = slots[k];
            slot.used = true;
            auto n2 = g.two_hop_at(i, tw.ts);
            if (n2.size() > options.n2_cap) {
                auto rng = make_rng(options.seed, "observations", tweet_events[k]);
                const auto pos = sample_positions(n2.size(), options.n2_cap, rng);
                std::vector<UserIndex> kept;
                kept.reserve(pos.size());
                for (auto p : pos) {
                    kept.push_back(n2[p]);
                }
                n2 = std::move(kept);
            }
            std::vector<UserIndex> joined;
            for (auto e : events_between(g, g.series_events(i, SeriesKind::IncomingFollows), tw.ts + 1,
                                         tw.ts + horizon + 1)) {
                joined.push_back(evs[e].actor);
            }
            std::sort(joined.begin(), joined.end());
            const DenseQuery center(vectors.of(i), vectors.vocab.size());
            slot.obs.reserve(n2.size());
            for (auto j : n2) {
                const auto y = y_score(center.cosine(vectors.of(j)), stats);
                if (!y) {
                    ++slot.undefined;
                    continue;
                }
                const bool label = std::binary_search(joined.begin(), joined.end(), j);
                slot.obs.push_back({i, j, *y, static_cast<std::uint8_t>(label)});
            }
        },
        threads);
    std::vector<FollowObservation> out;
    ObservationReport rep;
    for (auto& s : slots) {
        if (!s.used) {
            ++rep.tweets_skipped;
            continue;
        }
        ++rep.tweets_used;
        rep.undefined_y += s.undefined;
        for (const auto& o : s.obs) {
            rep.positives += o.label;
        }
        out.insert(out.end(), s.obs.begin(), s.obs.end());
    }
    if (report) {
        *report = rep;
    }
    return out;
}

double log_likelihood(double C, double alpha, std::span<const FollowObservation> obs) {
    return derivatives(std::log(C), alpha, obs).ll;
}

ModelParams fit(std::span<const FollowObservation> obs, const FitOptions& options) {
    if (obs.size() < 2) {
        throw UndefinedError("fit needs at least two observations");
    }
    std::size_t pos = 0;
    double min_pos = std::numeric_limits<double>::infinity(), max_pos = -min_pos;
    double min_neg = min_pos, max_neg = -min_pos;
    for (const auto& o : obs) {
        if (o.label) {
            ++pos;
            min_pos = std::min(min_pos, o.y);
            max_pos = std::max(max_pos, o.y);
        } else {
            min_neg = std::min(min_neg, o.y);
            max_neg = std::max(max_neg, o.y);
        }
    }
    const auto n = obs.size();
    if (pos == 0 || pos == n) {
        throw UndefinedError(std::string("fit: every observation has label ") + (pos == 0 ? "0" : "1"));
    }
    if (min_pos > max_neg || max_pos < min_neg) {
        throw UndefinedError("fit: complete separation, Y splits the labels perfectly");
    }

    // start from a weighted least-squares line through the binned log positive rates
    constexpr int kBins = 20;
    const double lo = std::min(min_pos, min_neg);
    const double hi = std::max(max_pos, max_neg);
    const double width = (hi - lo) / kBins;
    double a = std::log(static_cast<double>(pos) / static_cast<double>(n));
    double alpha = 0.0;
    if (width > 0.0) {
        std::vector<double> cnt(kBins, 0.0), hits(kBins, 0.0), ysum(kBins, 0.0);
        for (const auto& o : obs) {
            const int b = std::clamp(static_cast<int>((o.y - lo) / width), 0, kBins - 1);
            cnt[b] += 1.0;
            hits[b] += o.label;
            ysum[b] += o.y;
        }
        double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        int used = 0;
        for (int b = 0; b < kBins; ++b) {
            if (hits[b] == 0.0) {
                continue;
            }
            const double x = ysum[b] / cnt[b];
            const double y = std::log(hits[b] / cnt[b]);
            const double w = hits[b];
            sw += w;
            sx += w * x;
            sy += w * y;
            sxx += w * x * x;
            sxy += w * x * y;
            ++used;
        }
        const double det = sw * sxx - sx * sx;
        if (used >= 2 && det > 0.0) {
            alpha = (sw * sxy - sx * sy) / det;
            a = (sy - alpha * sx) / sw;
        }
    }

    const double nd = static_cast<double>(n);
    auto d = derivatives(a, alpha, obs);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (std::hypot(d.g0, d.g1) / nd < options.gradient_tol) {
            break;
        }
        double s0, s1;
        const double det = d.h00 * d.h11 - d.h01 * d.h01;
        if (d.h00 < 0.0 && det > 0.0) {
            s0 = -(d.h11 * d.g0 - d.h01 * d.g1) / det;
            s1 = -(-d.h01 * d.g0 + d.h00 * d.g1) / det;
        } else {
            // Hessian not negative definite: fall back to a scaled gradient step
            const double gn = std::hypot(d.g0, d.g1);
            s0 = d.g0 / gn;
            s1 = d.g1 / gn;
        }
        double t = 1.0;
        Derivatives next;
        bool improved = false;
        for (int half = 0; half < 60; ++half) {
            next = derivatives(a + t * s0, alpha + t * s1, obs);
            if (next.ll >= d.ll) {
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) {
            break;
        }
        a += t * s0;
        alpha += t * s1;
        d = next;
    }
    if (!std::isfinite(a) || !std::isfinite(alpha)) {
        throw UndefinedError("fit diverged");
    }
    ModelParams p;
    p.C = std::exp(a);
    p.alpha = alpha;
    p.fit_window_hours = options.window_hours;
    p.n_obs = n;
    return p;
}

double p_hat(const ModelParams& params, double y) {
    return std::min(params.C * std::exp(params.alpha * y), 1.0);
}

std::vector<UserIndex> retweeters(const TemporalGraph& g, UserIndex i, Timestamp t0, Timestamp t1) {
    std::vector<UserIndex> out;
    for (auto e : events_between(g, g.series_events(i, SeriesKind::RetweetsReceived), t0, t1)) {
        out.push_back(g.events()[e].actor);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ExposureSet exposure_set(const TemporalGraph& g, UserIndex i, Timestamp t0, Timestamp t1) {
    ExposureSet s;
    s.i = i;
    s.t0 = t0;
    s.t1 = t1;
    const auto rts = retweeters(g, i, t0, t1);
    if (rts.empty()) {
        return s;
    }
    std::vector<std::uint8_t> seen(g.user_count(), 0);
    for (auto r : rts) {
        for (auto j : g.followers_at(r, t1 - 1)) {
            seen[j] = 1;
        }
    }
    for (auto j : g.two_hop_at(i, t0)) {
        if (seen[j]) {
            s.users.push_back(j);
        }
    }
    return s;
}

BurstScore burst_score(const ModelParams& params, const TemporalGraph& g, const UserVectors& vectors, UserIndex i,
                       const ExposureSet& exposure, const ScoreOptions& options) {
    BurstScore out;
    auto n2 = g.two_hop_at(i, exposure.t0);
    out.n2 = n2.size();
    out.exposed = exposure.users.size();
    const auto stats = similarity_stats(g, i, exposure.t0, vectors);
    if (n2.empty() || !stats.usable()) {
        return out;
    }
    const DenseQuery center(vectors.of(i), vectors.vocab.size());
    auto p_of = [&](UserIndex j) {
        const auto y = y_score(center.cosine(vectors.of(j)), stats);
        return y ? p_hat(params, *y) : 0.0;  // S == 0 is the Y -> -inf limit
    };
    double scale = 1.0;
    if (n2.size() > options.n2_cap) {
        auto rng = make_rng(options.seed, "score-n2", (static_cast<std::uint64_t>(i) << 32) ^
                                                          static_cast<std::uint64_t>(exposure.t0));
        const auto pos = sample_positions(n2.size(), options.n2_cap, rng);
        std::vector<UserIndex> kept;
        kept.reserve(pos.size());
        for (auto p : pos) {
            kept.push_back(n2[p]);
        }
        scale = static_cast<double>(n2.size()) / static_cast<double>(kept.size());
        n2 = std::move(kept);
        out.sampled = true;
    }
    double den = 0.0;
    for (auto j : n2) {
        den += p_of(j);
    }
    den *= scale;
    double num = 0.0;
    for (auto j : exposure.users) {
        num += p_of(j);
    }
    if (!(den > 0.0)) {
        return out;
    }
    out.score = std::clamp(num / den, 0.0, 1.0);
    return out;
}

std::optional<double> probability_ratio(std::span<const double> p, std::span<const std::uint8_t> exposed) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        den += p[k];
        if (exposed[k]) {
            num += p[k];
        }
    }
    if (!(den > 0.0)) {
        return std::nullopt;
    }
    return num / den;
}

}  // namespace burstnet
