#include "burstnet/burst.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "burstnet/parallel.hpp"

namespace burstnet {

namespace {

constexpr int kLags[] = {-48, -24, 24, 48};

// Fills f/defined for the given decay; returns the sum of squared defined residuals.
double residuals(std::span<const double> x, double lambda, std::vector<double>* f, std::vector<std::uint8_t>* defined) {
    const auto n = static_cast<long>(x.size());
    const double w1 = std::exp(-lambda);
    const double w2 = std::exp(-2.0 * lambda);
    double sse = 0.0;
    for (long i = 0; i < n; ++i) {
        double num = 0.0;
        double den = 0.0;
        for (int lag : kLags) {
            const long j = i + lag;
            if (j < 0 || j >= n) {
                continue;
            }
            const double w = (lag == 24 || lag == -24) ? w1 : w2;
            num += w * x[static_cast<std::size_t>(j)];
            den += w;
        }
        if (den <= 0.0) {
            if (f) {
                (*f)[static_cast<std::size_t>(i)] = 0.0;
                (*defined)[static_cast<std::size_t>(i)] = 0;
            }
            continue;
        }
        const double r = x[static_cast<std::size_t>(i)] - num / den;
        sse += r * r;
        if (f) {
            (*f)[static_cast<std::size_t>(i)] = r;
            (*defined)[static_cast<std::size_t>(i)] = 1;
        }
    }
    return sse;
}

}  // namespace

std::string_view to_string(CoBurstType t) {
    return t == CoBurstType::RetweetFollow ? "retweet-follow" : "tweet-unfollow";
}

double decay_objective(std::span<const double> x, double lambda) {
    return residuals(x, lambda, nullptr, nullptr);
}

double fit_decay(std::span<const double> x) {
    if (x.size() < kMinFitHours) {
        throw std::invalid_argument("fit_decay needs at least 72 hours, got " + std::to_string(x.size()));
    }
    if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
        return 0.0;
    }
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 0.0;
    double hi = kMaxDecay;
    double a = hi - kInvPhi * (hi - lo);
    double b = lo + kInvPhi * (hi - lo);
    double fa = decay_objective(x, a);
    double fb = decay_objective(x, b);
    while (hi - lo > 1e-6) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - kInvPhi * (hi - lo);
            fa = decay_objective(x, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + kInvPhi * (hi - lo);
            fb = decay_objective(x, b);
        }
    }
    double best = 0.5 * (lo + hi);
    double f_best = decay_objective(x, best);
    const double f_hi = decay_objective(x, kMaxDecay);
    if (f_hi < f_best) {
        best = kMaxDecay;
        f_best = f_hi;
    }
    // lowest feasible decay wins on a flat objective
    const double f_zero = decay_objective(x, 0.0);
    if (f_zero <= f_best + 1e-12 * std::max(1.0, f_best)) {
        return 0.0;
    }
    return best;
}

double fit_decay(const HourlySeries& series) {
    return fit_decay(std::span<const double>(series.x));
}

DeseasonalizedSeries deseasonalize(std::span<const double> x, double lambda) {
    DeseasonalizedSeries d;
    d.x.assign(x.begin(), x.end());
    d.f.assign(x.size(), 0.0);
    d.defined.assign(x.size(), 0);
    d.lambda = lambda;
    residuals(x, lambda, &d.f, &d.defined);
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (d.defined[i]) {
            sum += d.f[i];
            ++m;
        }
    }
    if (m > 0) {
        const double mean = sum / static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (d.defined[i]) {
                ss += (d.f[i] - mean) * (d.f[i] - mean);
            }
        }
        d.sigma_f = std::sqrt(ss / static_cast<double>(m));
    }
    return d;
}

DeseasonalizedSeries deseasonalize(const HourlySeries& series, double lambda) {
    auto d = deseasonalize(std::span<const double>(series.x), lambda);
    d.user = series.user;
    d.kind = series.kind;
    return d;
}

std::vector<Burst> detect_bursts(const DeseasonalizedSeries& d, const DetectOptions& options) {
    std::vector<Burst> out;
    // a degenerate residual spread means nothing deviates; tiny epsilon absorbs rounding
    if (!(d.sigma_f > 1e-12)) {
        return out;
    }
    const double cut = options.threshold_sigma * d.sigma_f;
    const auto n = d.f.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool flagged = d.defined[i] && d.f[i] > cut && d.x[i] >= options.min_count;
        if (!flagged) {
            continue;
        }
        const double mag = d.f[i] / d.sigma_f;
        const auto hour = static_cast<int>(i);
        if (!out.empty() && out.back().end_hour == hour - 1) {
            auto& b = out.back();
            b.end_hour = hour;
            b.magnitude_sigma = std::max(b.magnitude_sigma, mag);
            b.raw_count += d.x[i];
        } else {
            out.push_back({d.user, d.kind, hour, hour, mag, d.x[i]});
        }
    }
    return out;
}

std::vector<CoBurst> pair_cobursts(const BurstsByKind& bursts_by_kind) {
    std::vector<CoBurst> out;
    auto pair_kind = [&](SeriesKind trigger_kind, SeriesKind response_kind, CoBurstType type) {
        const auto& triggers = bursts_by_kind[static_cast<std::size_t>(trigger_kind)];
        const auto& responses = bursts_by_kind[static_cast<std::size_t>(response_kind)];
        for (const auto& r : responses) {
            const Burst* best = nullptr;
            for (const auto& t : triggers) {
                const int lag = r.hour - t.hour;
                if (lag < 0 || lag > 1) {
                    continue;
                }
                if (!best || t.hour > best->hour) {
                    best = &t;
                }
            }
            if (best) {
                out.push_back({type, *best, r, r.hour - best->hour});
            }
        }
    };
    pair_kind(SeriesKind::RetweetsReceived, SeriesKind::IncomingFollows, CoBurstType::RetweetFollow);
    pair_kind(SeriesKind::TweetsAuthored, SeriesKind::IncomingUnfollows, CoBurstType::TweetUnfollow);
    std::stable_sort(out.begin(), out.end(), [](const CoBurst& a, const CoBurst& b) {
        return a.response.hour < b.response.hour;
    });
    return out;
}

std::vector<Burst> BurstCatalog::all() const {
    std::vector<Burst> out;
    for (const auto& per : by_user) {
        for (const auto& list : per) {
            out.insert(out.end(), list.begin(), list.end());
        }
    }
    return out;
}

std::vector<Burst> BurstCatalog::of_kind(SeriesKind kind) const {
    std::vector<Burst> out;
    for (const auto& per : by_user) {
        const auto& list = per[static_cast<std::size_t>(kind)];
        out.insert(out.end(), list.begin(), list.end());
    }
    return out;
}

BurstCatalog detect_all(const TemporalGraph& g, const DetectOptions& options, int threads) {
    BurstCatalog cat;
    const auto n = g.user_count();
    cat.by_user.assign(n, {});
    std::vector<std::vector<CoBurst>> paired(n);
    const auto hours = static_cast<std::size_t>(g.window().hours());
    parallel_for(
        n,
        [&](std::size_t u) {
            auto& slot = cat.by_user[u];
            for (auto kind : kAllSeriesKinds) {
                // a series that never reaches min_count cannot burst
                const auto evs = g.series_events(static_cast<UserIndex>(u), kind);
                if (static_cast<double>(evs.size()) < options.min_count) {
                    continue;
                }
                const auto series = g.hourly_series(static_cast<UserIndex>(u), kind);
                if (*std::max_element(series.x.begin(), series.x.end()) < options.min_count) {
                    continue;
                }
                const double lambda = hours >= kMinFitHours ? fit_decay(series) : 0.0;
                slot[static_cast<std::size_t>(kind)] = detect_bursts(deseasonalize(series, lambda), options);
            }
            paired[u] = pair_cobursts(slot);
        },
        threads);
    for (auto& p : paired) {
        cat.cobursts.insert(cat.cobursts.end(), p.begin(), p.end());
    }
    return cat;
}

}  // namespace burstnet
