#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace burstnet;

namespace {

std::vector<double> noise_series(Rng& rng, std::size_t n, double mean = 20.0, double sd = 3.0) {
    std::vector<double> x(n);
    for (auto& v : x) {
        v = mean + sd * standard_normal(rng);
    }
    return x;
}

// Per hour-of-day random walk plus unit noise. With walk variance 0.6487 per day the
// best same-hour interpolator of this form has decay 0.5.
std::vector<double> local_level_series(Rng& rng, int days) {
    std::vector<double> x(static_cast<std::size_t>(days) * 24);
    for (int h = 0; h < 24; ++h) {
        double level = 0.0;
        for (int d = 0; d < days; ++d) {
            level += std::sqrt(0.6487) * standard_normal(rng);
            x[static_cast<std::size_t>(d * 24 + h)] = level + standard_normal(rng);
        }
    }
    return x;
}

Burst burst_at(SeriesKind kind, int hour, UserIndex u = 0) {
    Burst b;
    b.user = u;
    b.kind = kind;
    b.hour = hour;
    b.end_hour = hour;
    b.magnitude_sigma = 5.0;
    b.raw_count = 10.0;
    return b;
}

}  // namespace

TEST_CASE("constant series") {
    const std::vector<double> x(200, 7.0);
    CHECK(fit_decay(x) == 0.0);
    const auto d = deseasonalize(x, 1.3);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(d.defined[i]);
        CHECK(d.f[i] == 0.0);
    }
    CHECK(detect_bursts(d).empty());
}

TEST_CASE("equal neighbors cancel the weights") {
    std::vector<double> x(200, 10.0);
    x[60] = 50.0;
    for (double lambda : {0.0, 0.7, 4.0}) {
        CHECK(deseasonalize(x, lambda).f[60] == doctest::Approx(40.0).epsilon(1e-15));
    }
}

TEST_CASE("residuals match direct summation") {
    auto rng = make_rng(3, "test-deseason");
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 30 + uniform_below(rng, 300);
        const auto x = noise_series(rng, n, 5.0, 4.0);
        const double lambda = 5.0 * uniform01(rng);
        const auto d = deseasonalize(x, lambda);
        const auto o = bt::deseasonalize_oracle(x, lambda);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(static_cast<bool>(d.defined[i]) == o.defined[i]);
            CHECK(std::abs(d.f[i] - o.f[i]) < 1e-9);
        }
        CHECK(std::abs(d.sigma_f - o.sigma) < 1e-9);
    }
}

TEST_CASE("hours without a same-hour neighbor are masked") {
    const std::vector<double> x(20, 1.0);  // shorter than a day
    const auto d = deseasonalize(x, 0.5);
    for (auto flag : d.defined) {
        CHECK_FALSE(flag);
    }
    CHECK(d.sigma_f == 0.0);
}

TEST_CASE("any 24-periodic signal is removed exactly") {
    auto rng = make_rng(3, "test-periodic");
    std::array<double, 24> g{};
    for (auto& v : g) {
        v = 100.0 * uniform01(rng);
    }
    std::vector<double> x(240);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g[i % 24];
    }
    const auto d = deseasonalize(x, fit_decay(x));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(d.f[i]) < 1e-9);
    }
}

TEST_CASE("shift invariance and scale equivariance") {
    auto rng = make_rng(3, "test-affine");
    auto x = noise_series(rng, 240, 4.0, 2.0);
    x[100] += 30.0;
    x[170] += 25.0;
    const double lambda = 0.8;
    const auto base = deseasonalize(x, lambda);

    auto shifted = x;
    for (auto& v : shifted) {
        v += 12.5;
    }
    const auto ds = deseasonalize(shifted, lambda);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(ds.f[i] == doctest::Approx(base.f[i]).epsilon(1e-9));
    }

    auto scaled = x;
    for (auto& v : scaled) {
        v *= 3.0;
    }
    const auto dc = deseasonalize(scaled, lambda);
    CHECK(dc.sigma_f == doctest::Approx(3.0 * base.sigma_f));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(dc.f[i] == doctest::Approx(3.0 * base.f[i]));
    }
    DetectOptions no_floor;
    no_floor.min_count = 0.0;
    CHECK(detect_bursts(dc, no_floor) == [&] {
        auto b = detect_bursts(base, no_floor);
        for (auto& e : b) {
            e.magnitude_sigma = dc.f[static_cast<std::size_t>(e.hour)] / dc.sigma_f;
            e.raw_count *= 3.0;
        }
        return b;
    }());
}

TEST_CASE("fit_decay recovers a planted decay") {
    auto rng = make_rng(3, "test-lambda");
    SUBCASE("mean over 100 month-long trials") {
        double sum = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            sum += fit_decay(local_level_series(rng, 30));
        }
        CHECK(std::abs(sum / 100.0 - 0.5) <= 0.15);
    }
    SUBCASE("single long series") {
        int within = 0;
        for (int trial = 0; trial < 100; ++trial) {
            within += std::abs(fit_decay(local_level_series(rng, 400)) - 0.5) <= 0.15;
        }
        CHECK(within >= 90);
    }
}

TEST_CASE("fit_decay on white noise prefers equal weights and is stable") {
    auto rng = make_rng(3, "test-iid");
    double sum = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = noise_series(rng, 720);
        const double lambda = fit_decay(x);
        CHECK(lambda == fit_decay(x));
        // the golden-section minimum is the minimum of a fine sweep
        double best = decay_objective(x, 0.0);
        for (double l = 0.0; l <= kMaxDecay; l += 0.01) {
            best = std::min(best, decay_objective(x, l));
        }
        CHECK(decay_objective(x, lambda) <= best * (1.0 + 1e-6));
        sum += lambda;
    }
    CHECK(sum / 50.0 < 0.3);
}

TEST_CASE("fit_decay needs three days") {
    CHECK_THROWS_AS(fit_decay(std::vector<double>(71, 1.0)), std::invalid_argument);
    CHECK_NOTHROW(fit_decay(std::vector<double>(72, 1.0)));
}

TEST_CASE("planted spikes on a diurnal background") {
    auto rng = make_rng(3, "test-spikes");
    std::vector<double> x(720);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = 20.0 + 10.0 * std::sin(6.283185307179586 * static_cast<double>(i % 24) / 24.0) + 2.0 * standard_normal(rng);
    }
    const auto clean = deseasonalize(x, fit_decay(x));
    const std::vector<int> planted{50, 200, 333, 480, 650};
    for (int h : planted) {
        x[static_cast<std::size_t>(h)] += 8.0 * clean.sigma_f * 1.25;  // 8 sigma of the series with spikes included
    }
    const auto d = deseasonalize(x, fit_decay(x));
    const auto bursts = detect_bursts(d);
    std::set<int> flagged;
    for (const auto& b : bursts) {
        for (int h = b.hour; h <= b.end_hour; ++h) {
            flagged.insert(h);
        }
        CHECK(b.magnitude_sigma > 2.0);
    }
    for (int h : planted) {
        CHECK(flagged.count(h) == 1);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(d.f[i]) < d.sigma_f) {
            CHECK(flagged.count(static_cast<int>(i)) == 0);
        }
    }
}

TEST_CASE("threshold monotonicity and min_count floor") {
    auto rng = make_rng(3, "test-monotone");
    for (int trial = 0; trial < 30; ++trial) {
        auto x = noise_series(rng, 300, 8.0, 3.0);
        for (int k = 0; k < 6; ++k) {
            x[uniform_below(rng, x.size())] += 15.0 * uniform01(rng);
        }
        const auto d = deseasonalize(x, fit_decay(x));
        auto hours = [&](double threshold, double min_count) {
            std::set<int> out;
            DetectOptions o;
            o.threshold_sigma = threshold;
            o.min_count = min_count;
            for (const auto& b : detect_bursts(d, o)) {
                for (int h = b.hour; h <= b.end_hour; ++h) {
                    out.insert(h);
                }
            }
            return out;
        };
        const auto at2 = hours(2.0, 5.0), at3 = hours(3.0, 5.0);
        CHECK(std::includes(at2.begin(), at2.end(), at3.begin(), at3.end()));
        CHECK(hours(2.0, 1e9).empty());
    }
}

TEST_CASE("consecutive flagged hours merge") {
    std::vector<double> x(240, 10.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += (i % 7 == 0) ? 1.0 : 0.0;
    }
    x[100] = 60.0;
    x[101] = 70.0;
    const auto bursts = detect_bursts(deseasonalize(x, 0.0));
    REQUIRE(bursts.size() == 1);
    CHECK(bursts[0].hour == 100);
    CHECK(bursts[0].end_hour == 101);
    CHECK(bursts[0].raw_count == 130.0);
}

TEST_CASE("co-burst pairing") {
    using K = SeriesKind;
    auto idx = [](K k) { return static_cast<std::size_t>(k); };
    SUBCASE("lag one") {
        BurstsByKind b;
        b[idx(K::RetweetsReceived)] = {burst_at(K::RetweetsReceived, 30)};
        b[idx(K::IncomingFollows)] = {burst_at(K::IncomingFollows, 31)};
        const auto cb = pair_cobursts(b);
        REQUIRE(cb.size() == 1);
        CHECK(cb[0].type == CoBurstType::RetweetFollow);
        CHECK(cb[0].lag_hours == 1);
    }
    SUBCASE("lag three is no pair") {
        BurstsByKind b;
        b[idx(K::RetweetsReceived)] = {burst_at(K::RetweetsReceived, 30)};
        b[idx(K::IncomingFollows)] = {burst_at(K::IncomingFollows, 33)};
        CHECK(pair_cobursts(b).empty());
    }
    SUBCASE("nearest trigger wins") {
        BurstsByKind b;
        b[idx(K::RetweetsReceived)] = {burst_at(K::RetweetsReceived, 39), burst_at(K::RetweetsReceived, 40)};
        b[idx(K::IncomingFollows)] = {burst_at(K::IncomingFollows, 40)};
        const auto cb = pair_cobursts(b);
        REQUIRE(cb.size() == 1);
        CHECK(cb[0].trigger.hour == 40);
        CHECK(cb[0].lag_hours == 0);
    }
    SUBCASE("tweet-unfollow") {
        BurstsByKind b;
        b[idx(K::TweetsAuthored)] = {burst_at(K::TweetsAuthored, 12)};
        b[idx(K::IncomingUnfollows)] = {burst_at(K::IncomingUnfollows, 12)};
        b[idx(K::IncomingFollows)] = {burst_at(K::IncomingFollows, 12)};  // no retweet trigger
        const auto cb = pair_cobursts(b);
        REQUIRE(cb.size() == 1);
        CHECK(cb[0].type == CoBurstType::TweetUnfollow);
    }
}

TEST_CASE("detect_all finds a retweet-follow co-burst in a small log") {
    bt::GraphBuilder gb;
    const Timestamp day = 24 * 3600;
    // steady background: one retweet and one follow every hour for five days
    int n = 0;
    for (Timestamp h = 0; h < 5 * 24; ++h) {
        gb.retweet(h * 3600 + 10, "r" + std::to_string(h % 5), "star");
        gb.follow(h * 3600 + 20, "f" + std::to_string(n++), "star");
    }
    // burst at hour 60: twelve retweets, then a follow flood in hour 61
    const Timestamp h60 = 60 * 3600;
    for (int k = 0; k < 12; ++k) {
        gb.retweet(h60 + 100 + k, "x" + std::to_string(k), "star");
    }
    for (int k = 0; k < 12; ++k) {
        gb.follow(h60 + 3600 + 100 + k, "y" + std::to_string(k), "star");
    }
    std::stable_sort(gb.events_.begin(), gb.events_.end(),
                     [](const Event& a, const Event& b) { return a.ts < b.ts; });
    for (std::size_t k = 0; k < gb.events_.size(); ++k) {
        gb.events_[k].seq = static_cast<std::int64_t>(k);
    }
    const auto g = gb.build(0, 5 * day);
    for (int threads : {1, 3}) {
        const auto cat = detect_all(g, {}, threads);
        REQUIRE(cat.cobursts.size() == 1);
        CHECK(cat.cobursts[0].trigger.hour == 60);
        CHECK(cat.cobursts[0].response.hour == 61);
        CHECK(cat.of_kind(SeriesKind::RetweetsReceived).size() == 1);
    }
}
