#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "burstnet/model.hpp"
#include "burstnet/synthgen.hpp"
#include "support.hpp"

using namespace burstnet;

namespace {

std::vector<FollowObservation> simulate(std::size_t n, double C, double alpha, std::uint64_t seed) {
    auto rng = make_rng(seed, "test-law");
    std::vector<FollowObservation> obs(n);
    for (auto& o : obs) {
        o.y = standard_normal(rng);
        o.label = bernoulli(rng, std::min(C * std::exp(alpha * o.y), 1.0));
    }
    return obs;
}

// Small generated network with text and a handful of retweet bursts.
SynthOutput small_world(std::uint64_t seed) {
    auto cfg = SynthConfig::null_model(400, 6, seed);
    cfg.n_retweet_bursts = 25;
    cfg.plant_min_indegree = 10;
    cfg.min_burst_spacing_hours = 24;
    return generate(cfg);
}

}  // namespace

TEST_CASE("p_hat clamps at one") {
    ModelParams p;
    p.C = 0.02;
    p.alpha = 1.0;
    CHECK(p_hat(p, 0.0) == doctest::Approx(0.02));
    CHECK(p_hat(p, 1.0) == doctest::Approx(0.02 * std::exp(1.0)));
    CHECK(p_hat(p, 10.0) == 1.0);
    p.alpha = 0.0;
    CHECK(p_hat(p, -5.0) == p_hat(p, 5.0));
}

TEST_CASE("fit recovers planted parameters") {
    const double C = 0.02, alpha = 1.0;
    const auto obs = simulate(200'000, C, alpha, 3);
    const auto p = fit(obs);
    // about 5400 positives: standard errors near 0.015 on alpha and ln C
    CHECK(std::abs(p.alpha - alpha) < 0.06);
    CHECK(std::abs(std::log(p.C / C)) < 0.06);
    CHECK(p.n_obs == obs.size());
}

TEST_CASE("fit lands on a stationary point that beats a grid") {
    const auto obs = simulate(20'000, 0.05, 0.6, 4);
    const auto p = fit(obs);
    const double best = log_likelihood(p.C, p.alpha, obs);
    // central differences of the likelihood itself
    const double h = 1e-4;
    const double a = std::log(p.C);
    const double ga = (log_likelihood(std::exp(a + h), p.alpha, obs) - log_likelihood(std::exp(a - h), p.alpha, obs)) / (2 * h);
    const double gb = (log_likelihood(p.C, p.alpha + h, obs) - log_likelihood(p.C, p.alpha - h, obs)) / (2 * h);
    CHECK(std::abs(ga) / double(obs.size()) < 1e-6);
    CHECK(std::abs(gb) / double(obs.size()) < 1e-6);
    for (double la = a - 1.0; la <= a + 1.0; la += 0.05) {
        for (double al = p.alpha - 1.0; al <= p.alpha + 1.0; al += 0.05) {
            CHECK(log_likelihood(std::exp(la), al, obs) <= best + 1e-9);
        }
    }
}

TEST_CASE("fit on a flat law gives alpha near zero") {
    const auto obs = simulate(50'000, 0.1, 0.0, 5);
    const auto p = fit(obs);
    CHECK(std::abs(p.alpha) < 0.06);
    CHECK(p.C == doctest::Approx(0.1).epsilon(0.06));
}

TEST_CASE("fit refuses degenerate data") {
    std::vector<FollowObservation> one{{0, 1, 0.3, 1}};
    CHECK_THROWS_AS(fit(one), UndefinedError);
    std::vector<FollowObservation> none{{0, 1, 0.3, 0}, {0, 2, 0.1, 0}, {0, 3, -0.4, 0}};
    CHECK_THROWS_AS(fit(none), UndefinedError);
    std::vector<FollowObservation> split{{0, 1, -1.0, 0}, {0, 2, -0.5, 0}, {0, 3, 0.5, 1}, {0, 4, 1.0, 1}};
    CHECK_THROWS_AS(fit(split), UndefinedError);
}

TEST_CASE("probability ratio by hand") {
    const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    const std::vector<std::uint8_t> exposed{1, 0, 1, 0};
    CHECK(*probability_ratio(p, exposed) == doctest::Approx(0.4));
    const std::vector<double> zero(4, 0.0);
    CHECK_FALSE(probability_ratio(zero, exposed).has_value());
}

TEST_CASE("exposure sets match the triple-loop oracle") {
    auto rng = make_rng(3, "test-exposure");
    for (int trial = 0; trial < 200; ++trial) {
        bt::RandomGraphSpec spec;
        spec.users = 6 + uniform_below(rng, 20);
        spec.events = 40 + uniform_below(rng, 80);
        spec.retweet_share = 0.4;
        const auto g = bt::random_graph(rng, spec);
        const auto i = static_cast<UserIndex>(uniform_below(rng, g.user_count()));
        const auto t0 = static_cast<Timestamp>(uniform_below(rng, spec.span - 60));
        const auto t1 = t0 + 1 + static_cast<Timestamp>(uniform_below(rng, spec.span - t0));
        const auto s = exposure_set(g, i, t0, t1);
        CHECK(s.users == bt::exposure_oracle(g, i, t0, t1));
        const auto rts = retweeters(g, i, t0, t1);
        CHECK(std::adjacent_find(rts.begin(), rts.end()) == rts.end());
    }
}

TEST_CASE("burst score against a direct sum") {
    const auto out = small_world(8);
    const auto g = TemporalGraph::build(out.users, out.snapshot, out.events);
    const auto vectors = build_user_vectors(g);
    ModelParams params;
    params.C = 0.02;
    params.alpha = 1.0;
    std::size_t checked = 0;
    for (const auto& plant : out.truth.bursts) {
        if (plant.kind != PlantedBurst::Kind::Retweet) {
            continue;
        }
        const auto i = *g.users().find(plant.user);
        const Timestamp t0 = g.window().hour_start(plant.hour);
        const auto exposure = exposure_set(g, i, t0, t0 + kSecondsPerHour);
        const auto score = burst_score(params, g, vectors, i, exposure);
        const auto stats = similarity_stats(g, i, t0, vectors);
        const auto n2 = g.two_hop_at(i, t0);
        double num = 0.0, den = 0.0;
        for (auto j : n2) {
            const auto y = y_score(vectors.similarity(i, j), stats);
            const double p = y ? std::min(params.C * std::exp(params.alpha * *y), 1.0) : 0.0;
            den += p;
            if (std::binary_search(exposure.users.begin(), exposure.users.end(), j)) {
                num += p;
            }
        }
        if (!stats.usable() || den == 0.0) {
            CHECK_FALSE(score.score.has_value());
            continue;
        }
        REQUIRE(score.score.has_value());
        CHECK(*score.score == doctest::Approx(num / den).epsilon(1e-9));
        CHECK(*score.score >= 0.0);
        CHECK(*score.score <= 1.0);
        CHECK(score.n2 == n2.size());

        // everyone exposed gives exactly one; nobody exposed gives zero
        ExposureSet all = exposure;
        all.users = n2;
        CHECK(*burst_score(params, g, vectors, i, all).score == doctest::Approx(1.0).epsilon(1e-12));
        ExposureSet none = exposure;
        none.users.clear();
        CHECK(*burst_score(params, g, vectors, i, none).score == 0.0);
        ++checked;
    }
    CHECK(checked >= 10);
}

TEST_CASE("scoring ignores the scale of C when nothing saturates") {
    const auto out = small_world(9);
    const auto g = TemporalGraph::build(out.users, out.snapshot, out.events);
    const auto vectors = build_user_vectors(g);
    ModelParams small, smaller;
    small.C = 1e-4;
    smaller.C = 1e-6;
    small.alpha = smaller.alpha = 0.5;
    for (const auto& plant : out.truth.bursts) {
        const auto i = *g.users().find(plant.user);
        const Timestamp t0 = g.window().hour_start(plant.hour);
        const auto e = exposure_set(g, i, t0, t0 + kSecondsPerHour);
        const auto a = burst_score(small, g, vectors, i, e).score;
        const auto b = burst_score(smaller, g, vectors, i, e).score;
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            CHECK(*a == doctest::Approx(*b).epsilon(1e-9));
        }
    }
}

TEST_CASE("observations match a direct enumeration") {
    const auto out = small_world(10);
    const auto g = TemporalGraph::build(out.users, out.snapshot, out.events);
    const auto vectors = build_user_vectors(g);
    std::vector<std::uint32_t> tweets;
    for (std::uint32_t k = 0; k < g.events().size() && tweets.size() < 60; ++k) {
        if (g.events()[k].kind == EventKind::Tweet) {
            tweets.push_back(k);
        }
    }
    ObservationOptions opt;
    opt.window_hours = 24;
    ObservationReport rep;
    const auto obs = collect_observations(g, vectors, tweets, opt, &rep);

    std::vector<FollowObservation> expect;
    std::size_t positives = 0;
    for (auto k : tweets) {
        const auto& tw = g.events()[k];
        const auto stats = similarity_stats(g, tw.actor, tw.ts, vectors);
        if (!stats.usable()) {
            continue;
        }
        for (auto j : bt::two_hop_oracle(g, tw.actor, tw.ts)) {
            const auto y = y_score(vectors.similarity(tw.actor, j), stats);
            if (!y) {
                continue;
            }
            bool followed = false;
            for (const auto& e : g.events()) {
                followed |= e.kind == EventKind::Follow && e.actor == j && e.target == tw.actor && e.ts > tw.ts &&
                            e.ts <= tw.ts + 24 * kSecondsPerHour;
            }
            expect.push_back({tw.actor, j, *y, static_cast<std::uint8_t>(followed)});
            positives += followed;
        }
    }
    REQUIRE(obs.size() == expect.size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
        CHECK(obs[k].i == expect[k].i);
        CHECK(obs[k].j == expect[k].j);
        CHECK(obs[k].label == expect[k].label);
        CHECK(obs[k].y == doctest::Approx(expect[k].y).epsilon(1e-9));
    }
    CHECK(rep.positives == positives);
    CHECK(rep.tweets_used + rep.tweets_skipped == tweets.size());

    // thread count never changes the result
    const auto again = collect_observations(g, vectors, tweets, opt, nullptr, 3);
    REQUIRE(again.size() == obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
        CHECK(again[k].y == obs[k].y);
    }

    std::vector<std::uint32_t> bad{0};
    while (g.events()[bad[0]].kind == EventKind::Tweet) {
        ++bad[0];
    }
    CHECK_THROWS_AS(collect_observations(g, vectors, bad, opt), std::invalid_argument);
}
