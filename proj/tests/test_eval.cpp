#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "burstnet/eval.hpp"
#include "burstnet/synthgen.hpp"
#include "support.hpp"

using namespace burstnet;

namespace {

using Labels = std::vector<std::uint8_t>;

SynthOutput small_world(std::uint64_t seed) {
    auto cfg = SynthConfig::null_model(500, 8, seed);
    cfg.n_retweet_bursts = 60;
    cfg.plant_min_indegree = 10;
    cfg.min_burst_spacing_hours = 24;
    cfg.couple_rate = 0.4;
    return generate(cfg);
}

}  // namespace

TEST_CASE("average precision by hand") {
    CHECK(average_precision(Labels{1, 1, 0, 0}) == 1.0);
    CHECK(average_precision(Labels{0, 1}) == 0.5);
    CHECK(average_precision(Labels{1, 0, 1}) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    CHECK_THROWS_AS(average_precision(Labels{0, 0}), UndefinedError);
}

TEST_CASE("average precision matches the staircase integral") {
    auto rng = make_rng(2, "test-ap");
    for (int trial = 0; trial < 500; ++trial) {
        Labels l(1 + uniform_below(rng, 200));
        const double rate = uniform01(rng);
        for (auto& x : l) {
            x = bernoulli(rng, rate);
        }
        l[uniform_below(rng, l.size())] = 1;
        CHECK(std::abs(average_precision(l) - bt::ap_oracle(l)) < 1e-12);
    }
}

TEST_CASE("shuffled rankings average out to the prevalence") {
    auto rng = make_rng(2, "test-ap-random");
    Labels base(2000, 0);
    for (std::size_t k = 0; k < 420; ++k) {
        base[k] = 1;
    }
    double mean = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        shuffle(base.begin(), base.end(), rng);
        mean += average_precision(base) / 50.0;
    }
    CHECK(std::abs(mean - 0.21) < 0.01);
}

TEST_CASE("precision-recall curve ends at the prevalence") {
    const Labels l{1, 0, 0, 1, 0};
    const auto c = pr_curve(l);
    REQUIRE(c.size() == 5);
    CHECK(c[0].precision == 1.0);
    CHECK(c[0].recall == 0.5);
    CHECK(c.back().recall == 1.0);
    CHECK(c.back().precision == doctest::Approx(0.4));
}

TEST_CASE("ranking with ties and undefined scores") {
    std::vector<std::optional<double>> scores{0.5, std::nullopt, 0.9, 0.5, 0.5, 0.1};
    const Labels labels{0, 1, 1, 1, 0, 0};
    const auto r = rank_labels(scores, labels, 7, "x");
    REQUIRE(r.size() == labels.size());
    CHECK(r.front() == 1);  // the 0.9
    CHECK(r.back() == 1);   // undefined goes last
    CHECK(r[4] == 0);       // the 0.1
    CHECK(rank_labels(scores, labels, 7, "x") == r);
    CHECK(std::count(r.begin(), r.end(), 1) == 3);

    // all-tied scores give a seed-dependent permutation
    std::vector<std::optional<double>> flat(400, 1.0);
    Labels many(400, 0);
    for (std::size_t k = 0; k < 100; ++k) {
        many[k] = 1;
    }
    const auto a = rank_labels(flat, many, 1, "tie");
    const auto b = rank_labels(flat, many, 2, "tie");
    CHECK(a != b);
    CHECK(a != many);
    CHECK(std::count(a.begin(), a.end(), 1) == 100);

    const Labels shorter{1};
    CHECK_THROWS_AS(rank_labels(scores, shorter, 7, "x"), std::invalid_argument);
}

TEST_CASE("splits are disjoint, complete and seeded") {
    std::vector<LabeledBurst> bursts(101);
    for (std::uint32_t k = 0; k < bursts.size(); ++k) {
        bursts[k].id = k;
    }
    const auto s = split_bursts(bursts, 0.5, 42);
    CHECK(s.train.size() == 50);
    CHECK(s.test.size() == 51);
    std::set<std::uint32_t> ids;
    for (const auto& b : s.train) {
        ids.insert(b.id);
    }
    for (const auto& b : s.test) {
        CHECK(ids.insert(b.id).second);
    }
    CHECK(ids.size() == bursts.size());
    const auto again = split_bursts(bursts, 0.5, 42);
    for (std::size_t k = 0; k < s.test.size(); ++k) {
        CHECK(again.test[k].id == s.test[k].id);
    }
    Split broken = s;
    broken.test.push_back(s.train.front());
    CHECK_THROWS_AS(assert_disjoint(broken), std::logic_error);
}

TEST_CASE("pearson by hand") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> up{2, 4, 6, 8}, down{8, 6, 4, 2}, flat{1, 1, 1, 1};
    CHECK(*pearson(x, up) == doctest::Approx(1.0));
    CHECK(*pearson(x, down) == doctest::Approx(-1.0));
    CHECK_FALSE(pearson(x, flat).has_value());
    CHECK(*pearson(x, std::vector<double>{1, 3, 2, 4}) == doctest::Approx(0.8));
}

TEST_CASE("descriptive stats on a hand log") {
    bt::GraphBuilder b;
    b.edge("a", "k").edge("c", "x");
    b.retweet(10, "k", "r", "t1");
    b.follow(20, "a", "r");                        // a saw k's retweet: exposed
    b.follow(30, "c", "r");                        // c follows nobody who retweeted
    b.follow(40, "a", "x").unfollow(50, "a", "x");
    b.follow(100 * 3600, "k", "a");
    const auto g = b.build(0, 101 * 3600);
    const auto s = descriptive_stats(g, 72);
    CHECK(s.kind_counts[static_cast<std::size_t>(EventKind::Follow)] == 4);
    CHECK(s.deletion_creation == doctest::Approx(0.25));
    CHECK(s.exposed_follows == 1);
    CHECK(s.exposed_follows_query == 1);
    CHECK(s.exposure_fraction == doctest::Approx(0.25));
}

TEST_CASE("streaming and path-query exposure counts agree on random logs") {
    auto rng = make_rng(2, "test-exposed");
    for (int trial = 0; trial < 100; ++trial) {
        bt::RandomGraphSpec spec;
        spec.users = 6 + uniform_below(rng, 15);
        spec.events = 100;
        spec.retweet_share = 0.4;
        const auto g = bt::random_graph(rng, spec);
        const auto s = descriptive_stats(g, 2);
        CHECK(s.exposed_follows == s.exposed_follows_query);
    }
}

TEST_CASE("experiment pipeline on a small generated world") {
    const auto out = small_world(12);
    const auto g = TemporalGraph::build(out.users, out.snapshot, out.events);
    const auto vectors = build_user_vectors(g);
    const auto catalog = detect_all(g);
    const auto labeled = label_retweet_bursts(g, catalog);
    REQUIRE(labeled.size() == catalog.of_kind(SeriesKind::RetweetsReceived).size());
    std::size_t positives = 0;
    for (const auto& lb : labeled) {
        positives += lb.label;
        CHECK(lb.t0 < lb.t1);
        if (lb.tweet) {
            CHECK(g.events()[*lb.tweet].kind == EventKind::Tweet);
            CHECK(g.events()[*lb.tweet].actor == lb.trigger.user);
        }
    }
    std::size_t rf = 0;
    for (const auto& cb : catalog.cobursts) {
        rf += cb.type == CoBurstType::RetweetFollow;
    }
    CHECK(positives == rf);

    ExperimentOptions opt;
    opt.methods.push_back(Method::FollowBursts);
    const auto p = run_pipeline(g, vectors, catalog, opt);
    CHECK(p.split.train.size() + p.split.test.size() == labeled.size());
    REQUIRE(p.results.size() == opt.methods.size());
    for (const auto& r : p.results) {
        CHECK(r.ranked.size() == p.split.test.size());
        if (r.ap) {
            CHECK(*r.ap > 0.0);
            CHECK(*r.ap <= 1.0);
        }
    }
    opt.threads = 3;
    const auto q = run_pipeline(g, vectors, catalog, opt);
    CHECK(q.params.C == p.params.C);
    CHECK(q.params.alpha == p.params.alpha);
    for (std::size_t m = 0; m < p.results.size(); ++m) {
        CHECK(q.results[m].ranked == p.results[m].ranked);
    }

    const auto tb = token_bursts(g, labeled);
    std::size_t with_tweet = 0;
    for (const auto& lb : labeled) {
        with_tweet += lb.tweet.has_value();
    }
    CHECK(tb.size() == with_tweet);

    const auto mag = magnitude_correlation(g, catalog);
    std::vector<double> xs, ys;
    for (const auto& pr : mag.pairs) {
        xs.push_back(pr.retweet_sigma);
        ys.push_back(pr.follow_sigma);
    }
    CHECK(mag.pearson == pearson(xs, ys));
}
