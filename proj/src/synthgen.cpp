#include "burstnet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "burstnet/random.hpp"

namespace burstnet {

using nlohmann::json;

namespace {

constexpr double kLawBinWidth = 0.25;
constexpr double kLawLo = -5.0;
constexpr double kLawHi = 5.0;

std::uint64_t pair_key(UserIndex a, UserIndex b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::string user_name(std::size_t u) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "u%05zu", u);
    return buf;
}

// Live follower graph with O(1) edge insert/delete in both directions.
class Adjacency {
public:
    explicit Adjacency(std::size_t n) : in_(n), out_(n) {}

    [[nodiscard]] bool has(UserIndex a, UserIndex b) const { return pos_.count(pair_key(a, b)) != 0; }
    [[nodiscard]] const std::vector<UserIndex>& followers(UserIndex u) const { return in_[u]; }
    [[nodiscard]] const std::vector<UserIndex>& followees(UserIndex u) const { return out_[u]; }

    void add(UserIndex a, UserIndex b) {
        pos_[pair_key(a, b)] = {static_cast<std::uint32_t>(in_[b].size()), static_cast<std::uint32_t>(out_[a].size())};
        in_[b].push_back(a);
        out_[a].push_back(b);
    }

    void remove(UserIndex a, UserIndex b) {
        auto it = pos_.find(pair_key(a, b));
        const auto [pi, po] = it->second;
        pos_.erase(it);
        const UserIndex last_in = in_[b].back();
        in_[b][pi] = last_in;
        in_[b].pop_back();
        if (last_in != a) {
            pos_[pair_key(last_in, b)].first = pi;
        }
        const UserIndex last_out = out_[a].back();
        out_[a][po] = last_out;
        out_[a].pop_back();
        if (last_out != b) {
            pos_[pair_key(a, last_out)].second = po;
        }
    }

private:
    std::vector<std::vector<UserIndex>> in_;
    std::vector<std::vector<UserIndex>> out_;
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> pos_;
};

class WeightedSampler {
public:
    WeightedSampler() = default;
    explicit WeightedSampler(std::span<const double> w) : cum_(w.size()) {
        double total = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            total += w[k];
            cum_[k] = total;
        }
    }
    [[nodiscard]] std::size_t draw(Rng& rng) const {
        const double x = uniform01(rng) * cum_.back();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), x);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
    }
    [[nodiscard]] bool empty() const { return cum_.empty() || cum_.back() <= 0.0; }

private:
    std::vector<double> cum_;
};

std::vector<std::string> make_words(std::size_t count, Rng& rng, std::unordered_set<std::string>& taken) {
    static const char* kSyllables[] = {"ka", "lo", "mi", "ra", "te", "su", "no", "vi", "de", "ba",
                                       "ri", "zo", "pe", "gu", "la", "fi", "to", "me", "sa", "ko",
                                       "ne", "tu", "da", "po", "li", "ge", "mo", "si", "ha", "ve"};
    constexpr std::size_t kN = sizeof kSyllables / sizeof kSyllables[0];
    std::vector<std::string> out;
    while (out.size() < count) {
        const auto len = 2 + uniform_below(rng, 2);
        std::string w;
        for (std::uint64_t s = 0; s < len; ++s) {
            w += kSyllables[uniform_below(rng, kN)];
        }
        if (taken.insert(w).second) {
            out.push_back(std::move(w));
        }
    }
    return out;
}

const char* kCommonWords[] = {"the",  "and",   "for",   "with",  "this",  "that",  "just", "from",
                              "have", "what",  "your",  "about", "today", "will",  "more", "like",
                              "time", "all",   "out",   "now",   "get",   "good",  "day",  "know",
                              "see",  "love",  "going", "need",  "great", "right", "back", "people",
                              "one",  "think", "make",  "want",  "via",   "still", "last", "night"};

enum class PendingType : std::uint8_t {
    Tweet,
    PlantTweet,
    Retweet,
    BackgroundFollow,
    BackgroundUnfollow,
    ResponseFollow,
    StrangerFollow,
    FloodTweet,
    FloodUnfollow,
};

struct Pending {
    Timestamp ts = 0;
    std::uint64_t order = 0;
    PendingType type = PendingType::Tweet;
    UserIndex a = kNoUser;
    UserIndex b = kNoUser;
    std::uint32_t plant = 0;

    bool operator>(const Pending& o) const { return std::tie(ts, order) > std::tie(o.ts, o.order); }
};

struct PassStats {
    std::size_t background_follows = 0;
    std::size_t response_follows = 0;
    std::size_t stranger_follows = 0;
    std::size_t measured_exposed = 0;
    std::size_t measured_exposed_responses = 0;
    std::size_t planted_unfollows = 0;
    std::size_t unfollows = 0;
    double planted_top = 0.0;  // planted follows/unfollows received by the top quintile
};

struct Rates {
    double follow = 0.0;
    double unfollow = 0.0;
    double gamma = 1.0;
};

class Generator {
public:
    explicit Generator(const SynthConfig& c) : c_(c), n_(c.n_users), hours_(c.hours()), diurnal_(c.diurnal()) {
        build_text_model();
        build_graph();
        build_plants();
    }

    SynthOutput run() {
        Rates rates;
        rates.gamma = c_.follow_rate_gamma >= 0.0 ? c_.follow_rate_gamma : 1.0;
        const double diurnal_hours = static_cast<double>(hours_);  // profile has mean 1
        const double guess_exposure = 4.0 * static_cast<double>(plants_.size());
        const double f = c_.exposure_fraction;
        rates.follow = c_.base_follow_rate >= 0.0 ? c_.base_follow_rate
                                                  : guess_exposure * (1.0 - f) / f / diurnal_hours;
        rates.unfollow = c_.base_unfollow_rate >= 0.0
                             ? c_.base_unfollow_rate
                             : c_.deletion_ratio * (rates.follow + guess_exposure / diurnal_hours);
        const bool calibrate = c_.base_follow_rate < 0.0 || c_.base_unfollow_rate < 0.0 ||
                               (c_.calibrate_gamma && c_.follow_rate_gamma < 0.0);
        const int passes = calibrate ? std::max(1, c_.calibration_passes) : 0;
        for (int p = 0; p < passes; ++p) {
            const auto stats = simulate(rates, nullptr);
            rates = recalibrate(rates, stats);
        }
        SynthOutput out;
        simulate(rates, &out);
        out.truth.config.base_follow_rate = rates.follow;
        out.truth.config.base_unfollow_rate = rates.unfollow;
        out.truth.config.follow_rate_gamma = rates.gamma;
        return out;
    }

private:
    // ---- static structure -------------------------------------------------

    void build_text_model() {
        auto rng = make_rng(c_.seed, "topics");
        const auto T = static_cast<std::size_t>(c_.n_topics);
        std::unordered_set<std::string> taken(std::begin(kCommonWords), std::end(kCommonWords));
        taken.insert(c_.hot_token);
        topic_words_.resize(T);
        for (auto& words : topic_words_) {
            words = make_words(static_cast<std::size_t>(c_.words_per_topic), rng, taken);
            // every fifth topic word is a hashtag; a random '#' prefix per draw would split the
            // vocabulary into many rare variants
            for (std::size_t k = 4; k < words.size(); k += 5) {
                words[k] = "#" + words[k];
            }
        }
        const auto n_common = std::min<std::size_t>(static_cast<std::size_t>(c_.n_common_words),
                                                    std::size(kCommonWords));
        common_words_.assign(std::begin(kCommonWords), std::begin(kCommonWords) + static_cast<std::ptrdiff_t>(n_common));

        // topic popularity falls off slowly so every topic has a community
        std::vector<double> popularity(T);
        for (std::size_t t = 0; t < T; ++t) {
            popularity[t] = 1.0 / std::sqrt(static_cast<double>(t + 1));
        }
        const WeightedSampler pick_topic(popularity);
        dominant_.resize(n_);
        mixture_.assign(n_, std::vector<double>(T, 0.0));
        unit_mixture_.assign(n_, std::vector<double>(T, 0.0));
        topic_members_.assign(T, {});
        const double floor = 0.01;
        for (std::size_t u = 0; u < n_; ++u) {
            const auto d = pick_topic.draw(rng);
            dominant_[u] = static_cast<std::uint32_t>(d);
            topic_members_[d].push_back(static_cast<UserIndex>(u));
            auto& m = mixture_[u];
            std::fill(m.begin(), m.end(), floor);
            const double rest = std::max(0.0, 1.0 - c_.dominant_weight - floor * static_cast<double>(T));
            m[d] += c_.dominant_weight;
            for (int s = 0; s < 2 && T > 1; ++s) {
                std::size_t o;
                do {
                    o = uniform_below(rng, T);
                } while (o == d);
                m[o] += rest / 2.0;
            }
            const double sum = std::accumulate(m.begin(), m.end(), 0.0);
            double norm = 0.0;
            for (auto& v : m) {
                v /= sum;
                norm += v * v;
            }
            norm = std::sqrt(norm);
            for (std::size_t t = 0; t < T; ++t) {
                unit_mixture_[u][t] = m[t] / norm;
            }
        }
        mixture_sampler_.reserve(n_);
        for (std::size_t u = 0; u < n_; ++u) {
            mixture_sampler_.emplace_back(mixture_[u]);
        }
    }

    double true_similarity(UserIndex a, UserIndex b) const {
        const auto& x = unit_mixture_[a];
        const auto& y = unit_mixture_[b];
        double dot = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            dot += x[t] * y[t];
        }
        return dot;
    }

    double y_true(UserIndex j, UserIndex i) const {
        return (std::log(true_similarity(j, i)) - mu_[i]) / sigma_[i];
    }

    void build_graph() {
        auto rng = make_rng(c_.seed, "graph");
        const std::size_t max_deg = c_.max_indegree ? c_.max_indegree : std::max<std::size_t>(1, n_ / 10);
        indeg0_.resize(n_);
        const double shape = c_.indegree_exponent - 1.0;
        for (std::size_t u = 0; u < n_; ++u) {
            const double x = static_cast<double>(c_.min_indegree) * std::pow(1.0 - uniform01(rng), -1.0 / shape);
            indeg0_[u] = std::min<std::size_t>({static_cast<std::size_t>(x), max_deg, n_ - 1});
        }
        adjacency_ = std::make_unique<Adjacency>(n_);
        for (std::size_t u = 0; u < n_; ++u) {
            const auto target = static_cast<UserIndex>(u);
            const auto& community = topic_members_[dominant_[u]];
            std::size_t placed = 0;
            std::size_t attempts = 0;
            while (placed < indeg0_[u] && attempts < 50 * indeg0_[u] + 100) {
                ++attempts;
                UserIndex j;
                if (bernoulli(rng, c_.homophily) && community.size() > 1) {
                    j = community[uniform_below(rng, community.size())];
                } else {
                    j = static_cast<UserIndex>(uniform_below(rng, n_));
                }
                if (j == target || adjacency_->has(j, target)) {
                    continue;
                }
                adjacency_->add(j, target);
                snapshot_.push_back({j, target});
                ++placed;
            }
            indeg0_[u] = placed;
        }
        std::sort(snapshot_.begin(), snapshot_.end(), [](const Edge& a, const Edge& b) {
            return std::pair(a.follower, a.followee) < std::pair(b.follower, b.followee);
        });
        // Y_true moments over the initial followers
        mu_.assign(n_, 0.0);
        sigma_.assign(n_, 1.0);
        for (std::size_t u = 0; u < n_; ++u) {
            const auto& fs = adjacency_->followers(static_cast<UserIndex>(u));
            if (fs.size() < 2) {
                continue;
            }
            double s = 0.0;
            for (auto j : fs) {
                s += std::log(true_similarity(j, static_cast<UserIndex>(u)));
            }
            const double m = s / static_cast<double>(fs.size());
            double ss = 0.0;
            for (auto j : fs) {
                const double d = std::log(true_similarity(j, static_cast<UserIndex>(u))) - m;
                ss += d * d;
            }
            mu_[u] = m;
            const double sd = std::sqrt(ss / static_cast<double>(fs.size()));
            sigma_[u] = sd > 1e-9 ? sd : 1.0;
        }
        // top quintile by initial indegree, ties by index
        std::vector<UserIndex> order(n_);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](UserIndex a, UserIndex b) { return indeg0_[a] > indeg0_[b]; });
        top_.assign(n_, 0);
        for (std::size_t k = 0; k < (n_ + 4) / 5; ++k) {
            top_[order[k]] = 1;
        }
    }

    void build_plants() {
        auto rng = make_rng(c_.seed, "plants");
        const int lo = 48;
        const int hi = static_cast<int>(hours_) - 48;
        std::vector<std::set<int>> busy(n_);
        auto spaced = [&](std::size_t u, int h) {
            const auto& s = busy[u];
            auto it = s.lower_bound(h - c_.min_burst_spacing_hours + 1);
            return it == s.end() || *it >= h + c_.min_burst_spacing_hours;
        };
        std::vector<UserIndex> eligible;
        for (std::size_t u = 0; u < n_; ++u) {
            if (indeg0_[u] >= c_.plant_min_indegree) {
                eligible.push_back(static_cast<UserIndex>(u));
            }
        }
        auto place = [&](PlantedBurst::Kind kind) -> std::pair<UserIndex, int> {
            if (eligible.empty() || hi <= lo) {
                throw std::invalid_argument("synthgen: no user/hour can host a planted burst");
            }
            for (int attempt = 0; attempt < 10'000; ++attempt) {
                const auto u = eligible[uniform_below(rng, eligible.size())];
                const int h = lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo)));
                if (spaced(u, h)) {
                    busy[u].insert(h);
                    return {u, h};
                }
            }
            throw std::invalid_argument(std::string("synthgen: cannot place another ") +
                                        (kind == PlantedBurst::Kind::Retweet ? "retweet" : "tweet-unfollow") +
                                        " burst with the requested spacing; lower the plant count");
        };
        if (!c_.planted_bursts.empty()) {
            for (const auto& ps : c_.planted_bursts) {
                std::size_t u = n_;
                for (std::size_t k = 0; k < n_; ++k) {
                    if (user_name(k) == ps.user) {
                        u = k;
                        break;
                    }
                }
                if (u == n_) {
                    throw std::invalid_argument("synthgen: planted burst names unknown user " + ps.user);
                }
                if (ps.hour < 0 || ps.hour + 1 >= static_cast<int>(hours_)) {
                    throw std::invalid_argument("synthgen: planted burst hour outside the window");
                }
                PlantedBurst b;
                b.user = ps.user;
                b.hour = ps.hour;
                b.triggers = ps.retweets;
                b.boost = ps.boost;
                b.couples_follow = ps.couples_follow;
                plants_.push_back(b);
                plant_user_.push_back(static_cast<UserIndex>(u));
                busy[u].insert(ps.hour);
            }
        } else {
            for (std::size_t k = 0; k < c_.n_retweet_bursts; ++k) {
                const auto [u, h] = place(PlantedBurst::Kind::Retweet);
                PlantedBurst b;
                b.user = user_name(u);
                b.hour = h;
                b.hot = bernoulli(rng, c_.hot_token_rate);
                b.couples_follow = bernoulli(rng, std::min(1.0, c_.couple_rate * (b.hot ? c_.hot_token_effect : 1.0)));
                b.boost = b.couples_follow ? c_.cohort_boost : -c_.cohort_boost;
                const double mean = c_.retweets_mean * (b.couples_follow ? c_.coupled_magnitude_factor : 1.0);
                b.triggers = c_.retweets_min + static_cast<int>(poisson(rng, std::max(0.0, mean - c_.retweets_min)));
                plants_.push_back(b);
                plant_user_.push_back(u);
            }
        }
        for (std::size_t k = 0; k < c_.n_tweet_unfollow_bursts; ++k) {
            const auto [u, h] = place(PlantedBurst::Kind::TweetUnfollow);
            PlantedBurst b;
            b.kind = PlantedBurst::Kind::TweetUnfollow;
            b.user = user_name(u);
            b.hour = h;
            b.triggers = 5 + static_cast<int>(poisson(rng, std::max(0.0, c_.tweet_flood_mean - 5.0)));
            b.responses = 4 + static_cast<std::size_t>(poisson(rng, std::max(0.0, c_.unfollow_flood_mean - 4.0)));
            plants_.push_back(b);
            plant_user_.push_back(u);
        }
        for (std::size_t k = 0; k < plants_.size(); ++k) {
            plants_by_hour_[plants_[k].hour].push_back(static_cast<std::uint32_t>(k));
        }
    }

    // ---- calibration ------------------------------------------------------

    Rates recalibrate(const Rates& old, const PassStats& s) const {
        Rates r = old;
        const double H = static_cast<double>(hours_);
        const double f = c_.exposure_fraction;
        const double E = static_cast<double>(s.response_follows);
        const double S = static_cast<double>(s.stranger_follows);
        const double B = static_cast<double>(s.background_follows);
        const double Rm = static_cast<double>(s.measured_exposed_responses);
        // exposures that background follows pick up by chance scale with the background volume
        const double a = B > 0.0 ? static_cast<double>(s.measured_exposed - s.measured_exposed_responses) / B : 0.0;
        if (c_.base_follow_rate < 0.0) {
            if (!(f > a)) {
                throw std::invalid_argument("synthgen: exposure_fraction is below the chance exposure rate");
            }
            const double b_total = (Rm - f * (E + S)) / (f - a);
            if (b_total < 0.0) {
                throw std::invalid_argument(
                    "synthgen: planted follows alone exceed the exposure_fraction target; lower the plant count");
            }
            r.follow = b_total / H;
        }
        const double follows_total = r.follow * H + E + S;
        const double planted_unf = static_cast<double>(s.planted_unfollows);
        if (c_.base_unfollow_rate < 0.0) {
            const double u_bg = c_.deletion_ratio * follows_total - planted_unf;
            if (u_bg < 0.0) {
                throw std::invalid_argument("synthgen: planted unfollows exceed the deletion_ratio target");
            }
            r.unfollow = u_bg / H;
        }
        if (c_.calibrate_gamma && c_.follow_rate_gamma < 0.0) {
            const double background = (r.follow + r.unfollow) * H;
            const double all = background + E + S + planted_unf;
            const double want = background > 0.0 ? (c_.top_quintile_target * all - s.planted_top) / background : 0.0;
            double lo = -3.0, hi = 6.0;
            for (int k = 0; k < 80; ++k) {
                const double mid = 0.5 * (lo + hi);
                (top_share(mid) < want ? lo : hi) = mid;
            }
            r.gamma = 0.5 * (lo + hi);
        }
        return r;
    }

    double top_share(double gamma) const {
        double top = 0.0, all = 0.0;
        for (std::size_t u = 0; u < n_; ++u) {
            const double w = indeg0_[u] ? std::pow(static_cast<double>(indeg0_[u]), gamma) : 0.0;
            all += w;
            if (top_[u]) {
                top += w;
            }
        }
        return all > 0.0 ? top / all : 0.0;
    }

    // ---- event simulation -------------------------------------------------

    std::string make_text(UserIndex u, Rng& rng, bool hot) const {
        const auto n_tok = c_.tokens_min + static_cast<int>(uniform_below(
                                               rng, static_cast<std::uint64_t>(c_.tokens_max - c_.tokens_min + 1)));
        std::vector<std::string> toks;
        for (int k = 0; k < n_tok; ++k) {
            if (!common_words_.empty() && bernoulli(rng, 0.2)) {
                toks.push_back(common_words_[uniform_below(rng, common_words_.size())]);
                continue;
            }
            const auto t = mixture_sampler_[u].draw(rng);
            const auto& words = topic_words_[t];
            toks.push_back(words[uniform_below(rng, words.size())]);
        }
        if (hot) {
            toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, toks.size() + 1)), c_.hot_token);
        }
        if (bernoulli(rng, 0.1)) {
            static const char kAlnum[] = "abcdefghijklmnopqrstuvwxyz0123456789";
            std::string url = "http://t.co/";
            for (int k = 0; k < 8; ++k) {
                url += kAlnum[uniform_below(rng, 36)];
            }
            toks.push_back(std::move(url));
        }
        std::string out;
        for (const auto& t : toks) {
            if (!out.empty()) {
                out += ' ';
            }
            out += t;
        }
        return out;
    }

    PassStats simulate(const Rates& rates, SynthOutput* out) {
        // every pass replays the same streams so calibration only moves the rates
        Adjacency adj(n_);
        for (const auto& e : snapshot_) {
            adj.add(e.follower, e.followee);
        }
        auto rng_bg = make_rng(c_.seed, "background");
        auto rng_text = make_rng(c_.seed, "tweets");
        auto rng_plant = make_rng(c_.seed, "plant-events");
        auto rng_resp = make_rng(c_.seed, "responses");

        std::vector<double> w(n_);
        for (std::size_t u = 0; u < n_; ++u) {
            w[u] = indeg0_[u] ? std::pow(static_cast<double>(indeg0_[u]), rates.gamma) : 0.0;
        }
        const WeightedSampler followee_sampler(w);

        PassStats stats;
        std::vector<PlantedBurst> plants = plants_;
        std::vector<LawBin> law(static_cast<std::size_t>(std::lround((kLawHi - kLawLo) / kLawBinWidth)));
        for (std::size_t k = 0; k < law.size(); ++k) {
            law[k].lo = kLawLo + kLawBinWidth * static_cast<double>(k);
            law[k].hi = law[k].lo + kLawBinWidth;
        }
        std::unordered_set<std::uint64_t> exposed_pairs;
        std::unordered_map<std::uint64_t, Timestamp> last_exposure;
        const Timestamp horizon = 72 * kSecondsPerHour;
        const Timestamp t_end = c_.t_start + static_cast<Timestamp>(hours_) * kSecondsPerHour;

        std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap;
        std::uint64_t order = 0;
        auto push = [&](Timestamp ts, PendingType type, UserIndex a, UserIndex b = kNoUser, std::uint32_t plant = 0) {
            if (ts < t_end) {
                heap.push({ts, order++, type, a, b, plant});
            }
        };

        std::vector<Event> events;
        std::array<std::size_t, 4> counts{};
        std::uint64_t tweet_counter = 0;
        auto emit = [&](Event e) {
            ++counts[static_cast<std::size_t>(e.kind)];
            if (out) {
                e.seq = static_cast<std::int64_t>(events.size());
                events.push_back(std::move(e));
            }
        };
        auto emit_follow = [&](Timestamp ts, UserIndex j, UserIndex r) {
            auto it = last_exposure.find(pair_key(j, r));
            const bool exposed = it != last_exposure.end() && ts - it->second <= horizon;
            stats.measured_exposed += exposed;
            adj.add(j, r);
            Event e;
            e.ts = ts;
            e.kind = EventKind::Follow;
            e.actor = j;
            e.target = r;
            emit(std::move(e));
            return exposed;
        };
        auto emit_unfollow = [&](Timestamp ts, UserIndex j, UserIndex r) {
            adj.remove(j, r);
            ++stats.unfollows;
            Event e;
            e.ts = ts;
            e.kind = EventKind::Unfollow;
            e.actor = j;
            e.target = r;
            emit(std::move(e));
        };
        auto emit_tweet = [&](Timestamp ts, UserIndex u, bool hot, Rng& rng) {
            Event e;
            e.ts = ts;
            e.kind = EventKind::Tweet;
            e.actor = u;
            e.tweet_id = "t" + std::to_string(++tweet_counter);
            e.text = make_text(u, rng, hot);
            std::string id = e.tweet_id;
            std::string text = e.text;
            emit(std::move(e));
            return std::pair(id, text);
        };
        // drop the least similar of three random followers
        auto pick_unfollower = [&](UserIndex r, Rng& rng) -> UserIndex {
            const auto& fs = adj.followers(r);
            if (fs.empty()) {
                return kNoUser;
            }
            UserIndex best = kNoUser;
            double best_y = 0.0;
            for (int k = 0; k < 3; ++k) {
                const auto j = fs[uniform_below(rng, fs.size())];
                const double y = y_true(j, r);
                if (best == kNoUser || y < best_y) {
                    best = j;
                    best_y = y;
                }
            }
            return best;
        };

        std::vector<std::string> plant_text(plants.size());
        std::vector<std::size_t> flood_done(plants.size(), 0);
        for (std::size_t h = 0; h < hours_; ++h) {
            const Timestamp hs = c_.t_start + static_cast<Timestamp>(h) * kSecondsPerHour;
            const double d = diurnal_[h % 24];
            auto when = [&](Rng& rng) { return hs + static_cast<Timestamp>(uniform_below(rng, kSecondsPerHour)); };

            // background tweets draw only from their own stream and never touch the follow
            // process, so calibration passes skip them
            const auto n_tweets =
                out ? poisson(rng_text, static_cast<double>(n_) * c_.tweets_per_day / 24.0 * d) : std::int64_t{0};
            for (std::int64_t k = 0; k < n_tweets; ++k) {
                const auto u = static_cast<UserIndex>(uniform_below(rng_text, n_));
                push(when(rng_text), PendingType::Tweet, u);
            }
            if (!followee_sampler.empty()) {
                const auto n_follow = poisson(rng_bg, rates.follow * d);
                for (std::int64_t k = 0; k < n_follow; ++k) {
                    push(when(rng_bg), PendingType::BackgroundFollow, static_cast<UserIndex>(followee_sampler.draw(rng_bg)));
                }
                const auto n_unfollow = poisson(rng_bg, rates.unfollow * d);
                for (std::int64_t k = 0; k < n_unfollow; ++k) {
                    push(when(rng_bg), PendingType::BackgroundUnfollow,
                         static_cast<UserIndex>(followee_sampler.draw(rng_bg)));
                }
            }
            if (auto it = plants_by_hour_.find(static_cast<int>(h)); it != plants_by_hour_.end()) {
                for (auto p : it->second) {
                    schedule_plant(p, plants[p], hs, adj, rng_plant, push);
                }
            }

            const Timestamp next = hs + kSecondsPerHour;
            while (!heap.empty() && heap.top().ts < next) {
                const Pending ev = heap.top();
                heap.pop();
                switch (ev.type) {
                    case PendingType::Tweet:
                        emit_tweet(ev.ts, ev.a, false, rng_text);
                        break;
                    case PendingType::FloodTweet:
                        emit_tweet(ev.ts, ev.a, false, rng_plant);
                        break;
                    case PendingType::PlantTweet: {
                        auto [id, text] = emit_tweet(ev.ts, ev.a, plants[ev.plant].hot, rng_plant);
                        plants[ev.plant].tweet_id = id;
                        plant_text[ev.plant] = text;
                        break;
                    }
                    case PendingType::Retweet: {
                        auto& plant = plants[ev.plant];
                        const UserIndex k = ev.a;
                        const UserIndex i = ev.b;
                        Event e;
                        e.ts = ev.ts;
                        e.kind = EventKind::Retweet;
                        e.actor = k;
                        e.target = i;
                        e.tweet_id = plant.tweet_id;
                        e.text = plant_text[ev.plant];
                        emit(std::move(e));
                        // copy: responses scheduled here never mutate the list, but keep it simple
                        const std::vector<UserIndex> audience = adj.followers(k);
                        for (auto j : audience) {
                            if (j == i) {
                                continue;
                            }
                            last_exposure[pair_key(j, i)] = ev.ts;
                            if (adj.has(j, i) || !exposed_pairs.insert(pair_key(j, i)).second) {
                                continue;
                            }
                            ++plant.exposed;
                            const double y = y_true(j, i);
                            const double p = std::min(c_.model_C * std::exp(c_.model_alpha * y), 1.0);
                            const bool follows = bernoulli(rng_resp, p);
                            const auto bin = static_cast<std::size_t>(
                                std::clamp(std::floor((y - kLawLo) / kLawBinWidth), 0.0,
                                           static_cast<double>(law.size() - 1)));
                            ++law[bin].n;
                            law[bin].expected += p;
                            if (follows) {
                                ++law[bin].follows;
                                const auto delay = static_cast<Timestamp>(
                                    std::floor(exponential(rng_resp, c_.response_delay_minutes * 60.0)));
                                push(ev.ts + 1 + delay, PendingType::ResponseFollow, j, i, ev.plant);
                            }
                        }
                        break;
                    }
                    case PendingType::ResponseFollow: {
                        if (adj.has(ev.a, ev.b)) {
                            break;
                        }
                        stats.measured_exposed_responses += emit_follow(ev.ts, ev.a, ev.b);
                        ++stats.response_follows;
                        ++plants[ev.plant].responses;
                        stats.planted_top += top_[ev.b];
                        break;
                    }
                    case PendingType::StrangerFollow: {
                        const UserIndex i = ev.b;
                        const auto& community = topic_members_[dominant_[i]];
                        for (int attempt = 0; attempt < 50; ++attempt) {
                            const UserIndex j = bernoulli(rng_plant, c_.homophily) && community.size() > 1
                                                    ? community[uniform_below(rng_plant, community.size())]
                                                    : static_cast<UserIndex>(uniform_below(rng_plant, n_));
                            if (j == i || adj.has(j, i)) {
                                continue;
                            }
                            const auto& outs = adj.followees(j);
                            const bool two_hop = std::any_of(outs.begin(), outs.end(),
                                                             [&](UserIndex m) { return adj.has(m, i); });
                            if (two_hop) {
                                continue;
                            }
                            emit_follow(ev.ts, j, i);
                            ++stats.stranger_follows;
                            stats.planted_top += top_[i];
                            break;
                        }
                        break;
                    }
                    case PendingType::BackgroundFollow: {
                        const UserIndex r = ev.a;
                        const auto& community = topic_members_[dominant_[r]];
                        for (int attempt = 0; attempt < 20; ++attempt) {
                            const UserIndex j = bernoulli(rng_bg, c_.homophily) && community.size() > 1
                                                    ? community[uniform_below(rng_bg, community.size())]
                                                    : static_cast<UserIndex>(uniform_below(rng_bg, n_));
                            if (j == r || adj.has(j, r)) {
                                continue;
                            }
                            emit_follow(ev.ts, j, r);
                            ++stats.background_follows;
                            break;
                        }
                        break;
                    }
                    case PendingType::BackgroundUnfollow: {
                        UserIndex r = ev.a;
                        for (int attempt = 0; attempt < 10 && adj.followers(r).empty(); ++attempt) {
                            r = static_cast<UserIndex>(followee_sampler.draw(rng_bg));
                        }
                        const auto j = pick_unfollower(r, rng_bg);
                        if (j != kNoUser) {
                            emit_unfollow(ev.ts, j, r);
                        }
                        break;
                    }
                    case PendingType::FloodUnfollow: {
                        const auto j = pick_unfollower(ev.a, rng_plant);
                        if (j != kNoUser) {
                            emit_unfollow(ev.ts, j, ev.a);
                            ++flood_done[ev.plant];
                            ++stats.planted_unfollows;
                            stats.planted_top += top_[ev.a];
                        }
                        break;
                    }
                }
            }
        }

        if (out) {
            out->users = UserTable();
            for (std::size_t u = 0; u < n_; ++u) {
                out->users.intern(user_name(u));
            }
            out->snapshot = snapshot_;
            out->events = std::move(events);
            auto& t = out->truth;
            t.config = c_;
            t.events_digest = events_digest(out->users, out->events);
            t.kind_counts = counts;
            t.background_follows = stats.background_follows;
            t.response_follows = stats.response_follows;
            t.stranger_follows = stats.stranger_follows;
            t.measured_exposed_follows = stats.measured_exposed;
            t.planted_unfollows = stats.planted_unfollows;
            for (std::size_t p = 0; p < plants.size(); ++p) {
                if (plants[p].kind == PlantedBurst::Kind::TweetUnfollow) {
                    plants[p].responses = flood_done[p];
                }
            }
            t.bursts = std::move(plants);
            t.law = std::move(law);
            t.mixtures.reserve(n_);
            for (std::size_t u = 0; u < n_; ++u) {
                t.mixtures.emplace_back(user_name(u), mixture_[u]);
            }
        }
        return stats;
    }

    template <typename Push>
    void schedule_plant(std::uint32_t p, PlantedBurst& plant, Timestamp hs, const Adjacency& adj, Rng& rng, Push& push) {
        const UserIndex i = plant_user_[p];
        if (plant.kind == PlantedBurst::Kind::TweetUnfollow) {
            for (int k = 0; k < plant.triggers; ++k) {
                push(hs + static_cast<Timestamp>(uniform_below(rng, kSecondsPerHour)), PendingType::FloodTweet, i);
            }
            for (std::size_t k = 0; k < plant.responses; ++k) {
                push(hs + static_cast<Timestamp>(uniform_below(rng, 2 * kSecondsPerHour)), PendingType::FloodUnfollow, i,
                     kNoUser, p);
            }
            return;
        }
        push(hs + static_cast<Timestamp>(uniform_below(rng, 300)), PendingType::PlantTweet, i, kNoUser, p);
        // retweeters: followers of i weighted by how similar their own audience is to i
        const auto& fs = adj.followers(i);
        std::vector<UserIndex> cand;
        std::vector<double> score;
        std::vector<double> audience;
        // scratch marks: followers of i, and Y values already computed for this plant
        if (mark_.size() != n_) {
            mark_.assign(n_, 0);
            y_stamp_.assign(n_, 0);
            y_cache_.assign(n_, 0.0);
        }
        ++stamp_;
        mark_[i] = stamp_;
        for (auto k : fs) {
            mark_[k] = stamp_;
        }
        for (auto k : fs) {
            double s = 0.0;
            std::size_t m = 0;
            for (auto j : adj.followers(k)) {
                if (mark_[j] != stamp_) {
                    if (y_stamp_[j] != stamp_) {
                        y_stamp_[j] = stamp_;
                        y_cache_[j] = y_true(j, i);
                    }
                    s += y_cache_[j];
                    ++m;
                }
            }
            if (m > 0) {
                cand.push_back(k);
                score.push_back(s / static_cast<double>(m));
                audience.push_back(static_cast<double>(m));
            }
        }
        if (cand.empty()) {
            cand = fs;
            score.assign(fs.size(), 0.0);
            audience.assign(fs.size(), 1.0);
        }
        double mean = 0.0, sd = 0.0;
        for (double s : score) {
            mean += s;
        }
        mean /= std::max<std::size_t>(1, score.size());
        for (double s : score) {
            sd += (s - mean) * (s - mean);
        }
        sd = std::sqrt(sd / std::max<std::size_t>(1, score.size()));
        std::vector<double> weight(cand.size());
        for (std::size_t k = 0; k < cand.size(); ++k) {
            const double z = sd > 0.0 ? (score[k] - mean) / sd : 0.0;
            weight[k] = std::exp(plant.boost * z);
            if (plant.couples_follow) {
                weight[k] *= std::pow(audience[k], c_.audience_boost);
            }
        }
        const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, plant.triggers)), cand.size());
        plant.triggers = static_cast<int>(count);
        for (std::size_t r = 0; r < count; ++r) {
            const WeightedSampler pick(weight);
            const auto k = pick.draw(rng);
            weight[k] = 0.0;
            push(hs + 300 + static_cast<Timestamp>(uniform_below(rng, kSecondsPerHour - 300)), PendingType::Retweet,
                 cand[k], i, p);
        }
        if (plant.couples_follow && c_.stranger_mean > 0.0) {
            const auto n_strangers = poisson(rng, c_.stranger_mean);
            for (std::int64_t k = 0; k < n_strangers; ++k) {
                push(hs + 600 + static_cast<Timestamp>(uniform_below(rng, kSecondsPerHour)), PendingType::StrangerFollow,
                     kNoUser, i, p);
            }
        }
    }

    const SynthConfig& c_;
    std::size_t n_;
    std::size_t hours_;
    std::array<double, 24> diurnal_;

    std::vector<std::vector<std::string>> topic_words_;
    std::vector<std::string> common_words_;
    std::vector<std::uint32_t> dominant_;
    std::vector<std::vector<double>> mixture_;
    std::vector<std::vector<double>> unit_mixture_;
    std::vector<WeightedSampler> mixture_sampler_;
    std::vector<std::vector<UserIndex>> topic_members_;

    std::vector<std::size_t> indeg0_;
    std::unique_ptr<Adjacency> adjacency_;
    std::vector<Edge> snapshot_;
    std::vector<double> mu_;
    std::vector<double> sigma_;
    std::vector<std::uint8_t> top_;

    std::vector<PlantedBurst> plants_;
    std::vector<UserIndex> plant_user_;
    std::vector<std::uint64_t> mark_;
    std::vector<std::uint64_t> y_stamp_;
    std::vector<double> y_cache_;
    std::uint64_t stamp_ = 0;
    std::unordered_map<int, std::vector<std::uint32_t>> plants_by_hour_;
};

}  // namespace

std::array<double, 24> SynthConfig::diurnal() const {
    std::array<double, 24> p = diurnal_profile;
    if (std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; })) {
        // quiet early morning, busy evening
        constexpr double kTwoPi = 6.283185307179586;
        for (int h = 0; h < 24; ++h) {
            p[static_cast<std::size_t>(h)] = 1.0 + 0.6 * std::sin(kTwoPi * (h - 9) / 24.0);
        }
    }
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / 24.0;
    for (auto& v : p) {
        v /= mean;
    }
    return p;
}

SynthConfig SynthConfig::null_model(std::size_t n_users, int n_days, std::uint64_t seed) {
    SynthConfig c;
    c.n_users = n_users;
    c.n_days = n_days;
    c.seed = seed;
    c.diurnal_profile.fill(1.0);
    c.n_retweet_bursts = 0;
    c.n_tweet_unfollow_bursts = 0;
    c.base_follow_rate = 100.0 * static_cast<double>(n_users) / 10'000.0;
    c.base_unfollow_rate = c.base_follow_rate * c.deletion_ratio;
    c.follow_rate_gamma = 1.0;
    c.calibrate_gamma = false;
    return c;
}

void SynthConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("synthgen config: " + what); };
    if (n_users < 10) fail("n_users must be at least 10");
    if (n_users > std::numeric_limits<UserIndex>::max() / 2) fail("n_users too large");
    if (n_days < 4) fail("n_days must be at least 4");
    if (std::any_of(diurnal_profile.begin(), diurnal_profile.end(), [](double v) { return !(v >= 0.0); }))
        fail("diurnal_profile entries must be non-negative");
    if (!(indegree_exponent > 1.0)) fail("indegree_exponent must exceed 1");
    if (min_indegree < 1 || min_indegree >= n_users) fail("min_indegree must lie in [1, n_users)");
    if (max_indegree != 0 && max_indegree < min_indegree) fail("max_indegree below min_indegree");
    if (!(homophily >= 0.0 && homophily <= 1.0)) fail("homophily must lie in [0, 1]");
    if (n_topics < 2) fail("n_topics must be at least 2");
    if (words_per_topic < 1) fail("words_per_topic must be positive");
    if (n_common_words < 0) fail("n_common_words must be non-negative");
    if (!(dominant_weight > 0.0 && dominant_weight + 0.01 * n_topics <= 1.0))
        fail("dominant_weight plus the topic floor must not exceed 1");
    if (!(tweets_per_day >= 0.0)) fail("tweets_per_day must be non-negative");
    if (tokens_min < 1 || tokens_max < tokens_min) fail("need 1 <= tokens_min <= tokens_max");
    if (!(deletion_ratio >= 0.0)) fail("deletion_ratio must be non-negative");
    if (!(exposure_fraction > 0.0 && exposure_fraction < 1.0)) fail("exposure_fraction must lie in (0, 1)");
    if (!(top_quintile_target > 0.2 && top_quintile_target < 1.0)) fail("top_quintile_target must lie in (0.2, 1)");
    if (!(model_C > 0.0 && model_C < 1.0)) fail("model C must lie in (0, 1)");
    if (!std::isfinite(model_alpha)) fail("model alpha must be finite");
    if (!(response_delay_minutes >= 0.0)) fail("response_delay_minutes must be non-negative");
    if (min_burst_spacing_hours < 1) fail("min_burst_spacing_hours must be positive");
    if (!(retweets_mean >= 0.0) || retweets_min < 0) fail("retweet counts must be non-negative");
    if (!(couple_rate >= 0.0 && couple_rate <= 1.0)) fail("couple_rate must lie in [0, 1]");
    if (!(audience_boost >= 0.0 && std::isfinite(audience_boost))) fail("audience_boost must be finite and non-negative");
    if (!(hot_token_rate >= 0.0 && hot_token_rate <= 1.0)) fail("hot_token_rate must lie in [0, 1]");
    if (!(hot_token_effect >= 0.0)) fail("hot_token_effect must be non-negative");
    if (hot_token.empty() || hot_token.find_first_of(" \t\n") != std::string::npos)
        fail("hot_token must be a single non-empty word");
    if (!(stranger_mean >= 0.0 && tweet_flood_mean >= 0.0 && unfollow_flood_mean >= 0.0))
        fail("plant means must be non-negative");
    if ((n_retweet_bursts > 0 || !planted_bursts.empty() || n_tweet_unfollow_bursts > 0) && n_days < 5)
        fail("planted bursts need at least 5 days");
}

namespace {

json config_json(const SynthConfig& c) {
    json j;
    j["n_users"] = c.n_users;
    j["n_days"] = c.n_days;
    j["seed"] = c.seed;
    j["t_start"] = c.t_start;
    j["diurnal_profile"] = c.diurnal_profile;
    j["indegree_exponent"] = c.indegree_exponent;
    j["min_indegree"] = c.min_indegree;
    j["max_indegree"] = c.max_indegree;
    j["homophily"] = c.homophily;
    j["n_topics"] = c.n_topics;
    j["words_per_topic"] = c.words_per_topic;
    j["n_common_words"] = c.n_common_words;
    j["dominant_weight"] = c.dominant_weight;
    j["tweets_per_day"] = c.tweets_per_day;
    j["tokens_min"] = c.tokens_min;
    j["tokens_max"] = c.tokens_max;
    j["base_follow_rate"] = c.base_follow_rate;
    j["base_unfollow_rate"] = c.base_unfollow_rate;
    j["follow_rate_gamma"] = c.follow_rate_gamma;
    j["calibrate_gamma"] = c.calibrate_gamma;
    j["top_quintile_target"] = c.top_quintile_target;
    j["deletion_ratio"] = c.deletion_ratio;
    j["exposure_fraction"] = c.exposure_fraction;
    j["calibration_passes"] = c.calibration_passes;
    j["model"] = {{"C", c.model_C}, {"alpha", c.model_alpha}};
    j["response_delay_minutes"] = c.response_delay_minutes;
    j["n_retweet_bursts"] = c.n_retweet_bursts;
    j["plant_min_indegree"] = c.plant_min_indegree;
    j["min_burst_spacing_hours"] = c.min_burst_spacing_hours;
    j["retweets_mean"] = c.retweets_mean;
    j["retweets_min"] = c.retweets_min;
    j["coupled_magnitude_factor"] = c.coupled_magnitude_factor;
    j["cohort_boost"] = c.cohort_boost;
    j["audience_boost"] = c.audience_boost;
    j["couple_rate"] = c.couple_rate;
    j["hot_token"] = c.hot_token;
    j["hot_token_rate"] = c.hot_token_rate;
    j["hot_token_effect"] = c.hot_token_effect;
    j["stranger_mean"] = c.stranger_mean;
    json plants = json::array();
    for (const auto& p : c.planted_bursts) {
        plants.push_back({{"user", p.user},
                          {"hour", p.hour},
                          {"retweets", p.retweets},
                          {"boost", p.boost},
                          {"couples_follow", p.couples_follow}});
    }
    j["planted_bursts"] = plants;
    j["n_tweet_unfollow_bursts"] = c.n_tweet_unfollow_bursts;
    j["tweet_flood_mean"] = c.tweet_flood_mean;
    j["unfollow_flood_mean"] = c.unfollow_flood_mean;
    return j;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        out = it->get<T>();
    }
}

SynthConfig config_from(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("synthgen config must be a JSON object");
    }
    static const std::set<std::string> known = {
        "n_users", "n_days", "seed", "t_start", "diurnal_profile", "indegree_exponent", "min_indegree",
        "max_indegree", "homophily", "n_topics", "words_per_topic", "n_common_words", "dominant_weight",
        "tweets_per_day", "tokens_min", "tokens_max", "base_follow_rate", "base_unfollow_rate", "follow_rate_gamma",
        "calibrate_gamma", "top_quintile_target", "deletion_ratio", "exposure_fraction", "calibration_passes",
        "model", "response_delay_minutes", "n_retweet_bursts", "plant_min_indegree", "min_burst_spacing_hours",
        "retweets_mean", "retweets_min", "coupled_magnitude_factor", "cohort_boost", "audience_boost", "couple_rate", "hot_token",
        "hot_token_rate", "hot_token_effect", "stranger_mean", "planted_bursts", "n_tweet_unfollow_bursts",
        "tweet_flood_mean", "unfollow_flood_mean"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("synthgen config: unknown key '" + key + "'");
        }
    }
    SynthConfig c;
    try {
        read_field(j, "n_users", c.n_users);
        read_field(j, "n_days", c.n_days);
        read_field(j, "seed", c.seed);
        read_field(j, "t_start", c.t_start);
        if (auto it = j.find("diurnal_profile"); it != j.end() && !it->is_null()) {
            if (!it->is_array() || it->size() != 24) {
                throw std::invalid_argument("synthgen config: diurnal_profile needs 24 numbers");
            }
            for (std::size_t h = 0; h < 24; ++h) {
                c.diurnal_profile[h] = (*it)[h].get<double>();
            }
        }
        read_field(j, "indegree_exponent", c.indegree_exponent);
        read_field(j, "min_indegree", c.min_indegree);
        read_field(j, "max_indegree", c.max_indegree);
        read_field(j, "homophily", c.homophily);
        read_field(j, "n_topics", c.n_topics);
        read_field(j, "words_per_topic", c.words_per_topic);
        read_field(j, "n_common_words", c.n_common_words);
        read_field(j, "dominant_weight", c.dominant_weight);
        read_field(j, "tweets_per_day", c.tweets_per_day);
        read_field(j, "tokens_min", c.tokens_min);
        read_field(j, "tokens_max", c.tokens_max);
        read_field(j, "base_follow_rate", c.base_follow_rate);
        read_field(j, "base_unfollow_rate", c.base_unfollow_rate);
        read_field(j, "follow_rate_gamma", c.follow_rate_gamma);
        read_field(j, "calibrate_gamma", c.calibrate_gamma);
        read_field(j, "top_quintile_target", c.top_quintile_target);
        read_field(j, "deletion_ratio", c.deletion_ratio);
        read_field(j, "exposure_fraction", c.exposure_fraction);
        read_field(j, "calibration_passes", c.calibration_passes);
        if (auto it = j.find("model"); it != j.end() && !it->is_null()) {
            read_field(*it, "C", c.model_C);
            read_field(*it, "alpha", c.model_alpha);
        }
        read_field(j, "response_delay_minutes", c.response_delay_minutes);
        read_field(j, "n_retweet_bursts", c.n_retweet_bursts);
        read_field(j, "plant_min_indegree", c.plant_min_indegree);
        read_field(j, "min_burst_spacing_hours", c.min_burst_spacing_hours);
        read_field(j, "retweets_mean", c.retweets_mean);
        read_field(j, "retweets_min", c.retweets_min);
        read_field(j, "coupled_magnitude_factor", c.coupled_magnitude_factor);
        read_field(j, "cohort_boost", c.cohort_boost);
        read_field(j, "audience_boost", c.audience_boost);
        read_field(j, "couple_rate", c.couple_rate);
        read_field(j, "hot_token", c.hot_token);
        read_field(j, "hot_token_rate", c.hot_token_rate);
        read_field(j, "hot_token_effect", c.hot_token_effect);
        read_field(j, "stranger_mean", c.stranger_mean);
        if (auto it = j.find("planted_bursts"); it != j.end() && !it->is_null()) {
            for (const auto& p : *it) {
                PlantSpec ps;
                ps.user = p.at("user").get<std::string>();
                ps.hour = p.at("hour").get<int>();
                ps.retweets = p.at("retweets").get<int>();
                read_field(p, "boost", ps.boost);
                read_field(p, "couples_follow", ps.couples_follow);
                c.planted_bursts.push_back(ps);
            }
        }
        read_field(j, "n_tweet_unfollow_bursts", c.n_tweet_unfollow_bursts);
        read_field(j, "tweet_flood_mean", c.tweet_flood_mean);
        read_field(j, "unfollow_flood_mean", c.unfollow_flood_mean);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("synthgen config: ") + e.what());
    }
    return c;
}

const char* kind_name(PlantedBurst::Kind k) {
    return k == PlantedBurst::Kind::Retweet ? "retweet" : "tweet-unfollow";
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

SynthConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("synthgen config is not valid JSON: ") + e.what());
    }
    return config_from(j);
}

SynthConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const SynthConfig& config) {
    return config_json(config).dump(2) + "\n";
}

SynthOutput generate(const SynthConfig& config) {
    config.validate();
    Generator gen(config);
    return gen.run();
}

std::uint64_t events_digest(const UserTable& users, std::span<const Event> events) {
    std::uint64_t h = fnv1a64("");
    std::ostringstream line;
    for (const auto& e : events) {
        line.str("");
        write_event_line(line, users, e);
        h = fnv1a64(line.view(), h);
    }
    return h;
}

void write_truth(std::ostream& out, const GroundTruth& t) {
    out << json{{"type", "config"}, {"config", config_json(t.config)}}.dump() << '\n';
    out << json{{"type", "params"}, {"C", t.config.model_C}, {"alpha", t.config.model_alpha}}.dump() << '\n';
    out << json{{"type", "tallies"},
                {"follow", t.kind_counts[0]},
                {"unfollow", t.kind_counts[1]},
                {"tweet", t.kind_counts[2]},
                {"retweet", t.kind_counts[3]},
                {"background_follows", t.background_follows},
                {"response_follows", t.response_follows},
                {"stranger_follows", t.stranger_follows},
                {"measured_exposed_follows", t.measured_exposed_follows},
                {"planted_unfollows", t.planted_unfollows}}
               .dump()
        << '\n';
    out << json{{"type", "events_digest"}, {"fnv1a64", hex64(t.events_digest)}}.dump() << '\n';
    for (const auto& b : t.bursts) {
        out << json{{"type", "burst"},
                    {"kind", kind_name(b.kind)},
                    {"user", b.user},
                    {"hour", b.hour},
                    {"triggers", b.triggers},
                    {"boost", b.boost},
                    {"couples_follow", b.couples_follow},
                    {"hot", b.hot},
                    {"tweet_id", b.tweet_id},
                    {"exposed", b.exposed},
                    {"responses", b.responses}}
                   .dump()
            << '\n';
    }
    for (const auto& l : t.law) {
        out << json{{"type", "law_bin"}, {"lo", l.lo}, {"hi", l.hi}, {"n", l.n}, {"follows", l.follows},
                    {"expected", l.expected}}
                   .dump()
            << '\n';
    }
    for (const auto& [user, m] : t.mixtures) {
        out << json{{"type", "mixture"}, {"user", user}, {"weights", m}}.dump() << '\n';
    }
}

GroundTruth read_truth(std::istream& in, const std::string& name) {
    GroundTruth t;
    std::string line;
    std::size_t lineno = 0;
    bool have_config = false, have_digest = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "config") {
                t.config = config_from(j.at("config"));
                have_config = true;
            } else if (type == "params") {
                t.config.model_C = j.at("C").get<double>();
                t.config.model_alpha = j.at("alpha").get<double>();
            } else if (type == "tallies") {
                t.kind_counts = {j.at("follow").get<std::size_t>(), j.at("unfollow").get<std::size_t>(),
                                 j.at("tweet").get<std::size_t>(), j.at("retweet").get<std::size_t>()};
                t.background_follows = j.at("background_follows").get<std::size_t>();
                t.response_follows = j.at("response_follows").get<std::size_t>();
                t.stranger_follows = j.at("stranger_follows").get<std::size_t>();
                t.measured_exposed_follows = j.at("measured_exposed_follows").get<std::size_t>();
                t.planted_unfollows = j.at("planted_unfollows").get<std::size_t>();
            } else if (type == "events_digest") {
                t.events_digest = std::stoull(j.at("fnv1a64").get<std::string>(), nullptr, 16);
                have_digest = true;
            } else if (type == "burst") {
                PlantedBurst b;
                const auto kind = j.at("kind").get<std::string>();
                if (kind == "retweet") {
                    b.kind = PlantedBurst::Kind::Retweet;
                } else if (kind == "tweet-unfollow") {
                    b.kind = PlantedBurst::Kind::TweetUnfollow;
                } else {
                    throw DataError(name, lineno, "unknown burst kind '" + kind + "'");
                }
                b.user = j.at("user").get<std::string>();
                b.hour = j.at("hour").get<int>();
                b.triggers = j.at("triggers").get<int>();
                b.boost = j.at("boost").get<double>();
                b.couples_follow = j.at("couples_follow").get<bool>();
                b.hot = j.at("hot").get<bool>();
                b.tweet_id = j.at("tweet_id").get<std::string>();
                b.exposed = j.at("exposed").get<std::size_t>();
                b.responses = j.at("responses").get<std::size_t>();
                t.bursts.push_back(std::move(b));
            } else if (type == "law_bin") {
                t.law.push_back({j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("n").get<std::size_t>(),
                                 j.at("follows").get<std::size_t>(), j.at("expected").get<double>()});
            } else if (type == "mixture") {
                t.mixtures.emplace_back(j.at("user").get<std::string>(), j.at("weights").get<std::vector<double>>());
            } else {
                throw DataError(name, lineno, "unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw DataError(name, lineno, e.what());
        } catch (const std::invalid_argument& e) {
            throw DataError(name, lineno, e.what());
        }
    }
    if (!have_config || !have_digest) {
        throw DataError(name + ": missing config or events_digest record");
    }
    return t;
}

GroundTruth load_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open truth file " + path.string());
    }
    return read_truth(in, path.string());
}

void write_output(const SynthOutput& out, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
        return f;
    };
    {
        auto f = open("snapshot.csv");
        write_snapshot(f, out.users, out.snapshot);
    }
    {
        auto f = open("events.jsonl");
        write_events(f, out.users, out.events);
    }
    {
        auto f = open("truth.jsonl");
        write_truth(f, out.truth);
    }
    {
        auto f = open("config.json");
        f << config_to_json(out.truth.config);
    }
}

double Scorecard::retweet_recall() const {
    return planted_retweet ? static_cast<double>(recovered_retweet) / static_cast<double>(planted_retweet) : 0.0;
}
double Scorecard::tweet_recall() const {
    return planted_tweet ? static_cast<double>(recovered_tweet) / static_cast<double>(planted_tweet) : 0.0;
}
double Scorecard::precision() const {
    return detected_retweet ? static_cast<double>(matched_retweet) / static_cast<double>(detected_retweet) : 0.0;
}
double Scorecard::label_agreement() const {
    return recovered_retweet ? static_cast<double>(label_agree) / static_cast<double>(recovered_retweet) : 0.0;
}

Scorecard truth_report(const GroundTruth& truth, const TemporalGraph& g, const BurstCatalog& catalog,
                       const std::optional<ModelParams>& fitted) {
    if (events_digest(g.users(), g.events()) != truth.events_digest) {
        throw DataError("event log does not match the ground truth (digest mismatch: different seed or config?)");
    }
    Scorecard s;
    const auto covers = [](const std::vector<Burst>& list, int hour) {
        return std::find_if(list.begin(), list.end(), [&](const Burst& b) {
                   return b.hour <= hour && hour <= b.end_hour;
               }) != list.end();
    };
    std::set<std::pair<UserIndex, int>> coupled_hours;
    for (const auto& cb : catalog.cobursts) {
        if (cb.type == CoBurstType::RetweetFollow) {
            coupled_hours.insert({cb.trigger.user, cb.trigger.hour});
        }
    }
    std::unordered_map<UserIndex, std::vector<int>> planted_rt_hours;
    for (const auto& b : truth.bursts) {
        const auto u = g.users().find(b.user);
        if (b.kind == PlantedBurst::Kind::Retweet) {
            ++s.planted_retweet;
            s.coupled += b.couples_follow;
            if (!u) {
                continue;
            }
            planted_rt_hours[*u].push_back(b.hour);
            const auto& list = catalog.by_user.at(*u)[static_cast<std::size_t>(SeriesKind::RetweetsReceived)];
            const auto it = std::find_if(list.begin(), list.end(), [&](const Burst& x) {
                return x.hour <= b.hour && b.hour <= x.end_hour;
            });
            if (it != list.end()) {
                ++s.recovered_retweet;
                const bool label = coupled_hours.count({*u, it->hour}) != 0;
                s.label_agree += label == b.couples_follow;
            }
        } else {
            ++s.planted_tweet;
            if (u && covers(catalog.by_user.at(*u)[static_cast<std::size_t>(SeriesKind::TweetsAuthored)], b.hour)) {
                ++s.recovered_tweet;
            }
        }
    }
    for (const auto& b : catalog.of_kind(SeriesKind::RetweetsReceived)) {
        ++s.detected_retweet;
        const auto it = planted_rt_hours.find(b.user);
        if (it != planted_rt_hours.end() &&
            std::any_of(it->second.begin(), it->second.end(), [&](int h) { return b.hour <= h && h <= b.end_hour; })) {
            ++s.matched_retweet;
        }
    }
    if (fitted) {
        s.alpha_error = std::abs(fitted->alpha - truth.config.model_alpha) / std::abs(truth.config.model_alpha);
        s.C_error = std::abs(fitted->C - truth.config.model_C) / truth.config.model_C;
    }
    return s;
}

}  // namespace burstnet
