#include "burstnet/event_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace burstnet {

namespace {

std::uint64_t edge_key(UserIndex follower, UserIndex followee) {
    return (static_cast<std::uint64_t>(follower) << 32) | followee;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::size_t kind_slot(EventKind k) {
    return static_cast<std::size_t>(k);
}

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Follow: return "follow";
        case EventKind::Unfollow: return "unfollow";
        case EventKind::Tweet: return "tweet";
        case EventKind::Retweet: return "retweet";
    }
    return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    if (text == "follow") return EventKind::Follow;
    if (text == "unfollow") return EventKind::Unfollow;
    if (text == "tweet") return EventKind::Tweet;
    if (text == "retweet") return EventKind::Retweet;
    return std::nullopt;
}

std::string_view to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::IncomingFollows: return "follows";
        case SeriesKind::IncomingUnfollows: return "unfollows";
        case SeriesKind::TweetsAuthored: return "tweets";
        case SeriesKind::RetweetsReceived: return "retweets";
    }
    return "?";
}

std::optional<SeriesKind> parse_series_kind(std::string_view text) {
    for (auto k : kAllSeriesKinds) {
        if (to_string(k) == text) {
            return k;
        }
    }
    return std::nullopt;
}

UserIndex UserTable::intern(std::string_view id) {
    if (auto it = index_.find(std::string(id)); it != index_.end()) {
        return it->second;
    }
    const auto u = static_cast<UserIndex>(names_.size());
    names_.emplace_back(id);
    index_.emplace(names_.back(), u);
    return u;
}

std::optional<UserIndex> UserTable::find(std::string_view id) const {
    if (auto it = index_.find(std::string(id)); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

TemporalGraph TemporalGraph::build(UserTable users, std::vector<Edge> initial_edges, std::vector<Event> events,
                                   const IngestOptions& options, IngestReport* report, const std::string& source,
                                   std::span<const std::size_t> lines) {
    IngestReport local;
    IngestReport& rep = report ? *report : local;
    const bool skip = options.policy == InconsistencyPolicy::Skip;
    auto line_of = [&](std::size_t i) { return i < lines.size() ? lines[i] : i + 1; };

    TemporalGraph g;
    const std::size_t n = users.size();

    // window
    if (options.window_start) {
        g.window_.start = *options.window_start;
    } else if (!events.empty()) {
        const Timestamp lo = events.front().ts;
        g.window_.start = lo - ((lo % kSecondsPerHour) + kSecondsPerHour) % kSecondsPerHour;
    }
    if (options.window_end) {
        g.window_.end = *options.window_end;
    } else if (!events.empty()) {
        const Timestamp span = events.back().ts + 1 - g.window_.start;
        const Timestamp hours = std::max<Timestamp>(1, (span + kSecondsPerHour - 1) / kSecondsPerHour);
        g.window_.end = g.window_.start + hours * kSecondsPerHour;
    } else {
        g.window_.end = g.window_.start + kSecondsPerHour;
    }
    if (g.window_.end <= g.window_.start) {
        throw DataError("observation window is empty");
    }

    g.in_intervals_.assign(n, {});
    std::unordered_map<std::uint64_t, std::size_t> live;  // edge -> slot in in_intervals_[followee]
    live.reserve(initial_edges.size() * 2 + 16);

    std::vector<Edge> kept_edges;
    kept_edges.reserve(initial_edges.size());
    for (const auto& e : initial_edges) {
        if (e.follower >= n || e.followee >= n) {
            throw DataError("snapshot edge references an unknown user");
        }
        if (e.follower == e.followee) {
            throw DataError("snapshot contains self-follow edge for " + users.name(e.follower));
        }
        const auto key = edge_key(e.follower, e.followee);
        if (live.count(key)) {
            if (!skip) {
                throw DataError("duplicate snapshot edge " + users.name(e.follower) + "," + users.name(e.followee));
            }
            ++rep.skipped;
            rep.warnings.push_back("skipped duplicate snapshot edge " + users.name(e.follower) + "," +
                                   users.name(e.followee));
            continue;
        }
        auto& slot = g.in_intervals_[e.followee];
        live.emplace(key, slot.size());
        slot.push_back({e.follower, EventKey::min(), EventKey::max()});
        kept_edges.push_back(e);
    }
    rep.initial_edges = kept_edges.size();

    std::vector<Event> kept;
    kept.reserve(events.size());
    EventKey prev = EventKey::min();
    bool first = true;
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto& ev = events[i];
        const auto key = ev.key();
        if (!first && !(prev < key)) {
            throw DataError(source, line_of(i), "events are not strictly ordered by (ts, seq)");
        }
        first = false;
        prev = key;
        if (!g.window_.contains(ev.ts)) {
            throw DataError(source, line_of(i), "timestamp " + std::to_string(ev.ts) + " outside observation window");
        }
        if (ev.actor >= n) {
            throw DataError(source, line_of(i), "unknown actor");
        }
        const bool needs_target = ev.kind != EventKind::Tweet;
        if (needs_target != (ev.target != kNoUser)) {
            throw DataError(source, line_of(i), needs_target ? "missing target" : "tweet must not have a target");
        }
        if (needs_target && ev.target >= n) {
            throw DataError(source, line_of(i), "unknown target");
        }
        if (ev.actor == ev.target) {
            throw DataError(source, line_of(i), "actor equals target");
        }
        if (ev.kind == EventKind::Follow || ev.kind == EventKind::Unfollow) {
            const auto ek = edge_key(ev.actor, ev.target);
            auto it = live.find(ek);
            const bool is_follow = ev.kind == EventKind::Follow;
            if (is_follow == (it != live.end())) {
                const std::string what = is_follow ? "follow on an existing edge " : "unfollow of a missing edge ";
                const std::string edge = users.name(ev.actor) + "->" + users.name(ev.target);
                if (!skip) {
                    throw DataError(source, line_of(i), what + edge);
                }
                ++rep.skipped;
                rep.warnings.push_back(source + ":" + std::to_string(line_of(i)) + ": skipped " + what + edge);
                continue;
            }
            auto& slot = g.in_intervals_[ev.target];
            if (is_follow) {
                live.emplace(ek, slot.size());
                slot.push_back({ev.actor, key, EventKey::max()});
            } else {
                slot[it->second].end = key;
                live.erase(it);
            }
        }
        ++rep.kind_counts[kind_slot(ev.kind)];
        kept.push_back(std::move(ev));
    }

    for (auto& s : g.series_) {
        s.assign(n, {});
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& ev = kept[i];
        const auto idx = static_cast<std::uint32_t>(i);
        switch (ev.kind) {
            case EventKind::Follow:
                g.series_[static_cast<std::size_t>(SeriesKind::IncomingFollows)][ev.target].push_back(idx);
                break;
            case EventKind::Unfollow:
                g.series_[static_cast<std::size_t>(SeriesKind::IncomingUnfollows)][ev.target].push_back(idx);
                break;
            case EventKind::Tweet:
                g.series_[static_cast<std::size_t>(SeriesKind::TweetsAuthored)][ev.actor].push_back(idx);
                if (!ev.tweet_id.empty()) {
                    g.tweets_by_id_.emplace(ev.tweet_id, idx);
                }
                break;
            case EventKind::Retweet:
                g.series_[static_cast<std::size_t>(SeriesKind::RetweetsReceived)][ev.target].push_back(idx);
                break;
        }
    }

    g.users_ = std::move(users);
    g.initial_edges_ = std::move(kept_edges);
    g.events_ = std::move(kept);
    return g;
}

std::vector<UserIndex> TemporalGraph::followers_at(UserIndex u, EventKey k) const {
    std::vector<UserIndex> out;
    if (u >= in_intervals_.size()) {
        return out;
    }
    for (const auto& iv : in_intervals_[u]) {
        if (iv.live_at(k)) {
            out.push_back(iv.follower);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t TemporalGraph::follower_count_at(UserIndex u, Timestamp t) const {
    if (u >= in_intervals_.size()) {
        return 0;
    }
    const auto k = EventKey::at_end_of(t);
    return static_cast<std::size_t>(
        std::count_if(in_intervals_[u].begin(), in_intervals_[u].end(), [&](const auto& iv) { return iv.live_at(k); }));
}

bool TemporalGraph::follows_at(UserIndex follower, UserIndex followee, EventKey k) const {
    if (followee >= in_intervals_.size()) {
        return false;
    }
    return std::any_of(in_intervals_[followee].begin(), in_intervals_[followee].end(),
                       [&](const auto& iv) { return iv.follower == follower && iv.live_at(k); });
}

std::vector<UserIndex> TemporalGraph::two_hop_at(UserIndex u, Timestamp t) const {
    std::vector<UserIndex> out;
    if (u >= in_intervals_.size()) {
        return out;
    }
    const auto k = EventKey::at_end_of(t);
    const auto first = followers_at(u, k);
    std::vector<std::uint8_t> mark(in_intervals_.size(), 0);
    mark[u] = 1;
    for (auto v : first) {
        mark[v] = 1;
    }
    for (auto v : first) {
        for (const auto& iv : in_intervals_[v]) {
            if (iv.live_at(k) && !mark[iv.follower]) {
                mark[iv.follower] = 1;
                out.push_back(iv.follower);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::span<const EdgeInterval> TemporalGraph::in_intervals(UserIndex u) const {
    if (u >= in_intervals_.size()) {
        return {};
    }
    return in_intervals_[u];
}

std::span<const std::uint32_t> TemporalGraph::series_events(UserIndex u, SeriesKind kind) const {
    const auto& s = series_[static_cast<std::size_t>(kind)];
    if (u >= s.size()) {
        return {};
    }
    return s[u];
}

HourlySeries TemporalGraph::hourly_series(UserIndex u, SeriesKind kind) const {
    HourlySeries hs;
    hs.user = u;
    hs.kind = kind;
    hs.t0 = window_.start;
    hs.x.assign(static_cast<std::size_t>(window_.hours()), 0.0);
    for (auto idx : series_events(u, kind)) {
        hs.x[static_cast<std::size_t>(window_.hour_of(events_[idx].ts))] += 1.0;
    }
    return hs;
}

std::optional<std::uint32_t> TemporalGraph::find_tweet(std::string_view tweet_id) const {
    if (auto it = tweets_by_id_.find(std::string(tweet_id)); it != tweets_by_id_.end()) {
        return it->second;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------------------------
// file formats

namespace {

std::vector<Edge> read_snapshot(std::istream& in, UserTable& users, const std::string& name) {
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto s = trim(line);
        if (s.empty()) {
            continue;
        }
        const auto comma = s.find(',');
        if (comma == std::string_view::npos || s.find(',', comma + 1) != std::string_view::npos) {
            throw DataError(name, lineno, "expected follower_id,followee_id");
        }
        const auto a = trim(s.substr(0, comma));
        const auto b = trim(s.substr(comma + 1));
        if (a.empty() || b.empty()) {
            throw DataError(name, lineno, "empty user id");
        }
        if (a == b) {
            throw DataError(name, lineno, "self-follow edge");
        }
        const auto fa = users.intern(a);
        const auto fb = users.intern(b);
        edges.push_back({fa, fb});
    }
    return edges;
}

std::string required_string(const nlohmann::json& obj, const char* key, const std::string& name, std::size_t lineno) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw DataError(name, lineno, std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
}

std::int64_t required_int(const nlohmann::json& obj, const char* key, const std::string& name, std::size_t lineno) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer()) {
        throw DataError(name, lineno, std::string("missing or non-integer field '") + key + "'");
    }
    return it->get<std::int64_t>();
}

std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key, const std::string& name,
                                           std::size_t lineno) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw DataError(name, lineno, std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

}  // namespace

IngestResult ingest(std::istream& snapshot, std::istream& events, const IngestOptions& options,
                    const std::string& snapshot_name, const std::string& events_name) {
    UserTable users;
    auto edges = read_snapshot(snapshot, users, snapshot_name);

    std::vector<Event> evs;
    std::vector<std::size_t> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(events, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(events_name, lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) {
            throw DataError(events_name, lineno, "expected a JSON object");
        }
        Event ev;
        ev.ts = required_int(obj, "ts", events_name, lineno);
        ev.seq = required_int(obj, "seq", events_name, lineno);
        const auto kind_text = required_string(obj, "kind", events_name, lineno);
        const auto kind = parse_event_kind(kind_text);
        if (!kind) {
            throw DataError(events_name, lineno, "unknown kind '" + kind_text + "'");
        }
        ev.kind = *kind;
        const auto actor = required_string(obj, "actor", events_name, lineno);
        if (actor.empty()) {
            throw DataError(events_name, lineno, "empty actor");
        }
        ev.actor = users.intern(actor);
        if (auto target = optional_string(obj, "target", events_name, lineno)) {
            if (target->empty()) {
                throw DataError(events_name, lineno, "empty target");
            }
            ev.target = users.intern(*target);
        }
        if (auto id = optional_string(obj, "tweet_id", events_name, lineno)) {
            ev.tweet_id = std::move(*id);
        }
        if (auto text = optional_string(obj, "text", events_name, lineno)) {
            if (ev.kind == EventKind::Follow || ev.kind == EventKind::Unfollow) {
                throw DataError(events_name, lineno, "text is only valid on tweet/retweet events");
            }
            ev.text = std::move(*text);
        }
        evs.push_back(std::move(ev));
        lines.push_back(lineno);
    }

    IngestResult result;
    result.graph = TemporalGraph::build(std::move(users), std::move(edges), std::move(evs), options, &result.report,
                                        events_name, lines);
    return result;
}

IngestResult ingest(const std::filesystem::path& snapshot_path, const std::filesystem::path& events_path,
                    const IngestOptions& options) {
    std::ifstream snap(snapshot_path);
    if (!snap) {
        throw DataError(snapshot_path.string(), 0, "cannot open snapshot file");
    }
    std::ifstream evs(events_path);
    if (!evs) {
        throw DataError(events_path.string(), 0, "cannot open events file");
    }
    return ingest(snap, evs, options, snapshot_path.string(), events_path.string());
}

std::string json_quote(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    static const char* hex = "0123456789abcdef";
                    out += "\\u00";
                    out.push_back(hex[(c >> 4) & 0xf]);
                    out.push_back(hex[c & 0xf]);
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
    return out;
}

void write_snapshot(std::ostream& out, const UserTable& users, std::span<const Edge> edges) {
    for (const auto& e : edges) {
        out << users.name(e.follower) << ',' << users.name(e.followee) << '\n';
    }
}

void write_event_line(std::ostream& out, const UserTable& users, const Event& e) {
    std::string line;
    line.reserve(96 + e.text.size());
    line += "{\"ts\":";
    line += std::to_string(e.ts);
    line += ",\"seq\":";
    line += std::to_string(e.seq);
    line += ",\"kind\":\"";
    line += to_string(e.kind);
    line += "\",\"actor\":";
    line += json_quote(users.name(e.actor));
    if (e.target != kNoUser) {
        line += ",\"target\":";
        line += json_quote(users.name(e.target));
    }
    if (!e.tweet_id.empty()) {
        line += ",\"tweet_id\":";
        line += json_quote(e.tweet_id);
    }
    if (!e.text.empty()) {
        line += ",\"text\":";
        line += json_quote(e.text);
    }
    line += "}\n";
    out << line;
}

void write_events(std::ostream& out, const UserTable& users, std::span<const Event> events) {
    for (const auto& e : events) {
        write_event_line(out, users, e);
    }
}

}  // namespace burstnet
