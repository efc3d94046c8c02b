#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "burstnet/common.hpp"

namespace burstnet {

enum class EventKind : std::uint8_t { Follow, Unfollow, Tweet, Retweet };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

/// Per-user hourly arrival series tracked by the burst detector.
enum class SeriesKind : std::uint8_t { IncomingFollows, IncomingUnfollows, TweetsAuthored, RetweetsReceived };

inline constexpr std::array<SeriesKind, 4> kAllSeriesKinds = {
    SeriesKind::IncomingFollows, SeriesKind::IncomingUnfollows, SeriesKind::TweetsAuthored,
    SeriesKind::RetweetsReceived};

std::string_view to_string(SeriesKind kind);
std::optional<SeriesKind> parse_series_kind(std::string_view text);

struct Event {
    Timestamp ts = 0;
    std::int64_t seq = 0;
    EventKind kind = EventKind::Tweet;
    UserIndex actor = kNoUser;
    /// Followee for Follow/Unfollow, original author for Retweet, kNoUser for Tweet.
    UserIndex target = kNoUser;
    std::string tweet_id;
    std::string text;

    [[nodiscard]] EventKey key() const { return {ts, seq}; }
};

/// Interns opaque user id strings into dense indices, in first-seen order.
class UserTable {
public:
    UserIndex intern(std::string_view id);
    [[nodiscard]] std::optional<UserIndex> find(std::string_view id) const;
    [[nodiscard]] const std::string& name(UserIndex u) const { return names_.at(u); }
    [[nodiscard]] std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, UserIndex> index_;
};

struct Edge {
    UserIndex follower = kNoUser;
    UserIndex followee = kNoUser;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// One lifetime of a follower edge: live for keys in [start, end).
struct EdgeInterval {
    UserIndex follower = kNoUser;
    EventKey start = EventKey::min();
    EventKey end = EventKey::max();

    [[nodiscard]] bool live_at(EventKey k) const {
        // an open interval (end == max) stays live even at the largest probe key
        return start <= k && (k < end || end == EventKey::max());
    }
};

struct HourlySeries {
    UserIndex user = kNoUser;
    SeriesKind kind = SeriesKind::IncomingFollows;
    std::vector<double> x;
    Timestamp t0 = 0;
};

enum class InconsistencyPolicy { Reject, Skip };

struct IngestOptions {
    InconsistencyPolicy policy = InconsistencyPolicy::Reject;
    /// Observation window; derived from the event timestamps (hour-aligned) when absent.
    std::optional<Timestamp> window_start;
    std::optional<Timestamp> window_end;
};

struct IngestReport {
    std::size_t initial_edges = 0;
    std::array<std::size_t, 4> kind_counts{};  // indexed by EventKind
    std::size_t skipped = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t count(EventKind k) const { return kind_counts[static_cast<std::size_t>(k)]; }
};

/// Immutable follower graph with its full event history. Every query is a pure function
/// of the ingested data and is safe to call concurrently.
class TemporalGraph {
public:
    TemporalGraph() = default;

    /// Validates and indexes in-memory data. `source` and `lines` only decorate diagnostics.
    static TemporalGraph build(UserTable users, std::vector<Edge> initial_edges, std::vector<Event> events,
                               const IngestOptions& options = {}, IngestReport* report = nullptr,
                               const std::string& source = "<events>", std::span<const std::size_t> lines = {});

    [[nodiscard]] const UserTable& users() const { return users_; }
    [[nodiscard]] std::size_t user_count() const { return users_.size(); }
    [[nodiscard]] const Window& window() const { return window_; }
    [[nodiscard]] const std::vector<Event>& events() const { return events_; }
    [[nodiscard]] const std::vector<Edge>& initial_edges() const { return initial_edges_; }

    /// Live in-edges of `u` after applying every event with key <= k.
    [[nodiscard]] std::vector<UserIndex> followers_at(UserIndex u, EventKey k) const;
    /// Live in-edges of `u` after applying every event stamped at or before `t`.
    [[nodiscard]] std::vector<UserIndex> followers_at(UserIndex u, Timestamp t) const {
        return followers_at(u, EventKey::at_end_of(t));
    }
    [[nodiscard]] std::size_t follower_count_at(UserIndex u, Timestamp t) const;
    [[nodiscard]] bool follows_at(UserIndex follower, UserIndex followee, EventKey k) const;

    /// Followers of followers of `u` at `t`, minus the followers themselves and `u`.
    [[nodiscard]] std::vector<UserIndex> two_hop_at(UserIndex u, Timestamp t) const;

    [[nodiscard]] std::span<const EdgeInterval> in_intervals(UserIndex u) const;

    /// Indices into events() counted by the (user, kind) series, in log order.
    [[nodiscard]] std::span<const std::uint32_t> series_events(UserIndex u, SeriesKind kind) const;

    [[nodiscard]] HourlySeries hourly_series(UserIndex u, SeriesKind kind) const;

    /// Tweet event index by tweet id, if the id appears on a Tweet event.
    [[nodiscard]] std::optional<std::uint32_t> find_tweet(std::string_view tweet_id) const;

private:
    UserTable users_;
    Window window_;
    std::vector<Edge> initial_edges_;
    std::vector<Event> events_;
    std::vector<std::vector<EdgeInterval>> in_intervals_;
    std::array<std::vector<std::vector<std::uint32_t>>, 4> series_;
    std::unordered_map<std::string, std::uint32_t> tweets_by_id_;
};

struct IngestResult {
    TemporalGraph graph;
    IngestReport report;
};

/// Snapshot: `follower_id,followee_id` per line. Event log: JSON lines.
IngestResult ingest(const std::filesystem::path& snapshot_path, const std::filesystem::path& events_path,
                    const IngestOptions& options = {});
IngestResult ingest(std::istream& snapshot, std::istream& events, const IngestOptions& options = {},
                    const std::string& snapshot_name = "<snapshot>", const std::string& events_name = "<events>");

void write_snapshot(std::ostream& out, const UserTable& users, std::span<const Edge> edges);
void write_event_line(std::ostream& out, const UserTable& users, const Event& e);
void write_events(std::ostream& out, const UserTable& users, std::span<const Event> events);

/// JSON string literal with escaping, for hand-written JSON lines.
std::string json_quote(std::string_view s);

}  // namespace burstnet
