#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace burstnet {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Dense index assigned to a user id at ingest (see UserTable).
using UserIndex = std::uint32_t;

inline constexpr UserIndex kNoUser = std::numeric_limits<UserIndex>::max();
inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr int kHoursPerDay = 24;

/// Total order over the log: timestamp first, explicit sequence number second.
struct EventKey {
    Timestamp ts = 0;
    std::int64_t seq = 0;

    friend constexpr auto operator<=>(const EventKey&, const EventKey&) = default;

    static constexpr EventKey min() { return {std::numeric_limits<Timestamp>::min(), 0}; }
    static constexpr EventKey max() {
        return {std::numeric_limits<Timestamp>::max(), std::numeric_limits<std::int64_t>::max()};
    }
    /// Key that sorts after every event stamped at or before `t`.
    static constexpr EventKey at_end_of(Timestamp t) {
        return {t, std::numeric_limits<std::int64_t>::max()};
    }
};

/// Half-open observation window [start, end).
struct Window {
    Timestamp start = 0;
    Timestamp end = 0;

    [[nodiscard]] bool contains(Timestamp t) const { return t >= start && t < end; }
    [[nodiscard]] int hours() const {
        return static_cast<int>((end - start + kSecondsPerHour - 1) / kSecondsPerHour);
    }
    [[nodiscard]] int hour_of(Timestamp t) const {
        return static_cast<int>((t - start) / kSecondsPerHour);
    }
    [[nodiscard]] Timestamp hour_start(int hour) const {
        return start + static_cast<Timestamp>(hour) * kSecondsPerHour;
    }
};

/// Malformed or inconsistent input data. Carries the file and line when known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
    DataError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    [[nodiscard]] const std::string& file() const { return file_; }
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_ = 0;
};

/// A quantity that cannot be computed on the given input (too few samples, zero variance, ...).
class UndefinedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace burstnet
