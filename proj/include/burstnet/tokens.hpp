#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace burstnet {

/// 2x2 table over burst-triggering tweets:
///   a = token present, follow burst    b = token present, no follow burst
///   c = token absent,  follow burst    d = token absent,  no follow burst
struct TokenStat {
    std::string token;
    std::uint64_t a = 0, b = 0, c = 0, d = 0;
    double chi2 = 0.0;
    double ratio = 0.0;

    [[nodiscard]] std::uint64_t support() const { return a + b; }
};

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

/// Pearson statistic without continuity correction; 0 when any margin is empty.
double chi_square(double a, double b, double c, double d);

/// P(burst | present) / P(burst | absent); kInfiniteRatio when the absent rate is 0.
double burst_ratio(double a, double b, double c, double d);

/// Upper critical value of chi-square with one degree of freedom (3.841... at 0.95).
double chi2_critical(double confidence);

/// One retweet burst: the distinct tokens of its triggering tweet and its label.
struct TokenBurst {
    std::vector<std::string> tokens;
    bool follow_burst = false;
};

struct TokenOptions {
    std::uint64_t min_support = 10;
    double confidence = 0.95;
};

/// Tokens with support >= min_support and chi2 above the critical value, by R descending
/// (ties by chi2 descending, then token).
std::vector<TokenStat> token_analysis(std::span<const TokenBurst> bursts, const TokenOptions& options = {});

}  // namespace burstnet
