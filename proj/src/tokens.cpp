#include "burstnet/tokens.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace burstnet {

double chi_square(double a, double b, double c, double d) {
    const double n = a + b + c + d;
    const double denom = (a + b) * (c + d) * (a + c) * (b + d);
    if (denom == 0.0) {
        return 0.0;
    }
    const double diff = a * d - b * c;
    return n * diff * diff / denom;
}

double burst_ratio(double a, double b, double c, double d) {
    const double present = a + b > 0.0 ? a / (a + b) : 0.0;
    const double absent = c + d > 0.0 ? c / (c + d) : 0.0;
    if (absent == 0.0) {
        return present > 0.0 ? kInfiniteRatio : 0.0;
    }
    return present / absent;
}

double chi2_critical(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("confidence must lie in (0, 1)");
    }
    // chi2(1) upper quantile is z^2 with P(|Z| > z) = 1 - confidence
    double lo = 0.0;
    double hi = 40.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > 1.0 - confidence) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double z = 0.5 * (lo + hi);
    return z * z;
}

std::vector<TokenStat> token_analysis(std::span<const TokenBurst> bursts, const TokenOptions& options) {
    std::uint64_t total_pos = 0;
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> present;  // token -> (a, b)
    for (const auto& tb : bursts) {
        total_pos += tb.follow_burst;
        auto toks = tb.tokens;
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (const auto& t : toks) {
            auto& cell = present[t];
            (tb.follow_burst ? cell.first : cell.second) += 1;
        }
    }
    const std::uint64_t total_neg = bursts.size() - total_pos;
    const double critical = chi2_critical(options.confidence);
    std::vector<TokenStat> out;
    for (const auto& [token, cell] : present) {
        TokenStat s;
        s.token = token;
        s.a = cell.first;
        s.b = cell.second;
        s.c = total_pos - s.a;
        s.d = total_neg - s.b;
        if (s.support() < options.min_support) {
            continue;
        }
        s.chi2 = chi_square(s.a, s.b, s.c, s.d);
        if (!(s.chi2 > critical)) {
            continue;
        }
        s.ratio = burst_ratio(s.a, s.b, s.c, s.d);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const TokenStat& x, const TokenStat& y) {
        if (x.ratio != y.ratio) {
            return x.ratio > y.ratio;
        }
        if (x.chi2 != y.chi2) {
            return x.chi2 > y.chi2;
        }
        return x.token < y.token;
    });
    return out;
}

}  // namespace burstnet
