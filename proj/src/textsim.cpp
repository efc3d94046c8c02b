#include "burstnet/textsim.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace burstnet {

namespace {

bool is_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_http(std::string_view s) {
    if (s.size() < 4) {
        return false;
    }
    return std::tolower(static_cast<unsigned char>(s[0])) == 'h' && std::tolower(static_cast<unsigned char>(s[1])) == 't' &&
           std::tolower(static_cast<unsigned char>(s[2])) == 't' && std::tolower(static_cast<unsigned char>(s[3])) == 'p';
}

std::string encode_token(std::string_view t) {
    std::string out;
    for (char c : t) {
        if (c == '%' || c == ',' || c == ':' || c == '\t' || c == '\n') {
            static const char* hex = "0123456789ABCDEF";
            out.push_back('%');
            out.push_back(hex[(static_cast<unsigned char>(c) >> 4) & 0xf]);
            out.push_back(hex[static_cast<unsigned char>(c) & 0xf]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string decode_token(std::string_view t, const std::string& name, std::size_t lineno) {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] != '%') {
            out.push_back(t[i]);
            continue;
        }
        if (i + 2 >= t.size()) {
            throw DataError(name, lineno, "truncated percent escape");
        }
        unsigned value = 0;
        const auto* first = t.data() + i + 1;
        auto [ptr, ec] = std::from_chars(first, first + 2, value, 16);
        if (ec != std::errc() || ptr != first + 2) {
            throw DataError(name, lineno, "bad percent escape");
        }
        out.push_back(static_cast<char>(value));
        i += 2;
    }
    return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) {
            ++j;
        }
        std::string_view raw = text.substr(i, j - i);
        i = j;
        while (!raw.empty() && is_punct(raw.front()) && raw.front() != '#' && raw.front() != '@') {
            raw.remove_prefix(1);
        }
        if (raw.empty() || starts_with_http(raw)) {
            continue;
        }
        while (!raw.empty() && is_punct(raw.back())) {
            raw.remove_suffix(1);
        }
        const bool prefixed = !raw.empty() && (raw.front() == '#' || raw.front() == '@');
        if (raw.empty() || (prefixed && raw.size() == 1)) {
            continue;
        }
        bool has_letter = false;
        bool all_caps = true;
        for (char c : raw) {
            const auto uc = static_cast<unsigned char>(c);
            if (std::isalpha(uc)) {
                has_letter = true;
                if (std::islower(uc)) {
                    all_caps = false;
                }
            }
        }
        std::string token(raw);
        const bool keep_case = !prefixed && has_letter && all_caps && raw.size() <= 5;
        if (!keep_case) {
            for (auto& c : token) {
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
        }
        out.push_back(std::move(token));
    }
    return out;
}

TokenId Vocabulary::intern(std::string_view token) {
    if (auto it = index_.find(std::string(token)); it != index_.end()) {
        return it->second;
    }
    const auto id = static_cast<TokenId>(tokens_.size());
    tokens_.emplace_back(token);
    index_.emplace(tokens_.back(), id);
    return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
    if (auto it = index_.find(std::string(token)); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::vector<UserDocument> build_documents(const TemporalGraph& g, Vocabulary& vocab, bool include_retweets) {
    const auto n = g.user_count();
    std::vector<std::vector<TokenId>> raw(n);
    for (const auto& ev : g.events()) {
        if (ev.kind == EventKind::Tweet || (include_retweets && ev.kind == EventKind::Retweet)) {
            for (const auto& tok : tokenize(ev.text)) {
                raw[ev.actor].push_back(vocab.intern(tok));
            }
        }
    }
    std::vector<UserDocument> docs(n);
    for (std::size_t u = 0; u < n; ++u) {
        docs[u].user = static_cast<UserIndex>(u);
        auto& ids = raw[u];
        std::sort(ids.begin(), ids.end());
        for (std::size_t k = 0; k < ids.size();) {
            std::size_t m = k;
            while (m < ids.size() && ids[m] == ids[k]) {
                ++m;
            }
            docs[u].token_counts.emplace_back(ids[k], static_cast<std::uint32_t>(m - k));
            k = m;
        }
    }
    return docs;
}

std::vector<TfIdfVector> tfidf(std::span<const UserDocument> corpus) {
    if (corpus.size() < 2) {
        throw std::invalid_argument("tfidf needs at least two documents");
    }
    std::unordered_map<TokenId, std::size_t> df;
    std::size_t n_docs = 0;
    for (const auto& d : corpus) {
        if (d.empty()) {
            continue;
        }
        ++n_docs;
        for (const auto& [tok, count] : d.token_counts) {
            (void)count;
            ++df[tok];
        }
    }
    std::vector<TfIdfVector> out(corpus.size());
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        const auto& d = corpus[k];
        auto& v = out[k];
        v.empty_document = d.empty();
        double ss = 0.0;
        for (const auto& [tok, count] : d.token_counts) {
            const std::size_t f = df.at(tok);
            if (f >= n_docs) {
                continue;
            }
            const double w = static_cast<double>(count) * std::log(static_cast<double>(n_docs) / static_cast<double>(f));
            v.weights.emplace_back(tok, w);
            ss += w * w;
        }
        v.norm = std::sqrt(ss);
    }
    return out;
}

double cosine(const TfIdfVector& a, const TfIdfVector& b) {
    if (a.norm == 0.0 || b.norm == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    auto ia = a.weights.begin();
    auto ib = b.weights.begin();
    while (ia != a.weights.end() && ib != b.weights.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return std::clamp(dot / (a.norm * b.norm), 0.0, 1.0);
}

DenseQuery::DenseQuery(const TfIdfVector& v, std::size_t vocab_size) : dense_(vocab_size, 0.0), norm_(v.norm) {
    for (const auto& [tok, w] : v.weights) {
        if (tok >= dense_.size()) {
            dense_.resize(tok + 1, 0.0);
        }
        dense_[tok] = w;
    }
}

double DenseQuery::cosine(const TfIdfVector& other) const {
    if (norm_ == 0.0 || other.norm == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    for (const auto& [tok, w] : other.weights) {
        if (tok < dense_.size()) {
            dot += dense_[tok] * w;
        }
    }
    return std::clamp(dot / (norm_ * other.norm), 0.0, 1.0);
}

const TfIdfVector& UserVectors::of(UserIndex u) const {
    static const TfIdfVector kZero{};
    return u < vectors.size() ? vectors[u] : kZero;
}

UserVectors build_user_vectors(const TemporalGraph& g, bool include_retweets) {
    UserVectors uv;
    const auto docs = build_documents(g, uv.vocab, include_retweets);
    if (docs.size() >= 2) {
        uv.vectors = tfidf(docs);
    } else {
        uv.vectors.assign(docs.size(), TfIdfVector{{}, 0.0, true});
    }
    return uv;
}

void write_vectors(std::ostream& out, const TemporalGraph& g, const UserVectors& vectors) {
    char buf[64];
    for (std::size_t u = 0; u < vectors.vectors.size(); ++u) {
        out << g.users().name(static_cast<UserIndex>(u)) << '\t';
        bool first = true;
        for (const auto& [tok, w] : vectors.vectors[u].weights) {
            if (!first) {
                out << ',';
            }
            first = false;
            auto res = std::to_chars(buf, buf + sizeof buf, w);
            out << encode_token(vectors.vocab.token(tok)) << ':' << std::string_view(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

UserVectors read_vectors(std::istream& in, const TemporalGraph& g, const std::string& name) {
    UserVectors uv;
    uv.vectors.assign(g.user_count(), TfIdfVector{});
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError(name, lineno, "expected user<TAB>token:weight,...");
        }
        const auto user = g.users().find(std::string_view(line).substr(0, tab));
        if (!user) {
            throw DataError(name, lineno, "unknown user '" + line.substr(0, tab) + "'");
        }
        std::map<TokenId, double> weights;
        std::string_view rest = std::string_view(line).substr(tab + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto colon = item.rfind(':');
            if (colon == std::string_view::npos) {
                throw DataError(name, lineno, "expected token:weight");
            }
            double w = 0.0;
            const auto num = item.substr(colon + 1);
            auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), w);
            if (ec != std::errc() || ptr != num.data() + num.size()) {
                throw DataError(name, lineno, "bad weight");
            }
            weights[uv.vocab.intern(decode_token(item.substr(0, colon), name, lineno))] = w;
        }
        auto& v = uv.vectors[*user];
        v.weights.assign(weights.begin(), weights.end());
        double ss = 0.0;
        for (const auto& [tok, w] : v.weights) {
            (void)tok;
            ss += w * w;
        }
        v.norm = std::sqrt(ss);
        v.empty_document = v.weights.empty();
    }
    return uv;
}

SimilarityStats similarity_stats_from(std::span<const double> sims) {
    SimilarityStats st;
    double sum = 0.0;
    for (double s : sims) {
        if (s > 0.0) {
            sum += std::log(s);
            ++st.n_followers;
        } else {
            ++st.n_zero;
        }
    }
    if (st.n_followers < 2) {
        return st;
    }
    st.defined = true;
    const double n = static_cast<double>(st.n_followers);
    st.mu = sum / n;
    double ss = 0.0;
    for (double s : sims) {
        if (s > 0.0) {
            const double d = std::log(s) - st.mu;
            ss += d * d;
        }
    }
    st.sigma = std::sqrt(ss / n);
    // identical similarities leave only rounding noise in sigma
    st.degenerate = st.sigma <= 1e-12 * std::max(1.0, std::abs(st.mu));
    if (st.degenerate) {
        st.sigma = 0.0;
    }
    return st;
}

SimilarityStats similarity_stats(const TemporalGraph& g, UserIndex i, Timestamp t, const UserVectors& vectors) {
    const auto followers = g.followers_at(i, t);
    std::vector<double> sims;
    sims.reserve(followers.size());
    const auto& center = vectors.of(i);
    for (auto k : followers) {
        sims.push_back(cosine(center, vectors.of(k)));
    }
    auto st = similarity_stats_from(sims);
    st.user = i;
    return st;
}

std::optional<double> y_score(double similarity, const SimilarityStats& stats) {
    if (!stats.usable() || !(similarity > 0.0)) {
        return std::nullopt;
    }
    return (std::log(similarity) - stats.mu) / stats.sigma;
}

}  // namespace burstnet
