#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "burstnet/event_store.hpp"

namespace burstnet {

using TokenId = std::uint32_t;

/// Whitespace split; trims punctuation (keeping leading # and @); drops http* URLs.
/// All-caps words of up to five characters keep their case, everything else is lowercased.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
public:
    TokenId intern(std::string_view token);
    [[nodiscard]] std::optional<TokenId> find(std::string_view token) const;
    [[nodiscard]] const std::string& token(TokenId id) const { return tokens_.at(id); }
    [[nodiscard]] std::size_t size() const { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

struct UserDocument {
    UserIndex user = kNoUser;
    std::vector<std::pair<TokenId, std::uint32_t>> token_counts;  // sorted by token id

    [[nodiscard]] bool empty() const { return token_counts.empty(); }
};

struct TfIdfVector {
    std::vector<std::pair<TokenId, double>> weights;  // sorted by token id, zero weights omitted
    double norm = 0.0;
    bool empty_document = false;

    [[nodiscard]] bool is_zero() const { return norm == 0.0; }
};

/// Aggregates each user's authored tweets (optionally retweet texts too) into one document.
std::vector<UserDocument> build_documents(const TemporalGraph& g, Vocabulary& vocab, bool include_retweets = false);

/// tf = raw count, idf = ln(N / df) with N the number of non-empty documents.
std::vector<TfIdfVector> tfidf(std::span<const UserDocument> corpus);

double cosine(const TfIdfVector& a, const TfIdfVector& b);

/// Dense copy of one vector for repeated dot products against sparse vectors.
class DenseQuery {
public:
    DenseQuery(const TfIdfVector& v, std::size_t vocab_size);
    [[nodiscard]] double cosine(const TfIdfVector& other) const;

private:
    std::vector<double> dense_;
    double norm_ = 0.0;
};

/// TF-IDF vectors for every user of a graph (indexed by UserIndex).
struct UserVectors {
    Vocabulary vocab;
    std::vector<TfIdfVector> vectors;

    [[nodiscard]] const TfIdfVector& of(UserIndex u) const;
    [[nodiscard]] double similarity(UserIndex a, UserIndex b) const { return cosine(of(a), of(b)); }
};

UserVectors build_user_vectors(const TemporalGraph& g, bool include_retweets = false);

/// Sparse text cache: `user<TAB>token:weight,token:weight,...`; `%`, `,`, `:` and tab
/// inside tokens are percent-encoded.
void write_vectors(std::ostream& out, const TemporalGraph& g, const UserVectors& vectors);
/// Reads a cache written by write_vectors. Users absent from the cache get zero vectors.
UserVectors read_vectors(std::istream& in, const TemporalGraph& g, const std::string& name = "<vectors>");

/// Log-similarity moments of a user's followers.
struct SimilarityStats {
    UserIndex user = kNoUser;
    double mu = 0.0;
    double sigma = 0.0;
    std::size_t n_followers = 0;  // followers with S > 0 used in the moments
    std::size_t n_zero = 0;       // followers excluded because S == 0
    bool defined = false;         // n_followers >= 2
    bool degenerate = false;      // defined but sigma == 0

    [[nodiscard]] bool usable() const { return defined && !degenerate; }
};

/// Population moments of ln S over the positive entries of `sims`.
SimilarityStats similarity_stats_from(std::span<const double> sims);

SimilarityStats similarity_stats(const TemporalGraph& g, UserIndex i, Timestamp t, const UserVectors& vectors);

/// (ln S - mu) / sigma, or nullopt when S == 0 or the stats are unusable.
std::optional<double> y_score(double similarity, const SimilarityStats& stats);

}  // namespace burstnet
