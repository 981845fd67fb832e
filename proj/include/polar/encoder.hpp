#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polar {

// Text embedding. Unit-norm for non-empty text, all zeros for empty text.
struct Embedding {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool is_zero() const;

    friend bool operator==(const Embedding&, const Embedding&) = default;
};

enum class EncoderMode { builtin, remote };

struct EncoderConfig {
    EncoderMode mode = EncoderMode::builtin;
    std::size_t dimension = 256;
    std::size_t ngram = 3;
    std::string endpoint;  // remote mode, e.g. "http://127.0.0.1:8080/embed"
    std::chrono::milliseconds timeout{5000};

    void validate() const;
};

// XXH64 with the reference algorithm. The builtin encoder hashes every
// character n-gram with seed 0; bucket = hash mod D, sign = -1 when the top
// bit of the hash is set.
std::uint64_t xxhash64(std::string_view data, std::uint64_t seed = 0);

// Builtin mode: lowercase, hash character n-grams into D signed buckets,
// L2-normalize. A non-empty text shorter than n is hashed as one gram. If
// the signed sum cancels to zero, buckets are re-accumulated unsigned so the
// result stays unit-norm. Remote mode posts {"texts": [...]} to the endpoint
// and expects {"embeddings": [[...], ...]} in input order.
Embedding encode(const EncoderConfig& config, std::string_view text);
std::vector<Embedding> encode_batch(const EncoderConfig& config,
                                    std::span<const std::string> texts);

double l2_norm(std::span<const double> v);
bool is_unit(std::span<const double> v, double tol = 1e-6);

// Cosine similarity, clamped to [-1, 1]; 0 when either side is zero.
// Throws RejectedInput on a dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const Embedding& a, const Embedding& b);

}  // namespace polar
