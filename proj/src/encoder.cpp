#include "polar/encoder.hpp"

#include "polar/error.hpp"
#include "polar/http.hpp"
#include "polar/io.hpp"
#include "polar/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace polar {

namespace {

constexpr std::uint64_t kPrime1 = 0x9E3779B185EBCA87ULL;
constexpr std::uint64_t kPrime2 = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kPrime3 = 0x165667B19E3779F9ULL;
constexpr std::uint64_t kPrime4 = 0x85EBCA77C2B2AE63ULL;
constexpr std::uint64_t kPrime5 = 0x27D4EB2F165667C5ULL;

std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

std::uint64_t read64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint32_t read32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t round64(std::uint64_t acc, std::uint64_t input) {
    acc += input * kPrime2;
    acc = rotl(acc, 31);
    return acc * kPrime1;
}

std::uint64_t merge_round(std::uint64_t acc, std::uint64_t val) {
    acc ^= round64(0, val);
    return acc * kPrime1 + kPrime4;
}

Embedding normalized(std::vector<double> acc) {
    const double n = l2_norm(acc);
    if (n > 0.0) {
        for (auto& v : acc) v /= n;
    }
    return Embedding{std::move(acc)};
}

Embedding encode_builtin(const EncoderConfig& config, std::string_view text) {
    std::vector<double> acc(config.dimension, 0.0);
    if (text.empty()) return Embedding{std::move(acc)};

    const std::string lower = to_lower(text);
    const std::size_t n = std::min(config.ngram, lower.size());
    std::vector<std::uint64_t> hashes;
    hashes.reserve(lower.size() - n + 1);
    for (std::size_t i = 0; i + n <= lower.size(); ++i) {
        hashes.push_back(xxhash64(std::string_view(lower).substr(i, n), 0));
    }
    for (auto h : hashes) {
        const double sign = (h >> 63) ? -1.0 : 1.0;
        acc[h % config.dimension] += sign;
    }
    if (l2_norm(acc) == 0.0) {
        for (auto h : hashes) acc[h % config.dimension] += 1.0;
    }
    return normalized(std::move(acc));
}

std::vector<Embedding> encode_remote(const EncoderConfig& config,
                                     std::span<const std::string> texts) {
    Json body = {{"texts", Json::array()}};
    for (const auto& t : texts) body["texts"].push_back(t);
    auto res = post_json(config.endpoint, body.dump(), config.timeout);
    if (!res) throw EncoderUnavailable("encoder endpoint unreachable or timed out: " + config.endpoint);
    if (res->status < 200 || res->status >= 300) {
        throw EncoderUnavailable("encoder returned HTTP " + std::to_string(res->status));
    }
    std::vector<Embedding> out;
    try {
        const auto doc = Json::parse(res->body);
        const auto& rows = doc.at("embeddings");
        if (!rows.is_array() || rows.size() != texts.size()) {
            throw EncoderUnavailable("encoder returned wrong number of embeddings");
        }
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != config.dimension) {
                throw EncoderUnavailable("encoder returned embedding of wrong dimension");
            }
            std::vector<double> v;
            v.reserve(row.size());
            for (const auto& x : row) v.push_back(x.get<double>());
            out.push_back(normalized(std::move(v)));
        }
    } catch (const Json::exception& e) {
        throw EncoderUnavailable(std::string("malformed encoder response: ") + e.what());
    }
    return out;
}

}  // namespace

bool Embedding::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

void EncoderConfig::validate() const {
    if (dimension < 16) throw RejectedInput("encoder dimension must be >= 16");
    if (ngram < 2) throw RejectedInput("encoder n-gram size must be >= 2");
    if (mode == EncoderMode::remote && endpoint.empty()) {
        throw RejectedInput("remote encoder requires an endpoint");
    }
}

std::uint64_t xxhash64(std::string_view data, std::uint64_t seed) {
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const auto* const end = p + data.size();
    std::uint64_t h;

    if (data.size() >= 32) {
        std::uint64_t v1 = seed + kPrime1 + kPrime2;
        std::uint64_t v2 = seed + kPrime2;
        std::uint64_t v3 = seed;
        std::uint64_t v4 = seed - kPrime1;
        const auto* const limit = end - 32;
        do {
            v1 = round64(v1, read64(p));
            v2 = round64(v2, read64(p + 8));
            v3 = round64(v3, read64(p + 16));
            v4 = round64(v4, read64(p + 24));
            p += 32;
        } while (p <= limit);
        h = rotl(v1, 1) + rotl(v2, 7) + rotl(v3, 12) + rotl(v4, 18);
        h = merge_round(h, v1);
        h = merge_round(h, v2);
        h = merge_round(h, v3);
        h = merge_round(h, v4);
    } else {
        h = seed + kPrime5;
    }
    h += static_cast<std::uint64_t>(data.size());

    while (p + 8 <= end) {
        h ^= round64(0, read64(p));
        h = rotl(h, 27) * kPrime1 + kPrime4;
        p += 8;
    }
    if (p + 4 <= end) {
        h ^= static_cast<std::uint64_t>(read32(p)) * kPrime1;
        h = rotl(h, 23) * kPrime2 + kPrime3;
        p += 4;
    }
    while (p < end) {
        h ^= static_cast<std::uint64_t>(*p) * kPrime5;
        h = rotl(h, 11) * kPrime1;
        ++p;
    }
    h ^= h >> 33;
    h *= kPrime2;
    h ^= h >> 29;
    h *= kPrime3;
    h ^= h >> 32;
    return h;
}

Embedding encode(const EncoderConfig& config, std::string_view text) {
    config.validate();
    if (config.mode == EncoderMode::remote) {
        const std::string t(text);
        return encode_remote(config, std::span<const std::string>(&t, 1)).front();
    }
    return encode_builtin(config, text);
}

std::vector<Embedding> encode_batch(const EncoderConfig& config,
                                    std::span<const std::string> texts) {
    config.validate();
    if (config.mode == EncoderMode::remote) return encode_remote(config, texts);
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(encode_builtin(config, t));
    return out;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

bool is_unit(std::span<const double> v, double tol) {
    return std::fabs(l2_norm(v) - 1.0) <= tol;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw RejectedInput("cosine of vectors with different dimensions (" +
                            std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double cosine(const Embedding& a, const Embedding& b) {
    return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace polar
