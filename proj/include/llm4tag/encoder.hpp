#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace llm4tag {

/// Dense text embedding. Construction rejects empty, non-finite and
/// all-zero vectors, so cosine similarity is always defined.
class Embedding {
public:
    Embedding() = default;
    explicit Embedding(std::vector<double> values);

    [[nodiscard]] std::size_t dim() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double norm() const noexcept { return norm_; }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    friend bool operator==(const Embedding& a, const Embedding& b) { return a.values_ == b.values_; }

private:
    std::vector<double> values_;
    double norm_ = 0.0;
};

/// Cosine similarity clamped to [-1, 1]. Throws InvalidInput on a
/// dimension mismatch. Symmetric bit-for-bit.
double cosine(const Embedding& u, const Embedding& v);

class EncoderBackend {
public:
    virtual ~EncoderBackend() = default;

    /// Throws InvalidInput for blank text, BackendUnavailable on transport errors.
    [[nodiscard]] Embedding embed(std::string_view text) const;

    [[nodiscard]] virtual std::size_t dim() const noexcept = 0;
    [[nodiscard]] virtual std::string identity() const = 0;

protected:
    virtual Embedding do_embed(const std::string& trimmed) const = 0;
};

/// Offline reference encoder: signed character-trigram feature hashing.
///
///   1. text is ASCII-lowercased, whitespace runs collapsed, trimmed;
///   2. padded as " " + text + " ";
///   3. every 3-byte window w is hashed with 64-bit FNV-1a whose offset
///      basis is XORed with kSeed;
///   4. bucket = h % dim, sign = +1 if bit 32 of h is clear else -1;
///   5. the bucket counts are L2-normalized.
///
/// Text whose signed counts cancel to zero is rejected as InvalidInput.
class HashingEncoder final : public EncoderBackend {
public:
    static constexpr std::uint64_t kSeed = 0x9E3779B97F4A7C15ULL;
    static constexpr std::size_t kDefaultDim = 256;

    explicit HashingEncoder(std::size_t dim = kDefaultDim);

    [[nodiscard]] std::size_t dim() const noexcept override { return dim_; }
    [[nodiscard]] std::string identity() const override;

protected:
    Embedding do_embed(const std::string& trimmed) const override;

private:
    std::size_t dim_;
};

/// Fixed text -> vector table, for planted-geometry fixtures. Lookups use
/// the trimmed text; misses go to the fallback encoder or fail InvalidInput.
class TableEncoder final : public EncoderBackend {
public:
    TableEncoder(std::size_t dim, std::shared_ptr<const EncoderBackend> fallback = nullptr);

    void set(std::string text, Embedding embedding);

    [[nodiscard]] std::size_t dim() const noexcept override { return dim_; }
    [[nodiscard]] std::string identity() const override { return "table/1"; }

protected:
    Embedding do_embed(const std::string& trimmed) const override;

private:
    std::size_t dim_;
    std::shared_ptr<const EncoderBackend> fallback_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Embedding> table_;
};

struct HttpEndpoint {
    std::string url;  ///< e.g. http://127.0.0.1:8080/v1/embeddings
    std::string token;
    int timeout_seconds = 30;
    std::size_t max_in_flight = 8;
};

/// Remote embedding service: POST {"input": [text]} ->
/// {"data": [{"embedding": [...]}]}.
class HttpEncoder final : public EncoderBackend {
public:
    HttpEncoder(HttpEndpoint endpoint, std::size_t dim);

    [[nodiscard]] std::size_t dim() const noexcept override { return dim_; }
    [[nodiscard]] std::string identity() const override { return "http/1 " + endpoint_.url; }

    /// One request for many texts.
    [[nodiscard]] std::vector<Embedding> embed_batch(std::span<const std::string> texts) const;

protected:
    Embedding do_embed(const std::string& trimmed) const override;

private:
    HttpEndpoint endpoint_;
    std::size_t dim_;
    mutable std::counting_semaphore<1024> in_flight_;
};

}  // namespace llm4tag
