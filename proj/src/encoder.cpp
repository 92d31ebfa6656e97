#include "llm4tag/encoder.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "http_util.hpp"
#include "llm4tag/error.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) fail(ErrorCode::InvalidInput, "embedding must have positive dimension");
    double sq = 0.0;
    for (double x : values_) {
        if (!std::isfinite(x)) fail(ErrorCode::InvalidInput, "embedding entries must be finite");
        sq += x * x;
    }
    if (sq == 0.0) fail(ErrorCode::InvalidInput, "zero embedding");
    norm_ = std::sqrt(sq);
}

double cosine(const Embedding& u, const Embedding& v) {
    if (u.dim() != v.dim())
        fail(ErrorCode::InvalidInput,
             "dimension mismatch: " + std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
    const auto a = u.values();
    const auto b = v.values();
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::clamp(dot / (u.norm() * v.norm()), -1.0, 1.0);
}

Embedding EncoderBackend::embed(std::string_view text) const {
    std::string t = trim(text);
    if (t.empty()) fail(ErrorCode::InvalidInput, "cannot embed empty text");
    Embedding e = do_embed(t);
    if (e.dim() != dim())
        fail(ErrorCode::InvalidInput, identity() + " returned dimension " + std::to_string(e.dim()) +
                                          ", expected " + std::to_string(dim()));
    return e;
}

HashingEncoder::HashingEncoder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) fail(ErrorCode::InvalidInput, "encoder dimension must be positive");
}

std::string HashingEncoder::identity() const { return "trigram-hash/1 dim=" + std::to_string(dim_); }

Embedding HashingEncoder::do_embed(const std::string& trimmed) const {
    const std::string padded = " " + normalize_text(trimmed) + " ";
    std::vector<double> counts(dim_, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        const std::uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3), kFnvOffsetBasis ^ kSeed);
        const double sign = ((h >> 32) & 1U) ? -1.0 : 1.0;
        counts[h % dim_] += sign;
    }
    double sq = 0.0;
    for (double x : counts) sq += x * x;
    if (sq == 0.0) fail(ErrorCode::InvalidInput, "text hashes to a zero vector: '" + trimmed + "'");
    const double n = std::sqrt(sq);
    for (double& x : counts) x /= n;
    return Embedding(std::move(counts));
}

TableEncoder::TableEncoder(std::size_t dim, std::shared_ptr<const EncoderBackend> fallback)
    : dim_(dim), fallback_(std::move(fallback)) {
    if (dim_ == 0) fail(ErrorCode::InvalidInput, "encoder dimension must be positive");
    if (fallback_ && fallback_->dim() != dim_)
        fail(ErrorCode::InvalidInput, "fallback encoder dimension mismatch");
}

void TableEncoder::set(std::string text, Embedding embedding) {
    if (embedding.dim() != dim_) fail(ErrorCode::InvalidInput, "table embedding dimension mismatch");
    std::lock_guard lock(mutex_);
    table_.insert_or_assign(trim(text), std::move(embedding));
}

Embedding TableEncoder::do_embed(const std::string& trimmed) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = table_.find(trimmed); it != table_.end()) return it->second;
    }
    if (fallback_) return fallback_->embed(trimmed);
    fail(ErrorCode::InvalidInput, "no table entry for '" + trimmed + "'");
}

HttpEncoder::HttpEncoder(HttpEndpoint endpoint, std::size_t dim)
    : endpoint_(std::move(endpoint)),
      dim_(dim),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(endpoint_.max_in_flight, 1, 1024))) {
    if (dim_ == 0) fail(ErrorCode::InvalidInput, "encoder dimension must be positive");
    detail::split_url(endpoint_.url);
}

std::vector<Embedding> HttpEncoder::embed_batch(std::span<const std::string> texts) const {
    nlohmann::json body = {{"input", nlohmann::json::array()}};
    for (const auto& t : texts) {
        std::string trimmed = trim(t);
        if (trimmed.empty()) fail(ErrorCode::InvalidInput, "cannot embed empty text");
        body["input"].push_back(std::move(trimmed));
    }
    nlohmann::json reply;
    {
        detail::SemaphoreGuard guard(in_flight_);
        reply = detail::post_json(endpoint_.url, endpoint_.token, endpoint_.timeout_seconds, body);
    }
    try {
        const auto& data = reply.at("data");
        if (!data.is_array() || data.size() != texts.size())
            fail(ErrorCode::ParseError, "embedding reply has " + std::to_string(data.size()) + " items, expected " +
                                            std::to_string(texts.size()));
        std::vector<Embedding> out;
        out.reserve(data.size());
        for (const auto& item : data) {
            Embedding e(item.at("embedding").get<std::vector<double>>());
            if (e.dim() != dim_)
                fail(ErrorCode::ParseError, "embedding reply has dimension " + std::to_string(e.dim()));
            out.push_back(std::move(e));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed embedding reply: ") + e.what());
    }
}

Embedding HttpEncoder::do_embed(const std::string& trimmed) const {
    return std::move(embed_batch(std::span<const std::string>(&trimmed, 1)).front());
}

}  // namespace llm4tag
