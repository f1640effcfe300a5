#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kale/tensor.hpp"

namespace kale {

inline constexpr double kStdFloor = 1e-8;

/// Per-feature affine standardization fitted on training samples.
class Standardizer {
public:
    /// Population mean and standard deviation of each entry over `train`;
    /// standard deviations below 1e-8 are clamped to 1e-8.
    static Standardizer fit(std::span<const Tensor> train);

    bool fitted() const noexcept { return fitted_; }
    const Tensor& mean() const noexcept { return mean_; }
    const Tensor& stddev() const noexcept { return std_; }

    /// (x - mean) / std. Throws StateError before fit, ShapeError on mismatch.
    Tensor apply(const Tensor& x) const;
    std::vector<Tensor> apply(std::span<const Tensor> xs) const;
    Tensor invert(const Tensor& z) const;

private:
    Tensor mean_;
    Tensor std_;
    bool fitted_ = false;
};

inline Standardizer fit_standardizer(std::span<const Tensor> train) { return Standardizer::fit(train); }
inline Tensor apply_standardizer(const Standardizer& s, const Tensor& x) { return s.apply(x); }

/// Character-level label encoding; code 0 is padding.
class SequenceEncoding {
public:
    /// Throws ValueError on an empty alphabet, repeated characters or max_len == 0.
    SequenceEncoding(std::string alphabet, std::size_t max_len);

    const std::string& alphabet() const noexcept { return alphabet_; }
    std::size_t max_len() const noexcept { return max_len_; }
    /// Number of distinct codes including padding.
    std::size_t vocab_size() const noexcept { return alphabet_.size() + 1; }

    /// Truncates to max_len (keeping the prefix), maps each character to its
    /// 1-based alphabet position and right-pads with 0. Throws EncodingError
    /// naming the first unknown character and its position.
    std::vector<int> encode(std::string_view s) const;
    /// The encoding as a {max_len} tensor of codes.
    Tensor encode_tensor(std::string_view s) const;

private:
    std::string alphabet_;
    std::size_t max_len_;
    int lookup_[256];
};

inline std::vector<int> encode_sequence(std::string_view s, const SequenceEncoding& enc) { return enc.encode(s); }

}  // namespace kale
