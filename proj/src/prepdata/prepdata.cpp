#include "kale/prepdata.hpp"

#include <algorithm>
#include <cmath>

#include "kale/errors.hpp"

namespace kale {

Standardizer Standardizer::fit(std::span<const Tensor> train) {
    if (train.empty()) throw ValueError("cannot fit a standardizer on zero samples");
    const auto& shape = train.front().shape();
    Standardizer s;
    s.mean_ = Tensor(shape);
    s.std_ = Tensor(shape);
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (const auto& x : train) {
        if (x.shape() != shape) throw ShapeError("standardizer fit on samples of different shapes");
        for (std::size_t i = 0; i < x.size(); ++i) s.mean_[i] += x[i];
    }
    s.mean_ *= inv_n;
    for (const auto& x : train)
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - s.mean_[i];
            s.std_[i] += d * d;
        }
    for (auto& v : s.std_.data()) v = std::max(std::sqrt(v * inv_n), kStdFloor);
    s.fitted_ = true;
    return s;
}

Tensor Standardizer::apply(const Tensor& x) const {
    if (!fitted_) throw StateError("standardizer applied before fit");
    if (x.shape() != mean_.shape()) {
        throw ShapeError("standardizer fitted on " + shape_to_string(mean_.shape()) + ", applied to " +
                         shape_to_string(x.shape()));
    }
    Tensor z(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean_[i]) / std_[i];
    return z;
}

std::vector<Tensor> Standardizer::apply(std::span<const Tensor> xs) const {
    std::vector<Tensor> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(apply(x));
    return out;
}

Tensor Standardizer::invert(const Tensor& z) const {
    if (!fitted_) throw StateError("standardizer inverted before fit");
    if (z.shape() != mean_.shape()) throw ShapeError("standardizer inverse shape mismatch");
    Tensor x(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * std_[i] + mean_[i];
    return x;
}

SequenceEncoding::SequenceEncoding(std::string alphabet, std::size_t max_len)
    : alphabet_(std::move(alphabet)), max_len_(max_len) {
    if (alphabet_.empty()) throw ValueError("alphabet must not be empty");
    if (max_len_ == 0) throw ValueError("max_len must be positive");
    std::fill(std::begin(lookup_), std::end(lookup_), 0);
    for (std::size_t i = 0; i < alphabet_.size(); ++i) {
        auto& slot = lookup_[static_cast<unsigned char>(alphabet_[i])];
        if (slot != 0) throw ValueError(std::string("alphabet repeats character '") + alphabet_[i] + "'");
        slot = static_cast<int>(i + 1);
    }
}

std::vector<int> SequenceEncoding::encode(std::string_view s) const {
    std::vector<int> codes(max_len_, 0);
    const std::size_t n = std::min(s.size(), max_len_);
    for (std::size_t i = 0; i < n; ++i) {
        const int code = lookup_[static_cast<unsigned char>(s[i])];
        if (code == 0) {
            throw EncodingError(std::string("unknown character '") + s[i] + "' at position " + std::to_string(i));
        }
        codes[i] = code;
    }
    return codes;
}

Tensor SequenceEncoding::encode_tensor(std::string_view s) const {
    const auto codes = encode(s);
    return Tensor({max_len_}, std::vector<double>(codes.begin(), codes.end()));
}

}  // namespace kale
