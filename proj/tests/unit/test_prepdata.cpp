#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "kale/errors.hpp"
#include "kale/prepdata.hpp"
#include "kale/rng.hpp"

using namespace kale;

namespace {

std::vector<Tensor> random_samples(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<Tensor> xs;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor t({2, 3});
        for (std::size_t f = 0; f < t.size(); ++f) t[f] = 3.0 * f + (f + 1) * rng.normal();
        xs.push_back(std::move(t));
    }
    return xs;
}

}  // namespace

TEST(Standardizer, HandExample) {
    const std::vector<Tensor> xs{Tensor({1}, 1.0), Tensor({1}, 3.0)};
    const auto s = fit_standardizer(xs);
    EXPECT_EQ(s.mean()[0], 2.0);
    EXPECT_EQ(s.stddev()[0], 1.0);
    EXPECT_EQ(apply_standardizer(s, xs[0])[0], -1.0);
    EXPECT_EQ(apply_standardizer(s, xs[1])[0], 1.0);
}

TEST(Standardizer, ConstantFeatureClamped) {
    const std::vector<Tensor> xs(4, Tensor({2}, std::vector<double>{5.0, 1.0}));
    const auto s = Standardizer::fit(xs);
    EXPECT_EQ(s.stddev()[0], kStdFloor);
    EXPECT_EQ(s.apply(xs[0])[0], 0.0);
}

TEST(Standardizer, TrainMomentsAndInverse) {
    const auto xs = random_samples(50, 1);
    const auto s = Standardizer::fit(xs);
    const auto zs = s.apply(xs);
    for (std::size_t f = 0; f < 6; ++f) {
        double m = 0, v = 0;
        for (const auto& z : zs) m += z[f];
        m /= zs.size();
        for (const auto& z : zs) v += (z[f] - m) * (z[f] - m);
        EXPECT_NEAR(m, 0.0, 1e-9);
        EXPECT_NEAR(std::sqrt(v / zs.size()), 1.0, 1e-6);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto back = s.invert(zs[i]);
        for (std::size_t f = 0; f < 6; ++f) EXPECT_NEAR(back[f], xs[i][f], 1e-12);
    }
}

TEST(Standardizer, IdempotentUpToEpsilon) {
    const auto zs = Standardizer::fit(random_samples(40, 2)).apply(random_samples(40, 2));
    const auto twice = Standardizer::fit(zs).apply(zs);
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t f = 0; f < 6; ++f) EXPECT_NEAR(twice[i][f], zs[i][f], 1e-6);
}

TEST(Standardizer, Errors) {
    Standardizer unfitted;
    EXPECT_FALSE(unfitted.fitted());
    EXPECT_THROW(unfitted.apply(Tensor({1})), StateError);
    const auto s = Standardizer::fit(random_samples(3, 3));
    EXPECT_THROW(s.apply(Tensor({3, 2})), ShapeError);
    EXPECT_THROW(Standardizer::fit(std::vector<Tensor>{}), ValueError);
    EXPECT_THROW(Standardizer::fit(std::vector<Tensor>{Tensor({1}), Tensor({2})}), ShapeError);
}

TEST(Encoding, Examples) {
    const SequenceEncoding enc("ACGT", 5);
    EXPECT_EQ(encode_sequence("ACG", enc), (std::vector<int>{1, 2, 3, 0, 0}));
    EXPECT_EQ(SequenceEncoding("ACGT", 4).encode("ACGTACGT"), (std::vector<int>{1, 2, 3, 4}));
    try {
        enc.encode("ACX");
        FAIL();
    } catch (const EncodingError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("'X'"), std::string::npos);
        EXPECT_NE(msg.find("position 2"), std::string::npos);
    }
    // Unknown characters past max_len are truncated away first.
    EXPECT_EQ(SequenceEncoding("AC", 2).encode("ACZ"), (std::vector<int>{1, 2}));
    EXPECT_EQ(enc.vocab_size(), 5u);
    EXPECT_EQ(enc.encode_tensor("T").values(), (std::vector<double>{4, 0, 0, 0, 0}));
}

TEST(Encoding, InjectiveOnShortStrings) {
    const SequenceEncoding enc("AB", 3);
    std::set<std::vector<int>> seen;
    std::size_t count = 0;
    for (const std::string s : {"", "A", "B", "AA", "AB", "BA", "BB", "AAA", "AAB", "ABA", "ABB", "BAA", "BAB",
                                "BBA", "BBB"}) {
        seen.insert(enc.encode(s));
        ++count;
    }
    EXPECT_EQ(seen.size(), count);
}

TEST(Encoding, InvalidAlphabet) {
    EXPECT_THROW(SequenceEncoding("", 3), ValueError);
    EXPECT_THROW(SequenceEncoding("ABA", 3), ValueError);
    EXPECT_THROW(SequenceEncoding("AB", 0), ValueError);
}
