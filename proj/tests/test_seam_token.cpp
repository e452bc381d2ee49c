#include <gtest/gtest.h>

#include "support.hpp"

using namespace seamkit;

TEST(Quantize, Boundaries) {
    EXPECT_EQ(quantize(-0.5), 0);
    EXPECT_EQ(quantize(0.5), 1023);
    EXPECT_EQ(quantize(0.0), 512);
    EXPECT_EQ(quantize(-0.5 - 5e-10), 0);
    EXPECT_EQ(quantize(0.5 + 5e-10), 1023);
    EXPECT_THROW(quantize(0.5 + 1e-6), RangeError);
    EXPECT_THROW(quantize(-0.7), RangeError);
    EXPECT_THROW(quantize(std::nan("")), RangeError);
}

TEST(Quantize, CenterArithmetic) {
    // bin 512 covers [0, 1/1024); its center sits half a bin above zero.
    EXPECT_DOUBLE_EQ(dequantize(512), 0.00048828125);
    EXPECT_LE(std::abs(dequantize(quantize(0.0)) - 0.0), kHalfBin);
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
        const double c = rng.uniform(-0.5, 0.5);
        EXPECT_LE(std::abs(dequantize(quantize(c)) - c), kHalfBin);
    }
}

TEST(Canonicalize, SwapsEndpoints) {
    const SeamSet s{{Vec3(0, 0.3, 0), Vec3(0, -0.3, 0)}};
    const auto c = canonicalize(s);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].p1, s[0].p2);
    EXPECT_EQ(c[0].p2, s[0].p1);
}

TEST(Canonicalize, CanonicalIsUnchanged) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = canonicalize(fixtures::random_seam_set(rng, 30));
        EXPECT_TRUE(is_canonical(c));
        EXPECT_EQ(canonicalize(c), c);
    }
}

TEST(Canonicalize, DropsZeroLengthAndDuplicates) {
    const Vec3 a(0.1, 0.1, 0.1), b(0.2, 0.2, 0.2);
    const SeamSet s{{a, b}, {b, a}, {a, a + Vec3(1e-5, 0, 0)}, {a, b + Vec3(1e-6, 0, 0)}};
    const auto c = canonicalize(s);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(yzx_key(c[0].p1), yzx_key(a));
}

TEST(Canonicalize, YzxPriority) {
    // Lower y wins even when x and z are larger.
    const SeamSegment low{Vec3(0.4, -0.2, 0.4), Vec3(0.4, 0.3, 0.4)};
    const SeamSegment high{Vec3(-0.4, 0.0, -0.4), Vec3(-0.4, 0.3, -0.4)};
    const auto c = canonicalize({high, low});
    EXPECT_EQ(c[0], low);
    // Same first endpoint: second endpoint decides.
    const Vec3 p(0, 0, 0);
    const SeamSegment s1{p, Vec3(0.1, 0.2, 0)}, s2{p, Vec3(-0.1, 0.2, 0)};
    const auto d = canonicalize({s1, s2});
    EXPECT_EQ(d[0], s2);
}

TEST(Canonicalize, ShuffleAndFlipInvariant) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        SeamSet base;
        auto point = [&] { return Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)); };
        for (int i = 0; i < 50; ++i) base.push_back({point(), point()});
        // Oracle: sort segments by quantized (min key, max key) with a plain comparison sort.
        std::vector<std::pair<YzxKey, YzxKey>> keys;
        for (const auto& s : base) {
            auto k1 = yzx_key(s.p1), k2 = yzx_key(s.p2);
            if (k1 == k2) continue;
            if (k2 < k1) std::swap(k1, k2);
            keys.emplace_back(k1, k2);
        }
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

        const auto reference = canonicalize(base);
        ASSERT_EQ(reference.size(), keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            EXPECT_EQ(yzx_key(reference[i].p1), keys[i].first);
            EXPECT_EQ(yzx_key(reference[i].p2), keys[i].second);
        }
        for (int shuffle = 0; shuffle < 10; ++shuffle) {
            auto s = base;
            rng.shuffle(s);
            for (auto& seg : s) {
                if (rng.uniform() < 0.5) std::swap(seg.p1, seg.p2);
            }
            EXPECT_EQ(canonicalize(s), reference);
        }
    }
}

TEST(Encode, Layout) {
    EXPECT_EQ(encode({}), (TokenSequence{kBos, kEos}));
    const auto c = canonicalize({{Vec3(-0.5, 0.0, 0.25), Vec3(0.5, 0.25, -0.5)}});
    const auto t = encode(c);
    ASSERT_EQ(t.size(), 8u);
    EXPECT_EQ(t, (TokenSequence{kBos, 512, 768, 0, 768, 0, 1023, kEos}));
}

TEST(Encode, RejectsNonCanonical) {
    const SeamSet s{{Vec3(0, 0.3, 0), Vec3(0, -0.3, 0)}};
    EXPECT_THROW(encode(s), ContractError);
}

TEST(Encode, GeometricRoundTrip) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = canonicalize(fixtures::random_seam_set(rng, 40));
        const auto tokens = encode(c);
        EXPECT_EQ(tokens.size(), 2 + 6 * c.size());
        const auto d = decode(tokens);
        ASSERT_EQ(d.size(), c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            EXPECT_LE((d[i].p1 - c[i].p1).cwiseAbs().maxCoeff(), kHalfBin);
            EXPECT_LE((d[i].p2 - c[i].p2).cwiseAbs().maxCoeff(), kHalfBin);
        }
        EXPECT_EQ(encode(d), tokens);
    }
}

TEST(Decode, Empty) { EXPECT_TRUE(decode({kBos, kEos}).empty()); }

TEST(Decode, MalformedPositions) {
    auto position_of = [](const TokenSequence& t) -> std::size_t {
        try {
            decode(t);
        } catch (const MalformedSequenceError& e) {
            return e.position();
        }
        return SIZE_MAX;
    };
    EXPECT_EQ(position_of({kBos, 1, 2, 3, 4, 5, kEos}), 6u);
    EXPECT_EQ(position_of({}), 0u);
    EXPECT_EQ(position_of({1, kEos}), 0u);
    EXPECT_EQ(position_of({kBos, 1, 2, 3, 4, 5, 6}), 7u);
    EXPECT_EQ(position_of({kBos, 1, 2, kBos, 4, 5, 6, kEos}), 3u);
    EXPECT_EQ(position_of({kBos, 1, 2, 3, 4, 5, 1024 + 3, kEos}), 6u);
    EXPECT_EQ(position_of({kBos, kEos, 7}), 2u);
    EXPECT_EQ(position_of({kBos, kEos, kPad, kPad}), SIZE_MAX);
}

TEST(Decode, TokenRoundTripOnValidSequences) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto tokens = encode(canonicalize(fixtures::random_seam_set(rng, 20)));
        EXPECT_EQ(encode(decode(tokens)), tokens);
    }
}

TEST(Repair, TruncatesToLastCompleteSegment) {
    TokenSequence t{kBos, 1, 2, 3, 4, 5, 6, 7, 8, kEos};
    EXPECT_TRUE(repair_sequence(t));
    EXPECT_EQ(t, (TokenSequence{kBos, 1, 2, 3, 4, 5, 6, kEos}));

    TokenSequence ok{kBos, 1, 2, 3, 4, 5, 6, kEos};
    EXPECT_FALSE(repair_sequence(ok));
    EXPECT_EQ(ok, (TokenSequence{kBos, 1, 2, 3, 4, 5, 6, kEos}));

    TokenSequence runaway{kBos, 1, 2, 3, 4, 5, 6, 9, kPad, 3};
    EXPECT_TRUE(repair_sequence(runaway));
    EXPECT_EQ(runaway, (TokenSequence{kBos, 1, 2, 3, 4, 5, 6, kEos}));
}
