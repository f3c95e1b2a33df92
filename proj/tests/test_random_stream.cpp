#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "riskprec/errors.hpp"
#include "riskprec/random_stream.hpp"

using namespace riskprec;

namespace {

using C = Philox4x32::Counter;
using K = Philox4x32::Key;

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswerZero) {
    const C out = Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0});
    EXPECT_EQ(out, (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
    const C out = Philox4x32::apply(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
    const C out = Philox4x32::apply(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UsableAtCompileTime) {
    constexpr C out = Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0});
    static_assert(out[0] == 0x6627e8d5u);
}

TEST(RandomStream, FirstWordsComeFromTheFirstBlock) {
    const StreamId id{0x0000000200000001ull, 7, 250, 42};
    RandomStream s(id);
    const C block = Philox4x32::apply(C{0, 42, 250, 7}, K{1, 2});
    const std::uint64_t a = s.next_u64();
    const std::uint64_t b = s.next_u64();
    EXPECT_EQ(a, (std::uint64_t{block[0]} << 32) | block[1]);
    EXPECT_EQ(b, (std::uint64_t{block[2]} << 32) | block[3]);
    const C next = Philox4x32::apply(C{1, 42, 250, 7}, K{1, 2});
    EXPECT_EQ(s.next_u64(), (std::uint64_t{next[0]} << 32) | next[1]);
    EXPECT_EQ(s.draws(), 3u);
}

TEST(RandomStream, UniformMapsTopBits) {
    RandomStream a(StreamId{5, 0, 10, 3});
    RandomStream b(StreamId{5, 0, 10, 3});
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t bits = a.next_u64() >> 11;
        EXPECT_EQ(b.uniform(), (static_cast<double>(bits) + 0.5) / 9007199254740992.0);
    }
}

TEST(RandomStream, ReplaysBitExactly) {
    RandomStream a(StreamId{20070501, 1, 500, 9999});
    RandomStream b(StreamId{20070501, 1, 500, 9999});
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(RandomStream, DistinctCoordinatesGiveDistinctStreams) {
    std::set<std::uint64_t> firsts;
    for (std::uint32_t g = 0; g < 3; ++g) {
        for (std::uint32_t n : {250u, 500u}) {
            for (std::uint32_t t = 0; t < 50; ++t) {
                RandomStream s(StreamId{1, g, n, t});
                firsts.insert(s.next_u64());
            }
        }
    }
    RandomStream other_seed(StreamId{2, 0, 250, 0});
    firsts.insert(other_seed.next_u64());
    EXPECT_EQ(firsts.size(), 3u * 2u * 50u + 1u);
}

TEST(RandomStream, UniformsLieStrictlyInsideUnitInterval) {
    RandomStream s(StreamId{3, 0, 0, 0});
    double sum = 0.0;
    const int count = 200000;
    for (int i = 0; i < count; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // Mean of U(0,1) has SE sqrt(1/12/count).
    EXPECT_NEAR(sum / count, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / count));
}

TEST(RandomStream, MovedStreamContinues) {
    RandomStream a(StreamId{11, 0, 0, 0});
    RandomStream ref(StreamId{11, 0, 0, 0});
    (void)a.uniform();
    (void)ref.uniform();
    RandomStream b(std::move(a));
    EXPECT_EQ(b.uniform(), ref.uniform());
}

}  // namespace
