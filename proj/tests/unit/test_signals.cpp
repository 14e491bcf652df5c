#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pwtl/error.hpp"
#include "pwtl/signals.hpp"

using namespace pwtl;

TEST(Signals, ScheduleMatchesStepwiseOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const IntersectionSignal s = sample_signal(rng);
        for (double t = 0.0; t < 400.0; t += 0.5) {
            const GroupLights g = phase_at(s, t);
            ASSERT_EQ(g.group_a, oracle::group_a_light(s, t)) << s.red << "/" << s.green << "/" << s.offset
                                                              << " t=" << t;
            ASSERT_NE(g.group_a, g.group_b);
        }
    }
}

TEST(Signals, OffsetIsTheFirstRedToGreenChange) {
    const IntersectionSignal s{30, 25, 12};
    EXPECT_EQ(phase_at(s, 0.0).group_a, Light::Red);
    EXPECT_EQ(phase_at(s, 11.5).group_a, Light::Red);
    EXPECT_EQ(phase_at(s, 12.0).group_a, Light::Green);
    EXPECT_EQ(phase_at(s, 36.5).group_a, Light::Green);
    EXPECT_EQ(phase_at(s, 37.0).group_a, Light::Red);
    EXPECT_EQ(phase_at(s, 67.0).group_a, Light::Green);
    EXPECT_EQ(phase_at(s, 12.0 + 55 * 10).group_a, Light::Green);
}

TEST(Signals, SamplesStayInRange) {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const auto s = sample_signal(rng);
        ASSERT_TRUE(s.valid());
        ASSERT_GE(s.red, 20);
        ASSERT_LE(s.red, 54);
        ASSERT_GE(s.green, 20);
        ASSERT_LE(s.green, 54);
        ASSERT_GE(s.offset, 0);
        ASSERT_LE(s.offset, s.red + s.green - 1);
    }
    EXPECT_FALSE((IntersectionSignal{19, 30, 0}.valid()));
    EXPECT_FALSE((IntersectionSignal{30, 55, 0}.valid()));
    EXPECT_FALSE((IntersectionSignal{30, 30, 60}.valid()));
}

TEST(Signals, EncodeDecodeRoundTripsOnTheLattice) {
    const RoadNetwork net = test::load_fixture("two_intersection");
    Rng rng(9);
    for (int i = 0; i < 2000; ++i) {
        const SignalConfiguration cfg = sample_config(net, rng);
        const auto x = encode(cfg, net);
        ASSERT_EQ(x.size(), 6u);
        for (const double v : x) {
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 1.0);
        }
        std::size_t clamped = 99;
        ASSERT_EQ(decode(x, net, &clamped), cfg);
        ASSERT_EQ(clamped, 0u);
    }
}

TEST(Signals, EncodingCorners) {
    const std::vector<IntersectionSignal> lo{{20, 20, 0}}, hi{{54, 54, 107}};
    EXPECT_EQ(encode_signals(lo), (std::vector<double>{0.0, 0.0, 0.0}));
    EXPECT_EQ(encode_signals(hi), (std::vector<double>{1.0, 1.0, 1.0}));
    const std::vector<double> outside{-0.2, 1.4, 0.5};
    std::size_t clamped = 0;
    const auto s = decode_signals(outside, &clamped);
    EXPECT_EQ(clamped, 2u);
    EXPECT_EQ(s[0].red, 20);
    EXPECT_EQ(s[0].green, 54);
    EXPECT_TRUE(s[0].valid());
    EXPECT_THROW(decode_signals(std::vector<double>{0.1, 0.2}), std::invalid_argument);
    const RoadNetwork net = test::load_fixture("two_intersection");
    EXPECT_THROW(decode(std::vector<double>{0.1, 0.2, 0.3}, net), std::invalid_argument);
}

TEST(Signals, PhasesFollowGroups) {
    const RoadNetwork net = test::load_fixture("four_way");
    const SignalConfiguration cfg{{"x", {30, 40, 10}}};
    const PhaseState early = phases_at(net, cfg, 5.0);
    EXPECT_TRUE(early.red(net.edge_index("n_in")));
    EXPECT_TRUE(early.red(net.edge_index("s_in")));
    EXPECT_FALSE(early.red(net.edge_index("e_in")));
    EXPECT_FALSE(early.red(net.edge_index("w_in")));
    EXPECT_FALSE(early.red(net.edge_index("n_out")));
    const PhaseState later = phases_at(net, cfg, 20.0);
    EXPECT_FALSE(later.red(net.edge_index("n_in")));
    EXPECT_TRUE(later.red(net.edge_index("e_in")));
}

TEST(Signals, ConfigCheckAndFiles) {
    const RoadNetwork net = test::load_fixture("two_intersection");
    EXPECT_THROW(check_config({{"j1", {30, 30, 0}}}, net), ValidationError);
    EXPECT_THROW(check_config({{"j1", {30, 30, 0}}, {"j2", {10, 30, 0}}}, net), ValidationError);
    EXPECT_THROW(check_config({{"j1", {30, 30, 0}}, {"j2", {30, 30, 0}}, {"j3", {30, 30, 0}}}, net),
                 ValidationError);
    EXPECT_NO_THROW(check_config({{"j1", {30, 30, 0}}, {"j2", {30, 30, 59}}}, net));

    const auto dir = test::scratch_dir("signals");
    const SignalConfiguration cfg{{"j1", {31, 44, 7}}, {"j2", {54, 20, 73}}};
    write_signal_config(cfg, dir / "l.json");
    EXPECT_EQ(read_signal_config(dir / "l.json"), cfg);
    EXPECT_EQ(read_signal_config(test::fixture("two_intersection_lights.json")).size(), 2u);

    const RoadNetwork ring = test::load_fixture("ring");
    Rng rng(1);
    EXPECT_THROW(sample_config(ring, rng), std::invalid_argument);
}
