#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "fixtures.hpp"
#include "pwtl/error.hpp"
#include "pwtl/network.hpp"

using namespace pwtl;

namespace {

// Two roads meeting at a signalized node with a side road.
NetworkData small_network() {
    NetworkData d;
    d.nodes = {{"a", 0, 0}, {"b", 100, 0}, {"c", 200, 0}, {"s", 100, 80}};
    d.edges = {{"ab", "a", "b", 100, 1, 13.68, {}, {}, {}},
               {"bc", "b", "c", 100, 2, 13.68, {}, {}, {}},
               {"sb", "s", "b", 80, 1, 10.0, {}, {}, {}}};
    Intersection in;
    in.id = "x";
    in.node = "b";
    in.incoming = {"ab", "sb"};
    in.outgoing = {"bc"};
    in.turn_weights = {{"ab", "bc", 1.0}, {"sb", "bc", 1.0}};
    in.signalized = true;
    in.group_a = {"ab"};
    in.group_b = {"sb"};
    d.intersections = {in};
    return d;
}

bool mentions(const std::vector<Violation>& v, const std::string& needle) {
    for (const auto& x : v) {
        if ((x.entity + " " + x.message).find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST(Network, CellCountRule) {
    EXPECT_EQ(cell_count_for(100), 10);
    EXPECT_EQ(cell_count_for(104.9), 10);
    EXPECT_EQ(cell_count_for(105), 11);
    EXPECT_EQ(cell_count_for(12), 2);
    EXPECT_EQ(cell_count_for(3), 2);
}

TEST(Network, FixturesLoadWithExpectedDiscretisation) {
    for (const char* stem : {"ring", "four_way", "two_intersection", "four_category", "corridor"}) {
        const RoadNetwork net = test::load_fixture(stem);
        std::size_t cells = 0;
        for (std::size_t e = 0; e < net.edge_count(); ++e) {
            const double len = net.edge(e).length_m;
            const int n = std::max(2, static_cast<int>(std::lround(len / 10.0)));
            EXPECT_EQ(net.cell_count(e), n) << stem << " " << net.edge(e).id;
            EXPECT_NEAR(net.cell_length(e) * n, len, 1e-9);
            EXPECT_GE(net.cell_length(e), 5.0);
            EXPECT_LE(net.cell_length(e), 20.0);
            cells += static_cast<std::size_t>(n);
        }
        EXPECT_EQ(net.total_cells(), cells);
    }
}

TEST(Network, SignalizedIdsSortedAndEntryExitFlags) {
    const RoadNetwork net = test::load_fixture("two_intersection");
    EXPECT_EQ(net.signalized_ids(), (std::vector<std::string>{"j1", "j2"}));
    EXPECT_TRUE(net.is_entry(net.edge_index("art_w")));
    EXPECT_FALSE(net.is_exit(net.edge_index("art_w")));
    EXPECT_TRUE(net.is_exit(net.edge_index("art_e")));
    EXPECT_FALSE(net.is_entry(net.edge_index("art_m")));
    EXPECT_FALSE(net.is_exit(net.edge_index("art_m")));

    const RoadNetwork ring = test::load_fixture("ring");
    EXPECT_TRUE(ring.signalized_ids().empty());
    for (std::size_t e = 0; e < ring.edge_count(); ++e) {
        EXPECT_FALSE(ring.is_entry(e));
        EXPECT_FALSE(ring.is_exit(e));
    }
}

TEST(Network, TurnAnglesOnTheFourWayFixture) {
    const RoadNetwork net = test::load_fixture("four_way");
    EXPECT_NEAR(turn_angle(net, "n_in", "s_out"), 180.0, 1e-9);
    EXPECT_NEAR(turn_angle(net, "n_in", "e_out"), 90.0, 1e-9);
    EXPECT_NEAR(turn_angle(net, "n_in", "w_out"), 90.0, 1e-9);
    EXPECT_NEAR(turn_angle(net, "n_in", "n_out"), 0.0, 1e-9);
    EXPECT_THROW(turn_angle(net, "n_in", "s_in"), std::invalid_argument);

    EXPECT_NEAR(turn_speed_factor(180.0), 1.0, 1e-15);
    EXPECT_NEAR(turn_speed_factor(90.0), 0.5, 1e-15);
    EXPECT_NEAR(turn_speed_factor(0.0), 0.0, 1e-15);
    EXPECT_NEAR(turn_speed_factor(60.0), 0.25, 1e-15);
}

TEST(Network, FdOverridesAndDefaults) {
    const RoadNetwork net = test::load_fixture("four_category");
    const auto& fd = net.fd(net.edge_index("residential"));
    EXPECT_EQ(fd.v_max, 8.3);
    EXPECT_EQ(fd.rho_cr, 0.045);
    EXPECT_EQ(fd.a, 1.1);

    const RoadNetwork ring = test::load_fixture("ring").with_fd_defaults(0.06, 1.5);
    EXPECT_EQ(ring.fd(0).rho_cr, 0.06);
    EXPECT_EQ(ring.fd(0).a, 1.5);
    EXPECT_EQ(ring.fd(0).v_max, 13.68);
}

TEST(Network, ValidSmallNetworkHasNoViolations) {
    EXPECT_TRUE(validate(small_network()).empty());
    EXPECT_NO_THROW(RoadNetwork{small_network()});
}

TEST(Network, DetectsEachInvariantViolation) {
    {
        auto d = small_network();
        d.nodes.push_back({"a", 5, 5});
        EXPECT_TRUE(mentions(validate(d), "a"));
    }
    {
        auto d = small_network();
        d.edges[0].to = "nowhere";
        EXPECT_TRUE(mentions(validate(d), "nowhere"));
    }
    {
        auto d = small_network();
        d.edges[1].lanes = 0;
        EXPECT_TRUE(mentions(validate(d), "bc"));
    }
    {
        auto d = small_network();
        d.edges[0].length_m = -1;
        EXPECT_FALSE(validate(d).empty());
    }
    {
        auto d = small_network();
        d.edges[2].length_m = 7;  // 2 cells of 3.5 m
        EXPECT_TRUE(mentions(validate(d), "sb"));
    }
    {
        auto d = small_network();
        d.intersections[0].turn_weights = {{"ab", "bc", 1.0}, {"sb", "bc", 0.0}};
        EXPECT_TRUE(mentions(validate(d), "sb"));
    }
    {
        auto d = small_network();
        d.intersections[0].turn_weights.push_back({"ab", "zz", 1.0});
        EXPECT_TRUE(mentions(validate(d), "zz"));
    }
    {
        auto d = small_network();
        d.intersections[0].turn_weights[0].weight = -0.5;
        EXPECT_FALSE(validate(d).empty());
    }
    {
        auto d = small_network();
        d.intersections[0].group_b = {};
        EXPECT_FALSE(validate(d).empty());
    }
    {
        auto d = small_network();
        d.intersections[0].group_b = {"ab", "sb"};
        EXPECT_FALSE(validate(d).empty());
    }
    {
        auto d = small_network();
        d.intersections[0].incoming = {"ab", "bc"};
        EXPECT_FALSE(validate(d).empty());
    }
}

TEST(Network, ConstructorListsAllViolations) {
    auto d = small_network();
    d.edges[1].lanes = 0;
    d.edges[2].free_flow_speed = 0;
    try {
        RoadNetwork net(d);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("bc"), std::string::npos);
        EXPECT_NE(what.find("sb"), std::string::npos);
    }
}

TEST(Network, SaveLoadRoundTrip) {
    const auto dir = test::scratch_dir("network");
    auto d = small_network();
    d.edges[0].rho_cr = 0.04;
    d.edges[0].inflow_demand = 0.3;
    save_network(d, dir / "n.json");
    EXPECT_EQ(read_network_data(dir / "n.json"), d);
}

TEST(Network, FileErrorsNameTheProblem) {
    const auto dir = test::scratch_dir("network_bad");
    {
        std::ofstream(dir / "bad.json") << R"({"nodes": [{"id": 1, "x": 0}], "edges": []})";
    }
    try {
        read_network_data(dir / "bad.json");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos);
    }
    EXPECT_THROW(read_network_data(dir / "missing.json"), ParseError);
    {
        std::ofstream(dir / "ints.json") << R"({"nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 100, "y": 0}],
            "edges": [{"id": 7, "from": 1, "to": 2, "length_m": 100, "lanes": 1, "free_flow_speed_mps": 12}]})";
    }
    const RoadNetwork net = load_network(dir / "ints.json");
    EXPECT_EQ(net.edge(0).id, "7");
    EXPECT_EQ(net.edge(0).from, "1");
}
