#include <catch_amalgamated.hpp>

#include <cmath>

#include "dnl/domain.hpp"
#include "dnl/io.hpp"
#include "dnl/random.hpp"

using namespace dnl;

TEST_CASE("integrate: zero function, total mass, hand sum") {
    DiscreteDomain two({1.0, 1.0}, {}, {false, false});
    CHECK(integrate(two, {0.0, 0.0}) == 0.0);

    DiscreteDomain weighted({2.0, 3.0}, {}, {false, false});
    CHECK(integrate(weighted, {1.0, 1.0}) == 5.0);

    DiscreteDomain three({1.0, 2.0, 3.0}, {}, {false, false, false});
    CHECK(integrate(three, {1.0, -1.0, 2.0}) == 5.0);  // 1 - 2 + 6

    CHECK_THROWS_AS(integrate(three, {1.0, 2.0}), DimensionError);
}

TEST_CASE("norms: L1, L2, Linf") {
    DiscreteDomain dom({1.0, 1.0}, {}, {false, false});
    CHECK(norm(dom, {0.0, 0.0}, Norm::L1) == 0.0);
    CHECK(norm(dom, {0.0, 0.0}, Norm::L2) == 0.0);
    CHECK(norm(dom, {0.0, 0.0}, Norm::Linf) == 0.0);

    CHECK(norm(dom, {3.0, -4.0}, Norm::L1) == 7.0);
    CHECK(norm(dom, {3.0, -4.0}, Norm::L2) == 5.0);
    CHECK(norm(dom, {3.0, -4.0}, Norm::Linf) == 4.0);

    DiscreteDomain w21({2.0, 1.0}, {}, {false, false});
    CHECK(norm(w21, {1.0, 0.0}, Norm::L1) == 2.0);
    CHECK(norm(w21, {1.0, 0.0}, Norm::L2) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(norm(w21, {1.0, 0.0}, Norm::Linf) == 1.0);
}

TEST_CASE("positive/negative parts") {
    const NodeFunction u = {1.0, -2.0, 0.0};
    CHECK(positive_part(u) == NodeFunction{1.0, 0.0, 0.0});
    CHECK(negative_part(u) == NodeFunction{0.0, -2.0, 0.0});

    const NodeFunction nonneg = {0.5, 2.0, 0.0};
    CHECK(positive_part(nonneg) == nonneg);
    CHECK(negative_part(nonneg) == NodeFunction{0.0, 0.0, 0.0});

    CHECK(positive_part({-5.0}) == NodeFunction{0.0});
    CHECK(negative_part({-5.0}) == NodeFunction{-5.0});
}

TEST_CASE("part identities and order preservation on random samples") {
    SplitMix64 rng(7);
    DiscreteDomain dom({0.5, 1.5, 2.0, 1.0}, {}, {false, false, false, false});
    for (int t = 0; t < 200; ++t) {
        NodeFunction u(4), v(4);
        for (int i = 0; i < 4; ++i) {
            u[i] = rng.uniform(-10.0, 10.0);
            v[i] = u[i] + rng.uniform(0.0, 5.0);  // u <= v pointwise
        }
        const NodeFunction up = positive_part(u), un = negative_part(u);
        for (int i = 0; i < 4; ++i) {
            CHECK(up[i] + un[i] == u[i]);                       // exact split
            CHECK(positive_part(up)[i] == up[i]);               // idempotent
            CHECK(negative_part(un)[i] == un[i]);
            CHECK(up[i] <= positive_part(v)[i]);                // order preserved
        }
        // ||u||_1 = int |u+| + int |u-|
        NodeFunction au(4), aun(4);
        for (int i = 0; i < 4; ++i) {
            au[i] = std::abs(up[i]);
            aun[i] = std::abs(un[i]);
        }
        CHECK(norm(dom, u, Norm::L1) == Catch::Approx(integrate(dom, au) + integrate(dom, aun)).margin(1e-12));
        // discrete Hoelder: ||u||_2^2 <= ||u||_1 ||u||_inf
        const double l2 = norm(dom, u, Norm::L2);
        CHECK(l2 * l2 <= norm(dom, u, Norm::L1) * norm(dom, u, Norm::Linf) * (1.0 + 1e-12) + 1e-15);
    }
}

TEST_CASE("path grid construction") {
    const DiscreteDomain g1 = build_path_grid(1, 1.0);
    CHECK(g1.node_count() == 3);
    CHECK(g1.edges().size() == 2);
    CHECK(g1.is_boundary(0));
    CHECK_FALSE(g1.is_boundary(1));
    CHECK(g1.is_boundary(2));
    CHECK(g1.grid_spacing() == 1.0);

    const DiscreteDomain g3 = build_path_grid(3, 0.25);
    CHECK(g3.node_count() == 5);
    CHECK(g3.edges().size() == 4);
    for (const auto& e : g3.edges()) CHECK(e.w == 4.0);  // 1/h
    for (double mu : g3.measure()) CHECK(mu == 0.25);

    const DiscreteDomain g64 = build_path_grid(64, 1.0 / 65.0);
    CHECK(g64.node_count() == 66);
    CHECK(g64.edges().size() == 65);
    CHECK(g64.free_count() == 64);

    CHECK_THROWS_AS(build_path_grid(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_path_grid(4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_path_grid(4, -1.0), std::invalid_argument);
}

TEST_CASE("square grid emits the same domain type") {
    const DiscreteDomain g = build_square_grid(2, 3, 0.5);
    CHECK(g.node_count() == 4 * 5);
    CHECK(g.free_count() == 6);
    int boundary = 0;
    for (int i = 0; i < g.node_count(); ++i) boundary += g.is_boundary(i) ? 1 : 0;
    CHECK(boundary == 14);
    for (const auto& e : g.edges()) CHECK(e.w == 1.0);
    for (double mu : g.measure()) CHECK(mu == 0.25);
}

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(DiscreteDomain({1.0, -1.0}, {}, {false, false}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDomain({1.0, 1.0}, {{0, 0, 1.0}}, {false, false}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDomain({1.0, 1.0}, {{0, 1, -2.0}}, {false, false}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDomain({1.0, 1.0}, {{0, 1, 1.0}, {1, 0, 2.0}}, {false, false}),
                    std::invalid_argument);  // duplicate undirected edge
    CHECK_THROWS_AS(DiscreteDomain({1.0, 1.0}, {{0, 1, 1.0}}, {true, true}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDomain({1.0}, {{0, 3, 1.0}}, {false}), std::invalid_argument);
}

TEST_CASE("graph json round trip") {
    const DiscreteDomain g = build_path_grid(5, 0.2);
    const auto j = domain_to_json(g);
    const DiscreteDomain back = domain_from_json(j);
    CHECK(back.node_count() == g.node_count());
    CHECK(back.measure() == g.measure());
    CHECK(back.grid_spacing() == g.grid_spacing());
    REQUIRE(back.edges().size() == g.edges().size());
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
        CHECK(back.edges()[k].i == g.edges()[k].i);
        CHECK(back.edges()[k].j == g.edges()[k].j);
        CHECK(back.edges()[k].w == g.edges()[k].w);
    }
    for (int i = 0; i < g.node_count(); ++i) CHECK(back.is_boundary(i) == g.is_boundary(i));
}
