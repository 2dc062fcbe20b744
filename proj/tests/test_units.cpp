#include <catch2/catch_amalgamated.hpp>
#include "switchcraft/switchcraft.hpp"

TEST_CASE("circular equatorial orbit maps to unit elements") {
    sc::CartesianState s;
    s.r << 1.0, 0.0, 0.0;
    s.v << 0.0, 1.0, 0.0;
    const auto mee = sc::cart_to_mee(s);
    CHECK(mee.p == Catch::Approx(1.0).margin(1e-14));
    CHECK(std::abs(mee.f) < 1e-14);
    CHECK(std::abs(mee.g) < 1e-14);
    CHECK(std::abs(mee.h) < 1e-14);
    CHECK(std::abs(mee.k) < 1e-14);
    CHECK(std::abs(mee.l) < 1e-14);
}
