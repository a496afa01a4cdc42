#include <cmath>
#include <stdexcept>
#include <utility>

#include "doctest.h"
#include "rfam/cost.hpp"
#include "test_helpers.hpp"

using namespace rfam;
using namespace rfam::cost;

namespace {

// Unit-coefficient expendable model: three fuselage/fairing development items
// of 1 each, three production items of 1 each, operations 1, no learning.
CostModelConfig unit_elv_config() {
    CostModelConfig c;
    c.stage1_fuselage_dev = {"s1 dev", 1.0, 1.0, MassRef::Stage1Structure, 1.0, false};
    c.stage1_fuselage_prod = {"s1 prod", 1.0, 1.0, MassRef::Stage1Structure, 1.0, true};
    c.stage2_fuselage_dev = {"s2 dev", 1.0, 1.0, MassRef::Stage2Structure, 1.0, false};
    c.stage2_fuselage_prod = {"s2 prod", 1.0, 1.0, MassRef::Stage2Structure, 1.0, true};
    c.operations = {"ops", 1.0, 1.0, MassRef::Glow, 1.0, true};
    c.fairing = {1.0, 1.0, 1.0};
    return c;
}

MassConfiguration unit_masses() {
    MassConfiguration m;
    m.m_s1 = 1.0;
    m.m_s2 = 1.0;
    m.m_p1 = 1.0;
    m.m_p2 = 1.0;
    m.m_L = 1.0;
    return m;
}

using rfam::testing::heavy_rlv_cost_config;
using rfam::testing::light_elv_cost_config;

MassConfiguration heavy_masses() {
    MassConfiguration m;
    m.m_s1 = 20770.0;
    m.m_s2 = 4222.0;
    m.m_p1 = 384103.0;
    m.m_p2 = 113269.0;
    m.m_L = 15844.0;
    return m;
}

MassConfiguration light_masses() {
    MassConfiguration m;
    m.m_s1 = 5510.0;
    m.m_s2 = 1404.0;
    m.m_p1 = 147946.0;
    m.m_p2 = 29785.0;
    m.m_L = 6494.0;
    return m;
}

}  // namespace

TEST_CASE("power-law cost relation") {
    CHECK(cer(1.0, 1.0, 42.0) == doctest::Approx(42.0).epsilon(1e-12));
    CHECK(cer(0.031, 0.65, 20000.0) == doctest::Approx(19.3656104270465).epsilon(1e-12));
    CHECK(cer(1.873, 0.50, 20770.0) == doctest::Approx(269.93302749015356).epsilon(1e-12));
    // Monotone in mass for a positive coefficient.
    CHECK(cer(0.5, 0.7, 1000.0) < cer(0.5, 0.7, 1001.0));
    CHECK_THROWS_AS(cer(1.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(cer(1.0, 1.0, -5.0), std::domain_error);
}

TEST_CASE("learning factor") {
    CHECK(learning_factor(1, 0.95) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(learning_factor(1, 1.10) == doctest::Approx(1.0).epsilon(1e-15));
    // At the doubling index the factor equals the learning rate itself.
    CHECK(learning_factor(2, 0.95) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(learning_factor(4, 0.90) == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(learning_factor(3, 1.10) == doctest::Approx(1.1630700000414793).epsilon(1e-12));
    CHECK_THROWS_AS(learning_factor(0, 0.95), std::domain_error);

    // Identity learning leaves every launch at unit cost; cheaper-than-one
    // rates decay strictly, more-expensive-than-one rates grow strictly.
    for (int j = 1; j <= 6; ++j) CHECK(learning_factor(j, 1.0) == 1.0);
    for (int j = 2; j <= 6; ++j) {
        CHECK(learning_factor(j, 0.9) < learning_factor(j - 1, 0.9));
        CHECK(learning_factor(j, 1.1) > learning_factor(j - 1, 1.1));
    }

    CHECK(learning_series(5, 0.9) == doctest::Approx(4.339192707992726).epsilon(1e-12));
    CHECK(learning_series(50, 0.95) == doctest::Approx(40.223852818088055).epsilon(1e-12));
    CHECK(learning_series(0, 0.9) == 0.0);
}

TEST_CASE("independent cost of a unit expendable launcher") {
    // One launch, no learning, every coefficient 1 on unit masses: three
    // development items + three production items + operations = 7.
    const auto bd = independent_cost(unit_masses(), 1.0, unit_elv_config(), VehicleKind::ELV, 1);
    CHECK(bd.total == doctest::Approx(7.0).epsilon(1e-12));

    // Doubling every coefficient doubles the total.
    auto doubled = unit_elv_config();
    doubled.stage1_fuselage_dev.k *= 2.0;
    doubled.stage1_fuselage_prod.k *= 2.0;
    doubled.stage2_fuselage_dev.k *= 2.0;
    doubled.stage2_fuselage_prod.k *= 2.0;
    doubled.operations.k *= 2.0;
    doubled.fairing.development *= 2.0;
    doubled.fairing.unit *= 2.0;
    const auto bd2 = independent_cost(unit_masses(), 1.0, doubled, VehicleKind::ELV, 1);
    CHECK(bd2.total == doctest::Approx(14.0).epsilon(1e-12));
}

TEST_CASE("independent cost totals equal item sums") {
    const auto m = heavy_masses();
    const double m0 = glow(m, 1700.0);
    const auto bd = independent_cost(m, m0, heavy_rlv_cost_config(), VehicleKind::RLV, 100);
    double sum = 0.0;
    for (const auto& item : bd.items) {
        CHECK(item.amount >= 0.0);
        sum += item.amount;
    }
    CHECK(bd.total == doctest::Approx(sum).epsilon(1e-15));
    CHECK(bd.total > 0.0);
}

TEST_CASE("reusable launcher with a single launch has no reuse cost") {
    const auto m = heavy_masses();
    const auto bd = independent_cost(m, glow(m, 1700.0), heavy_rlv_cost_config(),
                                     VehicleKind::RLV, 1);
    for (const auto& item : bd.items)
        if (item.name == "reuse") CHECK(item.amount == 0.0);
}

TEST_CASE("reuse grows the bill with each additional flight") {
    const auto m = heavy_masses();
    const auto cfg = heavy_rlv_cost_config();
    double prev = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const auto bd = independent_cost(m, glow(m, 1700.0), cfg, VehicleKind::RLV, n);
        CHECK(bd.total > prev);
        prev = bd.total;
    }
}

TEST_CASE("cost model rejects mismatched launcher kinds") {
    CHECK_THROWS_AS(independent_cost(unit_masses(), 1.0, unit_elv_config(), VehicleKind::RLV, 1),
                    std::invalid_argument);
    auto rlv_cfg = heavy_rlv_cost_config();
    CHECK_THROWS_AS(
        independent_cost(heavy_masses(), 6e5, rlv_cfg, VehicleKind::ELV, 1),
        std::invalid_argument);
}

TEST_CASE("family cost with no commonality is the sum of independents") {
    FamilyCostConfig fam;
    fam.commonality = CommonalityCase::None;
    fam.launches1 = 100;
    fam.launches2 = 50;
    const auto m1 = heavy_masses();
    const auto m2 = light_masses();
    const auto bd = family_cost(m1, glow(m1, 1700.0), VehicleKind::RLV,
                                m2, glow(m2, 500.0), VehicleKind::ELV,
                                heavy_rlv_cost_config(), light_elv_cost_config(), fam, 0.0);
    const double i1 = independent_cost(m1, glow(m1, 1700.0), heavy_rlv_cost_config(),
                                       VehicleKind::RLV, 100).total;
    const double i2 = independent_cost(m2, glow(m2, 500.0), light_elv_cost_config(),
                                       VehicleKind::ELV, 50).total;
    CHECK(bd.total1 + bd.total2 == doctest::Approx(i1 + i2).epsilon(1e-12));
    CHECK(bd.independent1 == doctest::Approx(i1).epsilon(1e-15));
    CHECK(bd.independent2 == doctest::Approx(i2).epsilon(1e-15));
}

TEST_CASE("shared block of a synthetic expendable pair") {
    // Development 8, two unit productions of 2 at full sharing: the common
    // block is 12, split evenly across one launch each.
    FamilyCostConfig fam;
    fam.commonality = CommonalityCase::ExpendableExpendable;
    fam.launches1 = 1;
    fam.launches2 = 1;
    fam.production_sharing = 1.0;
    fam.compatible_stage1 = 1;
    fam.compatible_stage2 = 1;
    fam.shared_dev = {"shared dev", 8.0, 1.0, MassRef::Stage1Structure, 1.0, false};
    fam.shared_prod = {"shared prod", 2.0, 1.0, MassRef::Stage1Structure, 1.0, true};

    const auto bd = family_cost(unit_masses(), 1.0, VehicleKind::ELV,
                                unit_masses(), 1.0, VehicleKind::ELV,
                                unit_elv_config(), unit_elv_config(), fam, 1.0);
    CHECK(bd.shared_block == doctest::Approx(12.0).epsilon(1e-12));
    double share1 = 0.0, share2 = 0.0;
    for (const auto& item : bd.launcher1.items)
        if (item.name == "shared-stage share") share1 = item.amount;
    for (const auto& item : bd.launcher2.items)
        if (item.name == "shared-stage share") share2 = item.amount;
    CHECK(share1 == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(share2 == doctest::Approx(6.0).epsilon(1e-12));
    // The per-launcher contributions always recompose the undivided block.
    CHECK(share1 + share2 == doctest::Approx(bd.shared_block).epsilon(1e-14));
}

TEST_CASE("zero production sharing leaves only the split development") {
    FamilyCostConfig fam;
    fam.commonality = CommonalityCase::ExpendableExpendable;
    fam.launches1 = 3;
    fam.launches2 = 1;
    fam.production_sharing = 1e-12;  // factor must stay positive
    fam.compatible_stage1 = 1;
    fam.compatible_stage2 = 1;
    fam.shared_dev = {"shared dev", 8.0, 1.0, MassRef::Stage1Structure, 1.0, false};
    fam.shared_prod = {"shared prod", 2.0, 1.0, MassRef::Stage1Structure, 1.0, true};
    const auto bd = family_cost(unit_masses(), 1.0, VehicleKind::ELV,
                                unit_masses(), 1.0, VehicleKind::ELV,
                                unit_elv_config(), unit_elv_config(), fam, 1.0);
    CHECK(bd.shared_block == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("family cost is symmetric under launcher relabeling") {
    FamilyCostConfig fam;
    fam.commonality = CommonalityCase::ReusableExpendable;
    fam.launches1 = 100;
    fam.launches2 = 50;
    fam.production_sharing = 0.9;
    fam.compatible_stage1 = 2;
    fam.compatible_stage2 = 1;
    fam.shared_dev = {"shared dev", 0.555, 0.55, MassRef::Stage2Structure, 1.0, false};
    fam.shared_prod = {"shared prod", 0.084, 0.55, MassRef::Stage2Structure, 0.95, true};

    const auto m1 = heavy_masses();
    const auto m2 = light_masses();
    const double mc = 4800.0;
    const auto fwd = family_cost(m1, glow(m1, 1700.0), VehicleKind::RLV,
                                 m2, glow(m2, 500.0), VehicleKind::ELV,
                                 heavy_rlv_cost_config(), light_elv_cost_config(), fam, mc);

    FamilyCostConfig swapped = fam;
    std::swap(swapped.launches1, swapped.launches2);
    std::swap(swapped.compatible_stage1, swapped.compatible_stage2);
    const auto rev = family_cost(m2, glow(m2, 500.0), VehicleKind::ELV,
                                 m1, glow(m1, 1700.0), VehicleKind::RLV,
                                 light_elv_cost_config(), heavy_rlv_cost_config(), swapped, mc);
    CHECK(fwd.total1 == doctest::Approx(rev.total2).epsilon(1e-14));
    CHECK(fwd.total2 == doctest::Approx(rev.total1).epsilon(1e-14));
    CHECK(fwd.shared_block == doctest::Approx(rev.shared_block).epsilon(1e-14));
}

TEST_CASE("sharing beats independence at the independently optimal stage mass") {
    // When the compatible-stage mass equals what the launcher would have
    // chosen on its own, the family accounting can only remove duplicated
    // development, so each member's bill must not exceed its baseline.
    FamilyCostConfig fam;
    fam.commonality = CommonalityCase::ReusableExpendable;
    fam.launches1 = 100;
    fam.launches2 = 50;
    fam.production_sharing = 0.9;
    fam.compatible_stage1 = 2;
    fam.compatible_stage2 = 1;
    fam.shared_dev = {"shared dev", 0.555, 0.55, MassRef::Stage2Structure, 1.0, false};
    fam.shared_prod = {"shared prod", 0.084, 0.55, MassRef::Stage2Structure, 0.95, true};

    auto m1 = heavy_masses();
    auto m2 = light_masses();
    // Force the compatible stages to a genuinely common mass.
    const double mc = 4800.0;
    m1.m_s2 = mc;
    m2.m_s1 = mc;
    const auto bd = family_cost(m1, glow(m1, 1700.0), VehicleKind::RLV,
                                m2, glow(m2, 500.0), VehicleKind::ELV,
                                heavy_rlv_cost_config(), light_elv_cost_config(), fam, mc);
    CHECK(bd.total1 < bd.independent1);
    CHECK(bd.total2 < bd.independent2);
}

TEST_CASE("family cost validates case against vehicle kinds") {
    FamilyCostConfig fam;
    fam.commonality = CommonalityCase::ExpendableExpendable;
    fam.compatible_stage1 = 1;
    fam.compatible_stage2 = 1;
    fam.shared_dev = {"shared dev", 1.0, 1.0, MassRef::Stage1Structure, 1.0, false};
    fam.shared_prod = {"shared prod", 1.0, 1.0, MassRef::Stage1Structure, 1.0, true};
    CHECK_THROWS_AS(family_cost(heavy_masses(), 5.4e5, VehicleKind::RLV,
                                light_masses(), 1.9e5, VehicleKind::ELV,
                                heavy_rlv_cost_config(), light_elv_cost_config(), fam, 4800.0),
                    std::invalid_argument);
    // A reusable first stage can never be designated compatible.
    FamilyCostConfig fam2 = fam;
    fam2.commonality = CommonalityCase::ReusableExpendable;
    fam2.compatible_stage1 = 1;
    CHECK_THROWS_AS(family_cost(heavy_masses(), 5.4e5, VehicleKind::RLV,
                                light_masses(), 1.9e5, VehicleKind::ELV,
                                heavy_rlv_cost_config(), light_elv_cost_config(), fam2, 4800.0),
                    std::invalid_argument);
}

TEST_CASE("specific cost conventions") {
    const auto sc = specific_cost(10.0, 5.0, 1);
    CHECK(sc.raw == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sc.per_launch == doctest::Approx(2.0).epsilon(1e-15));
    const auto sc50 = specific_cost(10.0, 5.0, 50);
    CHECK(sc50.raw == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sc50.per_launch == doctest::Approx(0.04).epsilon(1e-15));
    CHECK_THROWS_AS(specific_cost(10.0, 0.0, 1), std::domain_error);
}
