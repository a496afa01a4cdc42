#include "rfam/cost.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace rfam::cost {

double cer(double k, double b, double m_ref) {
    if (!(m_ref > 0.0)) throw std::domain_error("cost relation needs a positive reference mass");
    return k * std::pow(m_ref, b);
}

double learning_factor(int j, double learning) {
    if (j < 1) throw std::domain_error("launch index starts at 1");
    if (!(learning > 0.0)) throw std::domain_error("learning factor must be positive");
    return std::pow(static_cast<double>(j), std::log2(learning));
}

double learning_series(int n, double learning) {
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) sum += learning_factor(j, learning);
    return sum;
}

void CostBreakdown::add(std::string name, double amount) {
    items.push_back({std::move(name), amount});
    total += amount;
}

namespace {

double mass_of(MassRef ref, const MassConfiguration& masses, double glow) {
    switch (ref) {
        case MassRef::Stage1Structure: return masses.m_s1;
        case MassRef::Stage2Structure: return masses.m_s2;
        case MassRef::Glow: return glow;
    }
    throw std::logic_error("unknown mass reference");
}

double element_cost(const CostElement& e, const MassConfiguration& masses, double glow) {
    return cer(e.k, e.b, mass_of(e.mass_ref, masses, glow));
}

void check_kind(const CostModelConfig& config, VehicleKind kind) {
    if (kind == VehicleKind::RLV && !config.reuse)
        throw std::invalid_argument("reusable launcher cost model needs a reuse relation");
    if (kind == VehicleKind::ELV && config.reuse)
        throw std::invalid_argument("expendable launcher cost model must not carry a reuse relation");
}

void add_development(CostBreakdown& out, const CostModelConfig& c,
                     const MassConfiguration& masses, double glow) {
    out.add("stage-1 fuselage development", element_cost(c.stage1_fuselage_dev, masses, glow));
    out.add("stage-2 fuselage development", element_cost(c.stage2_fuselage_dev, masses, glow));
    out.add("engine development", c.engine1.development + c.engine2.development);
    out.add("fairing development", c.fairing.development);
}

// Undivided common-stage block: one development plus the whole family's
// production run on a single discounted line.
double shared_block_cost(const FamilyCostConfig& family, double m_c) {
    const int n_total = family.launches1 + family.launches2;
    return cer(family.shared_dev.k, family.shared_dev.b, m_c) +
           family.production_sharing * cer(family.shared_prod.k, family.shared_prod.b, m_c) *
               learning_series(n_total, family.shared_prod.learning);
}

}  // namespace

CostBreakdown independent_cost(const MassConfiguration& masses, double glow,
                               const CostModelConfig& config, VehicleKind kind,
                               int n_launches) {
    if (n_launches < 1) throw std::domain_error("launch count must be at least 1");
    check_kind(config, kind);

    CostBreakdown out;
    add_development(out, config, masses, glow);

    const double ops = element_cost(config.operations, masses, glow);
    if (kind == VehicleKind::ELV) {
        out.add("stage-1 fuselage production",
                element_cost(config.stage1_fuselage_prod, masses, glow) *
                    learning_series(n_launches, config.stage1_fuselage_prod.learning));
        out.add("stage-1 engine production",
                config.engine1.unit * learning_series(n_launches, config.engine1.learning));
    } else {
        // The reusable first stage and its engines are built once.
        out.add("stage-1 fuselage production",
                element_cost(config.stage1_fuselage_prod, masses, glow));
        out.add("stage-1 engine production", config.engine1.unit);
    }
    out.add("stage-2 fuselage production",
            element_cost(config.stage2_fuselage_prod, masses, glow) *
                learning_series(n_launches, config.stage2_fuselage_prod.learning));
    out.add("stage-2 engine production",
            config.engine2.unit * learning_series(n_launches, config.engine2.learning));
    out.add("fairing production",
            config.fairing.unit * learning_series(n_launches, config.fairing.learning));
    out.add("operations", ops * learning_series(n_launches, config.operations.learning));
    if (kind == VehicleKind::RLV) {
        // Refurbishment applies from the second flight on and grows with use.
        out.add("reuse", element_cost(*config.reuse, masses, glow) *
                             learning_series(n_launches - 1, config.reuse->learning));
    }
    return out;
}

CostBreakdown family_member_cost(const MassConfiguration& masses, double glow,
                                 const CostModelConfig& config, VehicleKind kind,
                                 int compatible_stage, double m_c,
                                 int own_launches, int other_launches,
                                 const FamilyCostConfig& family) {
    if (own_launches < 1 || other_launches < 1)
        throw std::domain_error("launch counts must be at least 1");
    if (!(family.production_sharing > 0.0 && family.production_sharing <= 1.0))
        throw std::invalid_argument("production-sharing factor must lie in (0, 1]");
    check_kind(config, kind);
    if (kind == VehicleKind::RLV && compatible_stage != 2)
        throw std::invalid_argument("a reusable first stage cannot be the compatible stage");
    if (compatible_stage != 1 && compatible_stage != 2)
        throw std::invalid_argument("compatible stage must be 1 or 2");

    CostBreakdown out;
    const double ops = element_cost(config.operations, masses, glow);

    if (kind == VehicleKind::ELV) {
        // The member develops and produces only its remaining (non-shared)
        // fuselage; engines, fairing, and operations are never shared.
        const CostElement& rem_dev =
            compatible_stage == 1 ? config.stage2_fuselage_dev : config.stage1_fuselage_dev;
        const CostElement& rem_prod =
            compatible_stage == 1 ? config.stage2_fuselage_prod : config.stage1_fuselage_prod;
        out.add("remaining fuselage development", element_cost(rem_dev, masses, glow));
        out.add("engine development", config.engine1.development + config.engine2.development);
        out.add("fairing development", config.fairing.development);
        out.add("remaining fuselage production",
                element_cost(rem_prod, masses, glow) *
                    learning_series(own_launches, rem_prod.learning));
        out.add("stage-1 engine production",
                config.engine1.unit * learning_series(own_launches, config.engine1.learning));
        out.add("stage-2 engine production",
                config.engine2.unit * learning_series(own_launches, config.engine2.learning));
        out.add("fairing production",
                config.fairing.unit * learning_series(own_launches, config.fairing.learning));
        out.add("operations", ops * learning_series(own_launches, config.operations.learning));
    } else {
        // Reusable member: shared stage is the expendable upper stage; the
        // booster fuselage and engines are built once, and the shared stage's
        // engines still recur per launch.
        out.add("stage-1 fuselage development",
                element_cost(config.stage1_fuselage_dev, masses, glow));
        out.add("engine development", config.engine1.development + config.engine2.development);
        out.add("fairing development", config.fairing.development);
        out.add("stage-1 fuselage production",
                element_cost(config.stage1_fuselage_prod, masses, glow));
        out.add("stage-1 engine production", config.engine1.unit);
        out.add("stage-2 engine production",
                config.engine2.unit * learning_series(own_launches, config.engine2.learning));
        out.add("fairing production",
                config.fairing.unit * learning_series(own_launches, config.fairing.learning));
        out.add("operations", ops * learning_series(own_launches, config.operations.learning));
        out.add("reuse", element_cost(*config.reuse, masses, glow) *
                             learning_series(own_launches - 1, config.reuse->learning));
    }

    const double share = static_cast<double>(own_launches) / (own_launches + other_launches);
    out.add("shared-stage share", shared_block_cost(family, m_c) * share);
    return out;
}

FamilyCostBreakdown family_cost(const MassConfiguration& masses1, double glow1, VehicleKind kind1,
                                const MassConfiguration& masses2, double glow2, VehicleKind kind2,
                                const CostModelConfig& config1, const CostModelConfig& config2,
                                const FamilyCostConfig& family, double m_c) {
    FamilyCostBreakdown out;
    out.independent1 = independent_cost(masses1, glow1, config1, kind1, family.launches1).total;
    out.independent2 = independent_cost(masses2, glow2, config2, kind2, family.launches2).total;

    if (family.commonality == CommonalityCase::None) {
        out.launcher1 = independent_cost(masses1, glow1, config1, kind1, family.launches1);
        out.launcher2 = independent_cost(masses2, glow2, config2, kind2, family.launches2);
        out.total1 = out.launcher1.total;
        out.total2 = out.launcher2.total;
        return out;
    }

    const int reusable_count =
        (kind1 == VehicleKind::RLV ? 1 : 0) + (kind2 == VehicleKind::RLV ? 1 : 0);
    const bool case_matches =
        (family.commonality == CommonalityCase::ExpendableExpendable && reusable_count == 0) ||
        (family.commonality == CommonalityCase::ReusableExpendable && reusable_count == 1) ||
        (family.commonality == CommonalityCase::ReusableReusable && reusable_count == 2);
    if (!case_matches)
        throw std::invalid_argument("commonality case does not match the vehicle kinds");

    out.shared_block = shared_block_cost(family, m_c);
    out.launcher1 = family_member_cost(masses1, glow1, config1, kind1, family.compatible_stage1,
                                       m_c, family.launches1, family.launches2, family);
    out.launcher2 = family_member_cost(masses2, glow2, config2, kind2, family.compatible_stage2,
                                       m_c, family.launches2, family.launches1, family);
    out.total1 = out.launcher1.total;
    out.total2 = out.launcher2.total;
    return out;
}

SpecificCost specific_cost(double cost, double m_l, int n_launches) {
    if (!(m_l > 0.0)) throw std::domain_error("payload mass must be positive");
    if (n_launches < 1) throw std::domain_error("launch count must be at least 1");
    return {cost / m_l, cost / (static_cast<double>(n_launches) * m_l)};
}

}  // namespace rfam::cost
