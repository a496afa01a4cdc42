#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfam/vehicle.hpp"

namespace rfam::cost {

// Reference mass a cost relation is evaluated against.
enum class MassRef { Stage1Structure, Stage2Structure, Glow };

// Power-law cost relation C = k * m_ref^b in million USD with mass in kg,
// with an optional per-doubling learning factor for recurring items.
struct CostElement {
    std::string name;
    double k = 0.0;
    double b = 0.0;
    MassRef mass_ref = MassRef::Glow;
    double learning = 1.0;
    bool recurring = false;
};

// Engine and fairing costs are flat amounts (their specifications are fixed
// inputs, not sized masses): a one-time development cost plus a per-unit
// production cost that still rides the learning curve.
struct FixedItem {
    double development = 0.0;
    double unit = 0.0;
    double learning = 1.0;
};

struct CostModelConfig {
    CostElement stage1_fuselage_dev;
    CostElement stage1_fuselage_prod;
    CostElement stage2_fuselage_dev;
    CostElement stage2_fuselage_prod;
    CostElement operations;               // evaluated on lift-off mass
    std::optional<CostElement> reuse;     // reusable stage only, on m_s1
    FixedItem engine1;
    FixedItem engine2;
    FixedItem fairing;
};

double cer(double k, double b, double m_ref);
double learning_factor(int j, double learning);
// Sum of learning factors over launches 1..n (0 for n <= 0).
double learning_series(int n, double learning);

struct CostItem {
    std::string name;
    double amount = 0.0;  // million USD
};

struct CostBreakdown {
    std::vector<CostItem> items;
    double total = 0.0;  // exact running sum of items

    void add(std::string name, double amount);
};

// Life-cycle cost of one launcher on its own over n_launches flights.
// Expendable: development once, everything else recurs per launch.
// Reusable: the first stage is built once; refurbishment recurs from the
// second flight on and grows with use.
CostBreakdown independent_cost(const MassConfiguration& masses, double glow,
                               const CostModelConfig& config, VehicleKind kind,
                               int n_launches);

enum class CommonalityCase { None, ExpendableExpendable, ReusableExpendable, ReusableReusable };

struct FamilyCostConfig {
    double production_sharing = 0.9;  // multiplier on shared-line production cost
    int launches1 = 1;
    int launches2 = 1;
    CommonalityCase commonality = CommonalityCase::None;
    // Which stage of each launcher is the compatible one (1 or 2; 0 = none).
    int compatible_stage1 = 0;
    int compatible_stage2 = 0;
    // Cost relations for the shared fuselage, developed once and produced on
    // a single line for both launchers.
    CostElement shared_dev;
    CostElement shared_prod;
};

// Family-accounted life-cycle cost of one member: its own non-shared items
// plus its launch-count share of the common fuselage block. Used directly as
// the trajectory-problem objective numerator.
CostBreakdown family_member_cost(const MassConfiguration& masses, double glow,
                                 const CostModelConfig& config, VehicleKind kind,
                                 int compatible_stage, double m_c,
                                 int own_launches, int other_launches,
                                 const FamilyCostConfig& family);

struct FamilyCostBreakdown {
    CostBreakdown launcher1;
    CostBreakdown launcher2;
    double shared_block = 0.0;  // undivided common-stage dev + discounted prod
    double total1 = 0.0;        // family-accounted cost of launcher 1
    double total2 = 0.0;
    double independent1 = 0.0;  // stand-alone baselines for comparison
    double independent2 = 0.0;
};

FamilyCostBreakdown family_cost(const MassConfiguration& masses1, double glow1, VehicleKind kind1,
                                const MassConfiguration& masses2, double glow2, VehicleKind kind2,
                                const CostModelConfig& config1, const CostModelConfig& config2,
                                const FamilyCostConfig& family, double m_c);

struct SpecificCost {
    double raw = 0.0;         // cost / payload
    double per_launch = 0.0;  // cost / (launches * payload)
};

SpecificCost specific_cost(double cost, double m_l, int n_launches);

}  // namespace rfam::cost
