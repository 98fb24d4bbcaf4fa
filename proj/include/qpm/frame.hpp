#pragma once

#include <vector>

#include "qpm/lattice.hpp"

namespace qpm {

enum class BlockRegion { Outside, Minus, Core, Plus };

// Geometry of one moving block. With R the block at the left end of the
// window, the extended block R' = R u (R + e1) splits into the leaving slab
// R- = R \ (R + e1), the core R0 = R n (R + e1) and the entering slab
// R+ = (R + e1) \ R.
struct BlockFrame {
    int dim = 1;
    std::vector<Site> singular;   // S
    std::vector<Site> doubled;    // S u (S + e1)
    int margin = 0;               // r
    double x0 = 0.0;
    double omega1 = 0.0;
    LatticeBox block;             // R
    LatticeBox extended;          // R'
    LatticeBox core;              // R0
    // Two disjoint rings of thickness two around S u (S + e1); the one with
    // the smaller potential is used as the unique-continuation boundary.
    std::vector<Site> inner_ring;
    std::vector<Site> outer_ring;

    BlockRegion region(const Site& n) const;
    bool in_doubled(const Site& n) const;
};

}  // namespace qpm
