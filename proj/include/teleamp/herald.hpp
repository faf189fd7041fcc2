#pragma once

#include <vector>

namespace teleamp {

// Accepted heralding patterns.  fock_mode must read fock_count photons and
// the pattern_modes must read one of the accepted count tuples; all other
// modes are required to read zero unless require_others_vacuum is cleared.
// Each accepted pattern carries the index l of the phase w^l it imprints on
// the teleported state.
struct HeraldSpec {
    struct Accepted {
        std::vector<int> counts;
        int l = 0;
    };

    int fock_mode = 0;
    int fock_count = 0;
    std::vector<int> pattern_modes;
    std::vector<Accepted> accepted;
    bool require_others_vacuum = true;
};

/// The 20-bin layout: two photons on bin 1, patterns (0,1,1)/(1,0,1)/(1,1,0)
/// on bins 8/14/20 with l = 0/1/2 (0-based mode indices 0, 7, 13, 19).
HeraldSpec borealis_herald();

/// Herald for the (n+3)-mode ideal layout: n photons on mode 0, and n single
/// photons plus one vacuum over the Fourier output ports; l is the position
/// of the vacuum in Fourier port order.
HeraldSpec ideal_herald(int n);

/// Same spec with mode indices remapped to positions within `kept` (for use
/// after reducing a state to its active modes).
HeraldSpec remap_herald(const HeraldSpec& spec, const std::vector<int>& kept);

}  // namespace teleamp
