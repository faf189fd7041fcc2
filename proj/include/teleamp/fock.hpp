#pragma once

#include <complex>
#include <string>
#include <unordered_map>
#include <vector>

#include "teleamp/circuit.hpp"

namespace teleamp {

// Brute-force truncated-Fock simulator used as an independent oracle for the
// Gaussian/hafnian path.  Amplitudes live in a sparse map keyed by the
// occupation tuple.  Passive gates conserve total photon number, so with
// max_total set the retained sectors evolve exactly; truncation losses are
// tracked in `leakage` (squared norm dropped so far).
struct FockVector {
    int modes = 0;
    int cutoff = 10;     // per-mode occupation cap
    int max_total = -1;  // total-photon cap, -1 = none
    std::unordered_map<std::string, Complex> amplitudes;
    double leakage = 0.0;

    static std::string key(const std::vector<int>& occupation);
    static std::vector<int> occupation(const std::string& key);
    double norm2() const;
};

FockVector fock_vacuum(int modes, int cutoff, int max_total = -1);

/// Single-mode squeezed vacuum: c_{2k} = (-tanh r e^{i phi})^k sqrt((2k)!)
/// / (2^k k!) / sqrt(cosh r), for 2k <= cutoff.
FockVector prepare_smsv(double r, double phi, int cutoff);

/// Coefficients c_0..c_kmax of the same expansion (odd entries zero).
std::vector<Complex> smsv_amplitudes(double r, double phi, int kmax);

FockVector tensor(const FockVector& a, const FockVector& b);

/// Exact two-mode beam-splitter action in the truncated space, same
/// convention as the circuit element.
FockVector apply_bs(const FockVector& state, int mode_a, int mode_b, double transmissivity,
                    double phase);

FockVector apply_ps(const FockVector& state, int mode, double theta);

/// Models loss on one mode as a beam splitter of transmissivity eta against
/// a fresh vacuum mode appended at the end; photon counting marginalizes the
/// ancilla by summing probabilities over its outcomes.
FockVector attach_loss_ancilla(const FockVector& state, int mode, double eta);

/// Applies every BeamSplitter/PhaseShift element in order.  Loss elements
/// are rejected; use attach_loss_ancilla explicitly.
FockVector apply_circuit(const FockVector& state, const CircuitIR& circuit);

struct Projection {
    FockVector reduced;  // remaining modes, original order
    double weight = 0.0; // squared norm of the slice
};

/// Projects the listed modes onto the given photon counts.
Projection project(const FockVector& state, const std::vector<int>& modes,
                   const std::vector<int>& counts);

/// Marginal photon-number distribution of one mode (probability-summed over
/// all other modes).
std::vector<double> marginal_distribution(const FockVector& state, int mode, int nmax);

}  // namespace teleamp
