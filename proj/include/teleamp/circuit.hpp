#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace teleamp {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Circuit elements.
//
// Beam-splitter convention, fixed once for the whole project: the element
// BeamSplitter(a, b, T, phi) acts on the transfer matrix as the 2x2 block
//
//     [ sqrt(T)                exp(-i phi) sqrt(1-T) ]   (row a)
//     [ -exp(i phi) sqrt(1-T)  sqrt(T)               ]   (row b)
//
// so T is the probability that light entering port a stays on port a.  The
// reference-matrix fixture (borealis_reference_transfer) pins this choice.
// ---------------------------------------------------------------------------

struct BeamSplitter {
    int mode_a = 0;
    int mode_b = 0;
    double transmissivity = 1.0;
    double phase = 0.0;
};

struct PhaseShift {
    int mode = 0;
    double theta = 0.0;
};

struct Loss {
    int mode = 0;
    double eta = 1.0;
};

using Element = std::variant<BeamSplitter, PhaseShift, Loss>;

/// Ordered list of optical elements over a fixed number of modes.
struct CircuitIR {
    int mode_count = 0;
    std::vector<Element> elements;

    CircuitIR() = default;
    explicit CircuitIR(int modes) : mode_count(modes) {}

    CircuitIR& bs(int a, int b, double transmissivity, double phase = 0.0);
    CircuitIR& ps(int mode, double theta);
    CircuitIR& loss(int mode, double eta);

    /// Throws std::invalid_argument on bad indices or out-of-range parameters.
    void validate() const;
};

/// Passive transfer matrix.  Column j holds the amplitudes by which input
/// mode j is distributed over output modes; creation operators map as
/// a_in^dag -> U^T a_out^dag.
struct TransferMatrix {
    Eigen::MatrixXcd entries;

    int modes() const { return static_cast<int>(entries.rows()); }
    /// max |U U^dag - I| entrywise.
    double unitarity_deviation() const;
    bool is_unitary(double tol = 1e-10) const { return unitarity_deviation() < tol; }
};

/// One loss channel extracted from a circuit, with its element position.
struct LossEvent {
    std::size_t position = 0;
    int mode = 0;
    double eta = 1.0;
};

/// Compiled form for state evolution with losses in calibrated positions:
/// unitary segments interleaved with loss channels, in execution order.
struct CompiledSchedule {
    int mode_count = 0;
    struct Step {
        // Exactly one of the two is active; a unitary step may be identity.
        std::optional<Eigen::MatrixXcd> unitary;
        std::optional<LossEvent> loss;
    };
    std::vector<Step> steps;
};

/// Product of all non-loss elements plus the ordered loss schedule.
std::pair<TransferMatrix, std::vector<LossEvent>> compile_transfer(const CircuitIR& circuit);

/// Unitary segments split at every loss element.
CompiledSchedule compile_segments(const CircuitIR& circuit);

// ---------------------------------------------------------------------------
// Time-bin loop programs.
//
// A loop of delay d couples, at the arrival of bin w (1-based), the arriving
// bin with whatever entered the loop at bin w-d.  per_bin_transmissivity[w-1]
// is the probability that the arriving bin is transmitted into the loop
// (1 = full swap with the stored pulse, 0 = "X": the stored pulse is saved in
// the loop and the arriving bin bypasses it).  per_bin_phase[w-1] is applied
// to the arriving bin before the coupler.  Each round trip a pulse spends
// stored in the loop contributes one loop_phase shift and one loop_loss_eta
// loss channel.
// ---------------------------------------------------------------------------

struct LoopSpec {
    int delay = 1;
    std::vector<double> per_bin_transmissivity;
    std::vector<double> per_bin_phase;
    double loop_loss_eta = 1.0;
    double loop_phase = 0.0;
    // Optional per-event override of the storage loss (indexed like the bins:
    // entry w-1 is the eta for the round trip ending at the coupling for bin
    // w).  Empty means loop_loss_eta everywhere.  Used to exempt a stored
    // path whose attenuation is accounted for elsewhere.
    std::vector<double> storage_eta_override;
};

struct TimeBinProgram {
    int time_bins = 0;
    std::vector<LoopSpec> loops;

    void validate() const;
};

/// Unravels the loops into a static circuit over time_bins modes.
CircuitIR compile_timebin(const TimeBinProgram& program);

/// F(j,k) = w^{jk}/sqrt(N), w = exp(2 pi i / N).
Eigen::MatrixXcd build_fourier(int n_plus_1);

/// Block of U on the given (0-based) rows and columns.
Eigen::MatrixXcd extract_submatrix(const TransferMatrix& U,
                                   const std::vector<int>& rows,
                                   const std::vector<int>& cols);

struct DeviceCertificate;  // protocol.hpp

struct BorealisOptions {
    // When set, the storage losses of the input mode's long hold in the first
    // delay loop are not emitted; the caller applies that attenuation to the
    // input state directly.
    bool exempt_input_loop_storage = false;
    // Detection losses (common efficiency and per-channel efficiency) are
    // attached to every detected mode, so the teleported mode reports raw
    // detector statistics.  Clearing this keeps the teleported mode's
    // delivered state unattenuated by its own detector.
    bool detection_loss_on_output = true;
};

/// The 20-bin teleamplification program: SMSVs enter in bins 1-3, a
/// symmetric coupler forms a TMSV from bins 1-2, a tunable 1-tau coupler sets
/// the gain between bins 2 and 8, and two further couplers realize the
/// three-mode Fourier stage on bins 8/14/20.  With a certificate, loop losses
/// and detection efficiencies are inserted as Loss elements.
CircuitIR build_borealis_teleamp(double tau,
                                 const DeviceCertificate* certificate = nullptr,
                                 const BorealisOptions& options = {});

/// The time-bin program behind build_borealis_teleamp, for inspection.
TimeBinProgram borealis_teleamp_program(double tau,
                                        const DeviceCertificate* certificate = nullptr,
                                        const BorealisOptions& options = {});

/// Lossless (n+3)-mode circuit teleamplifying mode 3 onto mode 2: TMSV pair
/// on modes 0/1, tunable coupler from the Fock carrier (mode 1) to the output
/// port (mode 2), Fourier transform over modes [3, 1, 4, ..., n+2].
CircuitIR build_ideal_teleamp(int n, double g);

/// Fourier input/output ports of build_ideal_teleamp, in Fourier order.
std::vector<int> ideal_teleamp_fourier_ports(int n);

/// Reference 20x20 transfer matrix of the teleamplification layout as a
/// closed form in tau.
TransferMatrix borealis_reference_transfer(double tau);

struct ValidationReport {
    struct Mismatch {
        int row = 0;  // 1-based, matching the printed report
        int col = 0;
        Complex expected;
        Complex actual;
    };
    double max_abs_deviation = 0.0;
    std::vector<Mismatch> failures;
    double tolerance = 1e-10;

    bool pass() const { return failures.empty(); }
    std::string to_string(std::size_t max_entries = 8) const;
};

/// Entrywise comparison against borealis_reference_transfer(tau).
ValidationReport validate_reference(const TransferMatrix& U, double tau,
                                    double tolerance = 1e-10);

/// Decomposes a k x k unitary into BeamSplitter/PhaseShift elements acting on
/// the given mode list (helper for embedding fixed blocks such as the Fourier
/// stage; not a general-purpose compiler).
std::vector<Element> decompose_unitary(const Eigen::MatrixXcd& V,
                                       const std::vector<int>& modes);

}  // namespace teleamp
