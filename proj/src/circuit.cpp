#include "teleamp/circuit.hpp"
#include "teleamp/protocol.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace teleamp {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

void check_mode(int mode, int mode_count, const char* what) {
    if (mode < 0 || mode >= mode_count) {
        std::ostringstream os;
        os << what << ": mode index " << mode << " out of range for " << mode_count << " modes";
        throw std::invalid_argument(os.str());
    }
}

void check_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream os;
        os << what << " = " << x << " outside [0, 1]";
        throw std::invalid_argument(os.str());
    }
}

// Left-multiplies the 2x2 beam-splitter block onto rows (a, b) of U.
void apply_bs_rows(Eigen::MatrixXcd& U, const BeamSplitter& bs) {
    const double t = std::sqrt(bs.transmissivity);
    const double r = std::sqrt(1.0 - bs.transmissivity);
    const Complex u = std::exp(-kI * bs.phase) * r;
    const Complex v = -std::exp(kI * bs.phase) * r;
    Eigen::RowVectorXcd row_a = U.row(bs.mode_a);
    Eigen::RowVectorXcd row_b = U.row(bs.mode_b);
    U.row(bs.mode_a) = t * row_a + u * row_b;
    U.row(bs.mode_b) = v * row_a + t * row_b;
}

}  // namespace

CircuitIR& CircuitIR::bs(int a, int b, double transmissivity, double phase) {
    elements.push_back(BeamSplitter{a, b, transmissivity, phase});
    return *this;
}

CircuitIR& CircuitIR::ps(int mode, double theta) {
    elements.push_back(PhaseShift{mode, theta});
    return *this;
}

CircuitIR& CircuitIR::loss(int mode, double eta) {
    elements.push_back(Loss{mode, eta});
    return *this;
}

void CircuitIR::validate() const {
    if (mode_count <= 0) throw std::invalid_argument("circuit must have at least one mode");
    for (const Element& el : elements) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, BeamSplitter>) {
                    check_mode(e.mode_a, mode_count, "beam splitter");
                    check_mode(e.mode_b, mode_count, "beam splitter");
                    if (e.mode_a == e.mode_b)
                        throw std::invalid_argument("beam splitter modes must be distinct");
                    check_unit_interval(e.transmissivity, "beam splitter transmissivity");
                } else if constexpr (std::is_same_v<T, PhaseShift>) {
                    check_mode(e.mode, mode_count, "phase shift");
                } else {
                    check_mode(e.mode, mode_count, "loss");
                    check_unit_interval(e.eta, "loss eta");
                }
            },
            el);
    }
}

double TransferMatrix::unitarity_deviation() const {
    const Eigen::MatrixXcd gram = entries * entries.adjoint();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(entries.rows(), entries.cols());
    return (gram - id).cwiseAbs().maxCoeff();
}

std::pair<TransferMatrix, std::vector<LossEvent>> compile_transfer(const CircuitIR& circuit) {
    circuit.validate();
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(circuit.mode_count, circuit.mode_count);
    std::vector<LossEvent> losses;
    for (std::size_t pos = 0; pos < circuit.elements.size(); ++pos) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, BeamSplitter>) {
                    apply_bs_rows(U, e);
                } else if constexpr (std::is_same_v<T, PhaseShift>) {
                    U.row(e.mode) *= std::exp(kI * e.theta);
                } else {
                    losses.push_back(LossEvent{pos, e.mode, e.eta});
                }
            },
            circuit.elements[pos]);
    }
    return {TransferMatrix{std::move(U)}, std::move(losses)};
}

CompiledSchedule compile_segments(const CircuitIR& circuit) {
    circuit.validate();
    CompiledSchedule schedule;
    schedule.mode_count = circuit.mode_count;
    Eigen::MatrixXcd segment =
        Eigen::MatrixXcd::Identity(circuit.mode_count, circuit.mode_count);
    bool segment_nontrivial = false;
    for (std::size_t pos = 0; pos < circuit.elements.size(); ++pos) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, BeamSplitter>) {
                    apply_bs_rows(segment, e);
                    segment_nontrivial = true;
                } else if constexpr (std::is_same_v<T, PhaseShift>) {
                    segment.row(e.mode) *= std::exp(kI * e.theta);
                    segment_nontrivial = true;
                } else {
                    if (segment_nontrivial) {
                        schedule.steps.push_back({segment, std::nullopt});
                        segment = Eigen::MatrixXcd::Identity(circuit.mode_count,
                                                             circuit.mode_count);
                        segment_nontrivial = false;
                    }
                    schedule.steps.push_back({std::nullopt, LossEvent{pos, e.mode, e.eta}});
                }
            },
            circuit.elements[pos]);
    }
    if (segment_nontrivial) schedule.steps.push_back({segment, std::nullopt});
    return schedule;
}

void TimeBinProgram::validate() const {
    if (time_bins <= 0) throw std::invalid_argument("time_bins must be positive");
    int last_delay = 0;
    for (const LoopSpec& loop : loops) {
        if (loop.delay <= last_delay)
            throw std::invalid_argument("loop delays must be strictly increasing");
        last_delay = loop.delay;
        const auto n = static_cast<std::size_t>(time_bins);
        if (loop.per_bin_transmissivity.size() != n || loop.per_bin_phase.size() != n)
            throw std::invalid_argument("per-bin lists must have one entry per time bin");
        if (!loop.storage_eta_override.empty() && loop.storage_eta_override.size() != n)
            throw std::invalid_argument("storage override must have one entry per time bin");
        for (double t : loop.per_bin_transmissivity) check_unit_interval(t, "coupler transmissivity");
        check_unit_interval(loop.loop_loss_eta, "loop loss eta");
        for (double e : loop.storage_eta_override) check_unit_interval(e, "storage loss eta");
    }
}

CircuitIR compile_timebin(const TimeBinProgram& program) {
    program.validate();
    const int N = program.time_bins;
    CircuitIR circuit(N);

    for (const LoopSpec& loop : program.loops) {
        const int d = loop.delay;
        // One flag per loop slot: does the slot hold a program pulse, or
        // still the loop's initial vacuum?
        std::vector<bool> slot_real(static_cast<std::size_t>(std::min(d, N)), false);

        auto storage_eta = [&](int event) {
            return loop.storage_eta_override.empty() ? loop.loop_loss_eta
                                                     : loop.storage_eta_override[event - 1];
        };
        auto emit_storage = [&](int wire, int end_event) {
            if (loop.loop_phase != 0.0) circuit.ps(wire, loop.loop_phase);
            const double eta = storage_eta(end_event);
            if (eta < 1.0) circuit.loss(wire, eta);
        };

        for (int w = 1; w <= N; ++w) {
            const int b = w - 1;
            const double T = loop.per_bin_transmissivity[b];
            const double phase = loop.per_bin_phase[b];
            const int slot = (w - 1) % std::min(d, N);
            constexpr double tol = 1e-12;

            if (w <= d || !slot_real[slot]) {
                // The arriving bin meets the loop's initial vacuum: only a
                // clean bypass or a full swap keeps the program unitary.
                if (T <= tol) {
                    if (phase != 0.0) circuit.ps(b, phase);
                    continue;
                }
                if (T >= 1.0 - tol) {
                    if (w + d > N)
                        throw std::invalid_argument(
                            "coupler at bin " + std::to_string(w) +
                            " stores past the last time bin");
                    if (phase != 0.0) circuit.ps(b, phase);
                    emit_storage(b, w + d);
                    slot_real[slot] = true;
                    continue;
                }
                throw std::invalid_argument(
                    "coupler at bin " + std::to_string(w) +
                    " partially couples to a bin outside the program");
            }

            // Regular coupling: stored content on wire w-d, arriving bin w.
            if (phase != 0.0) circuit.ps(b, phase);
            if (T < 1.0 - tol) circuit.bs(b - d, b, T, 0.0);
            if (w + d <= N) emit_storage(b, w + d);
        }
    }
    return circuit;
}

Eigen::MatrixXcd build_fourier(int n_plus_1) {
    if (n_plus_1 < 1) throw std::invalid_argument("Fourier size must be positive");
    const int N = n_plus_1;
    Eigen::MatrixXcd F(N, N);
    const double norm = 1.0 / std::sqrt(static_cast<double>(N));
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
            F(j, k) = norm * std::exp(kI * (2.0 * kPi * j * k / N));
    return F;
}

Eigen::MatrixXcd extract_submatrix(const TransferMatrix& U, const std::vector<int>& rows,
                                   const std::vector<int>& cols) {
    Eigen::MatrixXcd block(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        check_mode(rows[i], U.modes(), "submatrix row");
        for (std::size_t j = 0; j < cols.size(); ++j) {
            check_mode(cols[j], U.modes(), "submatrix col");
            block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                U.entries(rows[i], cols[j]);
        }
    }
    return block;
}

TimeBinProgram borealis_teleamp_program(double tau, const DeviceCertificate* certificate,
                                        const BorealisOptions& options) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
    constexpr int N = 20;

    LoopSpec loop1;
    loop1.delay = 1;
    loop1.per_bin_transmissivity.assign(N, 0.0);
    loop1.per_bin_phase.assign(N, 0.0);
    // Bin 1 enters the loop, bin 2 meets it on a symmetric coupler (TMSV),
    // bin 3 (the state to be amplified) swaps in and is reflected for eleven
    // round trips before a balanced coupler releases half of it at bin 15;
    // the other half stays stored until the end of the program.
    loop1.per_bin_transmissivity[0] = 1.0;
    loop1.per_bin_transmissivity[1] = 0.5;
    loop1.per_bin_transmissivity[2] = 1.0;
    loop1.per_bin_transmissivity[14] = 0.5;
    loop1.per_bin_phase[1] = kPi / 2.0;
    loop1.per_bin_phase[14] = kPi;

    LoopSpec loop2;
    loop2.delay = 6;
    loop2.per_bin_transmissivity.assign(N, 1.0);
    loop2.per_bin_phase.assign(N, 0.0);
    // The tunable coupler between bins 2 and 8 sets the gain; the couplers at
    // bins 14 and 20 close the three-mode Fourier stage on bins 8/14/20.
    loop2.per_bin_transmissivity[7] = 1.0 - tau;
    loop2.per_bin_transmissivity[13] = 1.0 / 3.0;
    loop2.per_bin_transmissivity[19] = 0.5;
    loop2.per_bin_phase[1] = -kPi / 2.0;
    loop2.per_bin_phase[7] = kPi;
    loop2.per_bin_phase[19] = kPi / 2.0;

    LoopSpec loop3;
    loop3.delay = 36;
    loop3.per_bin_transmissivity.assign(N, 0.0);
    loop3.per_bin_phase.assign(N, 0.0);

    if (certificate != nullptr) {
        loop1.loop_loss_eta = certificate->loop_efficiencies[0];
        loop2.loop_loss_eta = certificate->loop_efficiencies[1];
        loop3.loop_loss_eta = certificate->loop_efficiencies[2];
        if (options.exempt_input_loop_storage) {
            // Round trips of the held input state end at the couplings for
            // bins 4..15; their attenuation is applied to the input upfront.
            loop1.storage_eta_override.assign(N, loop1.loop_loss_eta);
            for (int w = 4; w <= 15; ++w) loop1.storage_eta_override[w - 1] = 1.0;
        }
    }

    TimeBinProgram program;
    program.time_bins = N;
    program.loops = {loop1, loop2, loop3};
    return program;
}

CircuitIR build_borealis_teleamp(double tau, const DeviceCertificate* certificate,
                                 const BorealisOptions& options) {
    CircuitIR circuit = compile_timebin(borealis_teleamp_program(tau, certificate, options));
    if (certificate != nullptr) {
        constexpr int teleported_mode = 1;
        for (int b = 0; b < circuit.mode_count; ++b) {
            if (b == teleported_mode && !options.detection_loss_on_output) continue;
            if (certificate->common_efficiency < 1.0)
                circuit.loss(b, certificate->common_efficiency);
            // Detectors are assigned round-robin by time bin (1-based) over
            // the 16 channels.
            const double channel = certificate->relative_channel_efficiencies[(b + 1) % 16];
            if (channel < 1.0) circuit.loss(b, channel);
        }
    }
    return circuit;
}

std::vector<int> ideal_teleamp_fourier_ports(int n) {
    std::vector<int> ports{3, 1};
    for (int m = 4; m < n + 3; ++m) ports.push_back(m);
    return ports;
}

CircuitIR build_ideal_teleamp(int n, double g) {
    if (n < 1) throw std::invalid_argument("cutoff order n must be at least 1");
    if (!(g > 0.0)) throw std::invalid_argument("gain must be positive");
    const double tau = 1.0 / (1.0 + g * g);
    CircuitIR circuit(n + 3);
    // TMSV pair on modes 0/1; detecting n photons on mode 0 heralds the Fock
    // carrier |n> on mode 1.
    circuit.bs(0, 1, 0.5, -kPi / 2.0);
    // Tunable coupler: the carrier keeps sqrt(tau) toward the Fourier stage,
    // sqrt(1-tau) feeds the teleported output port on mode 2.
    circuit.bs(2, 1, tau, 0.0);
    const std::vector<int> ports = ideal_teleamp_fourier_ports(n);
    for (Element& el : decompose_unitary(build_fourier(n + 1), ports))
        circuit.elements.push_back(el);
    return circuit;
}

TransferMatrix borealis_reference_transfer(double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
    constexpr int N = 20;
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(N, N);
    const double s = std::sqrt(tau);
    const double c = std::sqrt(1.0 - tau);
    const double r2 = std::sqrt(2.0);
    const double r3 = std::sqrt(3.0);
    const double r6 = std::sqrt(6.0);
    const Complex w = std::exp(kI * (2.0 * kPi / 3.0));
    const Complex w2 = w * w;

    U(0, 0) = 1.0 / r2;
    U(0, 1) = kI / r2;
    U(1, 0) = kI * c / r2;
    U(1, 1) = c / r2;
    U(1, 8) = -s;
    U(7, 0) = -kI * s / r6;
    U(7, 1) = -s / r6;
    U(7, 2) = -1.0 / r3;
    U(7, 8) = -c / r3;
    U(7, 14) = -1.0 / r3;
    U(13, 0) = kI * s / r6;
    U(13, 1) = s / r6;
    U(13, 2) = w2 / r3;
    U(13, 8) = c / r3;
    U(13, 14) = w / r3;
    U(19, 0) = -kI * s / r6;
    U(19, 1) = -s / r6;
    U(19, 2) = -w / r3;
    U(19, 8) = -c / r3;
    U(19, 14) = -w2 / r3;
    // Bins that only shift by one slot through the delay loops.
    for (int r : {2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 14, 15, 16, 17, 18}) U(r, r + 1) = 1.0;
    return TransferMatrix{std::move(U)};
}

ValidationReport validate_reference(const TransferMatrix& U, double tau, double tolerance) {
    if (U.modes() != 20) throw std::invalid_argument("expected a 20x20 transfer matrix");
    const TransferMatrix ref = borealis_reference_transfer(tau);
    ValidationReport report;
    report.tolerance = tolerance;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double dev = std::abs(U.entries(i, j) - ref.entries(i, j));
            report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
            if (dev > tolerance)
                report.failures.push_back(
                    {i + 1, j + 1, ref.entries(i, j), U.entries(i, j)});
        }
    }
    return report;
}

std::string ValidationReport::to_string(std::size_t max_entries) const {
    std::ostringstream os;
    os << (pass() ? "PASS" : "FAIL") << ": max deviation " << max_abs_deviation
       << " (tolerance " << tolerance << ")";
    if (!pass()) {
        os << ", " << failures.size() << " failing entries";
        for (std::size_t k = 0; k < failures.size() && k < max_entries; ++k) {
            const Mismatch& m = failures[k];
            os << "\n  (" << m.row << "," << m.col << ") expected (" << m.expected.real()
               << "," << m.expected.imag() << ") got (" << m.actual.real() << ","
               << m.actual.imag() << ")";
        }
        if (failures.size() > max_entries) os << "\n  ...";
    }
    return os.str();
}

std::vector<Element> decompose_unitary(const Eigen::MatrixXcd& V, const std::vector<int>& modes) {
    const int k = static_cast<int>(V.rows());
    if (V.cols() != k || static_cast<int>(modes.size()) != k)
        throw std::invalid_argument("decompose_unitary: shape mismatch");
    if ((V * V.adjoint() - Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("decompose_unitary: matrix is not unitary");

    Eigen::MatrixXcd W = V;
    struct Rotation {
        int upper;
        double T;
        double phi;
    };
    std::vector<Rotation> rotations;
    for (int j = 0; j < k - 1; ++j) {
        for (int i = k - 1; i > j; --i) {
            if (std::abs(W(i, j)) < 1e-14) continue;
            double T = 0.0, phi = 0.0;
            if (std::abs(W(i - 1, j)) >= 1e-14) {
                const Complex ratio = W(i, j) / W(i - 1, j);
                T = 1.0 / (1.0 + std::norm(ratio));
                phi = std::arg(ratio);
            }
            const double t = std::sqrt(T);
            const double r = std::sqrt(1.0 - T);
            const Complex u = std::exp(-kI * phi) * r;
            const Complex v = -std::exp(kI * phi) * r;
            Eigen::RowVectorXcd upper = W.row(i - 1);
            Eigen::RowVectorXcd lower = W.row(i);
            W.row(i - 1) = t * upper + u * lower;
            W.row(i) = v * upper + t * lower;
            rotations.push_back({i - 1, T, phi});
        }
    }

    std::vector<Element> elements;
    for (int i = 0; i < k; ++i) {
        const double theta = std::arg(W(i, i));
        if (std::abs(theta) > 1e-14) elements.push_back(PhaseShift{modes[i], theta});
    }
    for (auto it = rotations.rbegin(); it != rotations.rend(); ++it)
        elements.push_back(
            BeamSplitter{modes[it->upper], modes[it->upper + 1], it->T, it->phi + kPi});
    return elements;
}

}  // namespace teleamp
