#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "teleamp/circuit.hpp"
#include "teleamp/protocol.hpp"
#include "teleamp/serialize.hpp"

using namespace teleamp;

namespace {

constexpr double kPi = std::numbers::pi;

CircuitIR random_lossless_circuit(std::mt19937& rng, int modes, int depth) {
    std::uniform_int_distribution<int> mode_dist(0, modes - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    CircuitIR circuit(modes);
    for (int i = 0; i < depth; ++i) {
        if (unit(rng) < 0.3) {
            circuit.ps(mode_dist(rng), angle(rng));
        } else {
            int a = mode_dist(rng);
            int b = mode_dist(rng);
            while (b == a) b = mode_dist(rng);
            circuit.bs(a, b, unit(rng), angle(rng));
        }
    }
    return circuit;
}

}  // namespace

TEST_CASE("empty circuit compiles to the identity") {
    CircuitIR circuit(3);
    auto [U, losses] = compile_transfer(circuit);
    CHECK(losses.empty());
    CHECK((U.entries - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single symmetric beam splitter has half probability everywhere") {
    CircuitIR circuit(2);
    circuit.ps(1, kPi / 2.0).bs(0, 1, 0.5, 0.0);
    auto [U, losses] = compile_transfer(circuit);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(std::norm(U.entries(i, j)) - 0.5) < 1e-12);
    CHECK(U.is_unitary(1e-12));
}

TEST_CASE("invalid element indices are rejected") {
    CircuitIR circuit(2);
    circuit.bs(0, 2, 0.5, 0.0);
    CHECK_THROWS_AS(compile_transfer(circuit), std::invalid_argument);
    CircuitIR dup(2);
    dup.bs(1, 1, 0.5, 0.0);
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("random lossless circuits compile to unitaries") {
    std::mt19937 rng(20240517);
    for (int trial = 0; trial < 25; ++trial) {
        CircuitIR circuit = random_lossless_circuit(rng, 5, 30);
        auto [U, losses] = compile_transfer(circuit);
        CHECK(losses.empty());
        CHECK(U.unitarity_deviation() < 1e-10);
    }
}

TEST_CASE("loss elements are extracted in order, not folded into the unitary") {
    CircuitIR circuit(2);
    circuit.bs(0, 1, 0.5, 0.0).loss(0, 0.9).ps(1, 0.3).loss(1, 0.8);
    auto [U, losses] = compile_transfer(circuit);
    REQUIRE(losses.size() == 2);
    CHECK(losses[0].mode == 0);
    CHECK(losses[0].eta == doctest::Approx(0.9));
    CHECK(losses[0].position == 1);
    CHECK(losses[1].mode == 1);
    CHECK(losses[1].position == 3);
    CHECK(U.is_unitary(1e-12));
}

TEST_CASE("reference transfer matrix is unitary across the tau grid") {
    for (double tau : {1.0 / 65, 1.0 / 17, 0.2, 0.5, 0.8}) {
        CHECK(borealis_reference_transfer(tau).unitarity_deviation() < 1e-12);
    }
}

TEST_CASE("compiled teleamp layout matches the reference matrix") {
    for (double tau : {1.0 / 65, 1.0 / 17, 0.2, 0.5, 0.8}) {
        CAPTURE(tau);
        auto [U, losses] = compile_transfer(build_borealis_teleamp(tau));
        CHECK(losses.empty());
        CHECK(U.is_unitary(1e-10));
        const ValidationReport report = validate_reference(U, tau);
        CHECK(report.pass());
        CHECK(report.max_abs_deviation < 1e-10);
    }
}

TEST_CASE("validation localizes failures") {
    SUBCASE("identity fails at the first entry") {
        TransferMatrix id{Eigen::MatrixXcd::Identity(20, 20)};
        const ValidationReport report = validate_reference(id, 0.2);
        CHECK_FALSE(report.pass());
        REQUIRE_FALSE(report.failures.empty());
        CHECK(report.failures.front().row == 1);
        CHECK(report.failures.front().col == 1);
        CHECK(report.failures.front().expected.real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    }
    SUBCASE("a perturbed phase only disturbs the affected rows") {
        CircuitIR circuit = build_borealis_teleamp(0.2);
        // Drop the final Fourier phase: only the rows fed by that coupler react.
        for (Element& el : circuit.elements) {
            if (auto* ps = std::get_if<PhaseShift>(&el); ps != nullptr && ps->mode == 19) {
                ps->theta = 0.0;
            }
        }
        auto [U, losses] = compile_transfer(circuit);
        const ValidationReport report = validate_reference(U, 0.2);
        CHECK_FALSE(report.pass());
        for (const ValidationReport::Mismatch& m : report.failures) {
            CHECK((m.row == 14 || m.row == 20));
        }
    }
    SUBCASE("dimension mismatch is rejected") {
        TransferMatrix small{Eigen::MatrixXcd::Identity(3, 3)};
        CHECK_THROWS_AS(validate_reference(small, 0.2), std::invalid_argument);
    }
}

TEST_CASE("extract_submatrix returns the active block") {
    auto [U, losses] = compile_transfer(build_borealis_teleamp(0.5));
    SUBCASE("full index sets reproduce the matrix") {
        std::vector<int> all(20);
        for (int i = 0; i < 20; ++i) all[i] = i;
        CHECK((extract_submatrix(U, all, all) - U.entries).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("the 5x3 active block at tau = 1/2") {
        const Eigen::MatrixXcd M =
            extract_submatrix(U, {0, 1, 7, 13, 19}, {0, 1, 2});
        const double tau = 0.5;
        CHECK(std::abs(M(0, 0) - Complex{1.0 / std::sqrt(2.0), 0.0}) < 1e-12);
        CHECK(std::abs(M(1, 0) - Complex{0.0, std::sqrt((1 - tau) / 2.0)}) < 1e-12);
        CHECK(std::abs(M(2, 2) - Complex{-1.0 / std::sqrt(3.0), 0.0}) < 1e-12);
        const Complex w = std::exp(Complex{0.0, 2.0 * kPi / 3.0});
        CHECK(std::abs(M(3, 2) - w * w / std::sqrt(3.0)) < 1e-12);
        CHECK(std::abs(M(4, 2) + w / std::sqrt(3.0)) < 1e-12);
    }
    SUBCASE("untouched bins form an identity block") {
        const Eigen::MatrixXcd block = extract_submatrix(U, {3, 4, 5}, {4, 5, 6});
        CHECK((block - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("out-of-range indices are rejected") {
        CHECK_THROWS_AS(extract_submatrix(U, {20}, {0}), std::invalid_argument);
    }
}

TEST_CASE("fourier matrices") {
    CHECK(std::abs(build_fourier(1)(0, 0) - Complex{1.0, 0.0}) < 1e-15);
    SUBCASE("three modes match the active-column structure") {
        const Eigen::MatrixXcd F = build_fourier(3);
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                CHECK(std::abs(std::abs(F(j, k)) - 1.0 / std::sqrt(3.0)) < 1e-12);
        CHECK(std::abs(std::arg(F(1, 1)) - 2.0 * kPi / 3.0) < 1e-12);
        CHECK(std::abs(std::arg(F(2, 1)) + 2.0 * kPi / 3.0) < 1e-12);
    }
    SUBCASE("unitarity") {
        const Eigen::MatrixXcd F = build_fourier(4);
        CHECK((F * F.adjoint() - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("unitary decomposition helper reproduces its input") {
    SUBCASE("fourier blocks") {
        for (int n : {2, 3, 4, 5}) {
            const Eigen::MatrixXcd F = build_fourier(n);
            std::vector<int> modes(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) modes[static_cast<std::size_t>(i)] = i;
            CircuitIR circuit(n);
            for (const Element& el : decompose_unitary(F, modes)) circuit.elements.push_back(el);
            auto [U, losses] = compile_transfer(circuit);
            CHECK((U.entries - F).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("random unitaries on scattered modes") {
        std::mt19937 rng(7);
        std::normal_distribution<double> gauss;
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::MatrixXcd G(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) G(i, j) = Complex{gauss(rng), gauss(rng)};
            const Eigen::MatrixXcd V = Eigen::HouseholderQR<Eigen::MatrixXcd>(G).householderQ();
            CircuitIR circuit(6);
            const std::vector<int> modes{4, 1, 3};
            for (const Element& el : decompose_unitary(V, modes)) circuit.elements.push_back(el);
            auto [U, losses] = compile_transfer(circuit);
            CHECK((extract_submatrix(U, modes, modes) - V).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("timebin compilation basics") {
    SUBCASE("fully transmissive couplers give the identity") {
        TimeBinProgram program;
        program.time_bins = 20;
        LoopSpec loop;
        loop.delay = 1;
        loop.per_bin_transmissivity.assign(20, 1.0);
        loop.per_bin_phase.assign(20, 0.0);
        program.loops = {loop};
        auto [U, losses] = compile_transfer(compile_timebin(program));
        CHECK(losses.empty());
        CHECK((U.entries - Eigen::MatrixXcd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("a mode held for eleven round trips collects eleven loss entries") {
        // Bin 1 enters the loop, is reflected ten times, and is swapped out
        // when bin 12 arrives: eleven round trips in total.
        TimeBinProgram program;
        program.time_bins = 12;
        LoopSpec loop;
        loop.delay = 1;
        loop.per_bin_transmissivity.assign(12, 0.0);
        loop.per_bin_phase.assign(12, 0.0);
        loop.per_bin_transmissivity[0] = 1.0;
        loop.per_bin_transmissivity[11] = 1.0;
        loop.loop_loss_eta = 0.88;
        program.loops = {loop};
        auto [U, losses] = compile_transfer(compile_timebin(program));
        CHECK(losses.size() == 11);
        for (const LossEvent& loss : losses) CHECK(loss.eta == doctest::Approx(0.88));
        CHECK(U.is_unitary(1e-10));
    }
    SUBCASE("the teleamp input is held for twelve round trips") {
        const DeviceCertificate cert = builtin_certificate();
        const CircuitIR circuit = build_borealis_teleamp(0.2, &cert);
        auto [U, losses] = compile_transfer(circuit);
        // The reference layout swaps the input in at bin 3 and releases half
        // of it at bin 15; its storage intervals sit on wires 2..13.
        int held = 0;
        for (const LossEvent& loss : losses) {
            if (loss.eta == doctest::Approx(0.88).epsilon(1e-12) && loss.mode >= 2 &&
                loss.mode <= 13)
                ++held;
        }
        CHECK(held == 12);
    }
    SUBCASE("partial coupling to the initial loop vacuum is a structural error") {
        TimeBinProgram program;
        program.time_bins = 4;
        LoopSpec loop;
        loop.delay = 2;
        loop.per_bin_transmissivity = {0.5, 1.0, 1.0, 1.0};
        loop.per_bin_phase.assign(4, 0.0);
        program.loops = {loop};
        CHECK_THROWS_AS(compile_timebin(program), std::invalid_argument);
    }
    SUBCASE("storing past the last time bin is a structural error") {
        TimeBinProgram program;
        program.time_bins = 4;
        LoopSpec loop;
        loop.delay = 6;
        loop.per_bin_transmissivity = {1.0, 0.0, 0.0, 0.0};
        loop.per_bin_phase.assign(4, 0.0);
        program.loops = {loop};
        CHECK_THROWS_AS(compile_timebin(program), std::invalid_argument);
    }
    SUBCASE("loop delays must increase") {
        TimeBinProgram program;
        program.time_bins = 4;
        LoopSpec loop;
        loop.delay = 2;
        loop.per_bin_transmissivity.assign(4, 0.0);
        loop.per_bin_phase.assign(4, 0.0);
        program.loops = {loop, loop};
        CHECK_THROWS_AS(compile_timebin(program), std::invalid_argument);
    }
}

TEST_CASE("gain setting follows the tunable coupler") {
    // tau = 1/2 is unit gain, tau = 1/5 doubles the amplitude ratio scale,
    // tau = 1/17 corresponds to gain 4.
    CHECK(gain_tau_convert_from_tau(0.5).gain == doctest::Approx(1.0));
    CHECK(gain_tau_convert_from_tau(0.2).gain == doctest::Approx(2.0));
    CHECK(gain_tau_convert_from_tau(1.0 / 17.0).gain == doctest::Approx(4.0));
    CHECK(gain_tau_convert_from_gain(2.0).tau == doctest::Approx(0.2));
}

TEST_CASE("circuit JSON round trip") {
    CircuitIR circuit(3);
    circuit.bs(0, 1, 0.25, 0.3).ps(2, -1.2).loss(1, 0.9);
    const CircuitIR parsed = circuit_from_json(circuit_to_json(circuit));
    REQUIRE(parsed.mode_count == 3);
    REQUIRE(parsed.elements.size() == 3);
    auto [U0, l0] = compile_transfer(circuit);
    auto [U1, l1] = compile_transfer(parsed);
    CHECK((U0.entries - U1.entries).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(l1.size() == 1);
    CHECK(l1[0].eta == doctest::Approx(0.9));
}
