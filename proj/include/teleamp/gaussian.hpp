#pragma once

#include <vector>

#include <Eigen/Dense>

#include "teleamp/circuit.hpp"

namespace teleamp {

// Zero-mean Gaussian state in the covariance-matrix formalism.  Conventions,
// fixed once: quadrature ordering (x_1..x_M, p_1..p_M), hbar = 1, vacuum
// covariance = I/2.
struct GaussianState {
    int modes = 0;
    Eigen::MatrixXd covariance;  // 2M x 2M, symmetric
    Eigen::VectorXd mean;        // 2M, kept identically zero here

    int x_index(int mode) const { return mode; }
    int p_index(int mode) const { return modes + mode; }
};

GaussianState vacuum(int modes);

/// Single-mode squeezing S(r e^{i phi}); at phi = 0 the Fock expansion of the
/// squeezed vacuum carries the (-tanh r)^k sign convention.
GaussianState squeeze(const GaussianState& state, int mode, double r, double phi = 0.0);

/// Covariance -> S cov S^T with the orthogonal symplectic S built from the
/// real and imaginary parts of U.  Rejects matrices whose unitarity deviation
/// exceeds 1e-8.
GaussianState apply_passive(const GaussianState& state, const TransferMatrix& U);

/// Pure loss channel of transmissivity eta on one mode.
GaussianState apply_loss(const GaussianState& state, int mode, double eta);

/// Applies the compiled unitary segments and loss channels in order.
GaussianState run_schedule(const GaussianState& state, const CompiledSchedule& schedule);

/// Partial trace down to the listed modes (row/column deletion).
GaussianState reduce(const GaussianState& state, const std::vector<int>& keep);

/// True when every listed mode is vacuum and uncorrelated with the rest.
bool modes_are_vacuum(const GaussianState& state, const std::vector<int>& modes,
                      double tol = 1e-9);

double mean_photon_number(const GaussianState& state, int mode);

/// Symplectic spectrum, ascending; all >= 1/2 for physical states.
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

/// Throws std::runtime_error if the covariance is asymmetric beyond 1e-12 or
/// violates the uncertainty relation beyond tolerance.
void check_physical(const GaussianState& state, double tol = 1e-10);

/// Husimi matrix Q and the adjacency-form matrix A = X (I - Q^{-1}) in the
/// (a_1..a_M, a_1^dag..a_M^dag) basis, X the block swap.
struct ComplexGaussianData {
    Eigen::MatrixXcd Q;
    Eigen::MatrixXcd A;
};

ComplexGaussianData to_complex_data(const GaussianState& state);

}  // namespace teleamp
