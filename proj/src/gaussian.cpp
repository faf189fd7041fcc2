#include "teleamp/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace teleamp {

namespace {

const Complex kI{0.0, 1.0};

void check_mode_index(const GaussianState& state, int mode) {
    if (mode < 0 || mode >= state.modes)
        throw std::invalid_argument("mode index out of range");
}

}  // namespace

GaussianState vacuum(int modes) {
    if (modes < 1) throw std::invalid_argument("need at least one mode");
    GaussianState state;
    state.modes = modes;
    state.covariance = 0.5 * Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
    state.mean = Eigen::VectorXd::Zero(2 * modes);
    return state;
}

GaussianState squeeze(const GaussianState& state, int mode, double r, double phi) {
    check_mode_index(state, mode);
    const int ix = state.x_index(mode);
    const int ip = state.p_index(mode);
    // 2x2 symplectic of S(r e^{i phi}) on (x, p).
    const double ch = std::cosh(r);
    const double sh = std::sinh(r);
    Eigen::Matrix2d s;
    s << ch - sh * std::cos(phi), -sh * std::sin(phi), -sh * std::sin(phi),
        ch + sh * std::cos(phi);

    GaussianState out = state;
    const int n2 = 2 * state.modes;
    Eigen::MatrixXd full = Eigen::MatrixXd::Identity(n2, n2);
    full(ix, ix) = s(0, 0);
    full(ix, ip) = s(0, 1);
    full(ip, ix) = s(1, 0);
    full(ip, ip) = s(1, 1);
    out.covariance = full * state.covariance * full.transpose();
    return out;
}

GaussianState apply_passive(const GaussianState& state, const TransferMatrix& U) {
    if (U.modes() != state.modes)
        throw std::invalid_argument("transfer matrix size does not match state");
    if (U.unitarity_deviation() > 1e-8)
        throw std::invalid_argument("transfer matrix is not unitary");
    const int M = state.modes;
    const Eigen::MatrixXd C = U.entries.real();
    const Eigen::MatrixXd D = U.entries.imag();
    Eigen::MatrixXd S(2 * M, 2 * M);
    S.topLeftCorner(M, M) = C;
    S.topRightCorner(M, M) = -D;
    S.bottomLeftCorner(M, M) = D;
    S.bottomRightCorner(M, M) = C;
    GaussianState out = state;
    out.covariance = S * state.covariance * S.transpose();
    return out;
}

GaussianState apply_loss(const GaussianState& state, int mode, double eta) {
    check_mode_index(state, mode);
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta outside [0, 1]");
    const double root = std::sqrt(eta);
    const int ix = state.x_index(mode);
    const int ip = state.p_index(mode);
    GaussianState out = state;
    out.covariance.row(ix) *= root;
    out.covariance.row(ip) *= root;
    out.covariance.col(ix) *= root;
    out.covariance.col(ip) *= root;
    out.covariance(ix, ix) += (1.0 - eta) * 0.5;
    out.covariance(ip, ip) += (1.0 - eta) * 0.5;
    return out;
}

GaussianState run_schedule(const GaussianState& state, const CompiledSchedule& schedule) {
    if (schedule.mode_count != state.modes)
        throw std::invalid_argument("schedule mode count does not match state");
    GaussianState current = state;
    for (const CompiledSchedule::Step& step : schedule.steps) {
        if (step.unitary) {
            current = apply_passive(current, TransferMatrix{*step.unitary});
        } else if (step.loss) {
            current = apply_loss(current, step.loss->mode, step.loss->eta);
        }
    }
    return current;
}

GaussianState reduce(const GaussianState& state, const std::vector<int>& keep) {
    for (int m : keep) check_mode_index(state, m);
    const int K = static_cast<int>(keep.size());
    GaussianState out;
    out.modes = K;
    out.covariance.resize(2 * K, 2 * K);
    out.mean = Eigen::VectorXd::Zero(2 * K);
    auto big = [&](int small_index) {
        return small_index < K ? state.x_index(keep[small_index])
                               : state.p_index(keep[small_index - K]);
    };
    for (int i = 0; i < 2 * K; ++i)
        for (int j = 0; j < 2 * K; ++j) out.covariance(i, j) = state.covariance(big(i), big(j));
    return out;
}

bool modes_are_vacuum(const GaussianState& state, const std::vector<int>& modes, double tol) {
    for (int m : modes) {
        check_mode_index(state, m);
        const int ix = state.x_index(m);
        const int ip = state.p_index(m);
        for (int idx : {ix, ip}) {
            for (int j = 0; j < 2 * state.modes; ++j) {
                const double expected = (j == idx) ? 0.5 : 0.0;
                if (std::abs(state.covariance(idx, j) - expected) > tol) return false;
            }
        }
    }
    return true;
}

double mean_photon_number(const GaussianState& state, int mode) {
    check_mode_index(state, mode);
    const int ix = state.x_index(mode);
    const int ip = state.p_index(mode);
    return 0.5 * (state.covariance(ix, ix) + state.covariance(ip, ip) - 1.0);
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
    const int M = state.modes;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * M, 2 * M);
    omega.topRightCorner(M, M) = Eigen::MatrixXd::Identity(M, M);
    omega.bottomLeftCorner(M, M) = -Eigen::MatrixXd::Identity(M, M);
    const Eigen::MatrixXd product = omega * state.covariance;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(product, false);
    std::vector<double> values;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double imag = solver.eigenvalues()(i).imag();
        if (imag > 0.0) values.push_back(imag);
    }
    std::sort(values.begin(), values.end());
    return values;
}

void check_physical(const GaussianState& state, double tol) {
    const Eigen::MatrixXd& cov = state.covariance;
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::runtime_error("covariance is not symmetric");
    if (state.mean.cwiseAbs().maxCoeff() > 1e-12)
        throw std::runtime_error("state mean is not zero");
    const int M = state.modes;
    Eigen::MatrixXcd h = cov.cast<Complex>();
    // cov + (i/2) Omega must be positive semidefinite.
    for (int m = 0; m < M; ++m) {
        h(m, M + m) += kI * 0.5;
        h(M + m, m) -= kI * 0.5;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol) {
        std::ostringstream os;
        os << "uncertainty relation violated: min eigenvalue "
           << solver.eigenvalues().minCoeff();
        throw std::runtime_error(os.str());
    }
}

ComplexGaussianData to_complex_data(const GaussianState& state) {
    const int M = state.modes;
    // W maps (x, p) quadratures to (a, a^dag).
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(2 * M, 2 * M);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < M; ++m) {
        W(m, m) = inv_rt2;
        W(m, M + m) = kI * inv_rt2;
        W(M + m, m) = inv_rt2;
        W(M + m, M + m) = -kI * inv_rt2;
    }
    const Eigen::MatrixXcd sigma = W * state.covariance.cast<Complex>() * W.adjoint();
    Eigen::MatrixXcd Q = sigma + 0.5 * Eigen::MatrixXcd::Identity(2 * M, 2 * M);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Q);
    const Complex det = lu.determinant();
    if (std::abs(det) < 1e-300)
        throw std::runtime_error("Husimi matrix is singular");
    const Eigen::MatrixXcd qinv = lu.solve(Eigen::MatrixXcd::Identity(2 * M, 2 * M));
    Eigen::MatrixXcd pre = Eigen::MatrixXcd::Identity(2 * M, 2 * M) - qinv;
    Eigen::MatrixXcd A(2 * M, 2 * M);
    A.topRows(M) = pre.bottomRows(M);
    A.bottomRows(M) = pre.topRows(M);
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) throw std::runtime_error("adjacency matrix is not symmetric");
    A = 0.5 * (A + A.transpose().eval());
    return ComplexGaussianData{std::move(Q), std::move(A)};
}

}  // namespace teleamp
