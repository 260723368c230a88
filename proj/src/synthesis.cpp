#include "mocc/synthesis.hpp"

#include <cmath>

namespace mocc {

namespace {

bool is_psd(const Matrix& X) {
    if (X.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (X + X.transpose()));
    return es.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, X.norm());
}

Matrix spd_inverse(const Matrix& R, const char* what) {
    Eigen::LLT<Matrix> llt(R);
    if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " must be positive definite");
    return llt.solve(Matrix::Identity(R.rows(), R.cols()));
}

}  // namespace

LqtDesign lqt_synthesize(const PlantModel& plant, const RiccatiOptions& opts) {
    plant.validate();
    const Matrix Cz = plant.Cz();
    LqtDesign d;
    d.R1 = plant.R1();
    const Matrix R1i = spd_inverse(d.R1, "R1");
    CareProblem p{plant.A, plant.B2, Cz.transpose() * Cz, d.R1, Cz.transpose() * plant.D12};
    d.Pi = solve_care(p, opts);
    const Matrix PB = d.Pi * plant.B2 + Cz.transpose() * plant.D12;
    d.F = -R1i * PB.transpose();
    d.S_ff = plant.C2.transpose() * plant.C1.transpose() * plant.C1 - PB * R1i * plant.D12.transpose() * plant.C1;
    d.b_gain = -R1i * plant.B2.transpose();
    d.r_gain = R1i * plant.D12.transpose() * plant.C1;
    if (!is_stable(d.closed_loop(plant))) throw StabilityError("lqt_synthesize: A + B2 F is not stable");
    return d;
}

PowerSpectrum lqt_feedforward_spectrum(const Matrix& closed_loop, const Matrix& drive, const PowerSpectrum& r) {
    const Index n = closed_loop.rows();
    if (drive.rows() != n || drive.cols() != r.dim) throw DimensionError("feedforward: drive must be n x dim(r)");
    const CMatrix AfT = closed_loop.transpose().cast<Complex>();
    const CMatrix S = drive.cast<Complex>();
    // b' = -Af' b + S r  =>  (jw I + Af') b = S r on each line
    return map_lines(r, n, [&](double w) -> CMatrix {
        CMatrix M = AfT;
        M.diagonal().array() += Complex(0.0, w);
        Eigen::PartialPivLU<CMatrix> lu(M);
        return lu.solve(S);
    });
}

double lqt_minimal_cost(const LqtDesign& design, const PlantModel& plant, const SignalSpec& r) {
    if (r.dependency) throw Error("lqt_minimal_cost: reference must be an independent constant + sinusoid signal");
    const PowerSpectrum rs = to_spectrum(r);
    if (rs.dim != plant.p2()) throw DimensionError("lqt_minimal_cost: reference dimension must equal p2");
    const PowerSpectrum bs = lqt_feedforward_spectrum(design.closed_loop(plant), design.S_ff, rs);
    const Matrix R1i = spd_inverse(design.R1, "R1");
    const CMatrix B2t = plant.B2.transpose().cast<Complex>();
    const CMatrix DC = (plant.D12.transpose() * plant.C1).cast<Complex>();
    const CMatrix C1 = plant.C1.cast<Complex>();
    double acc = 0.0;
    for (std::size_t i = 0; i < rs.lines.size(); ++i) {
        const CVector& v = rs.lines[i].phasor;
        const CVector e = B2t * bs.lines[i].phasor - DC * v;
        const double c = (C1 * v).squaredNorm() - (e.adjoint() * R1i.cast<Complex>() * e)(0, 0).real();
        acc += rs.lines[i].omega == 0.0 ? c : 0.5 * c;
    }
    return acc;
}

std::string to_string(HinfFailure f) {
    switch (f) {
        case HinfFailure::none: return "feasible";
        case HinfFailure::control_riccati: return "control Riccati (P1) has no stabilizing solution";
        case HinfFailure::control_indefinite: return "control Riccati solution P1 is not positive semidefinite";
        case HinfFailure::filter_riccati: return "filter Riccati (P2) has no stabilizing solution";
        case HinfFailure::filter_indefinite: return "filter Riccati solution P2 is not positive semidefinite";
        case HinfFailure::coupling: return "coupling condition rho(P1 P2) < gamma^2 violated";
        case HinfFailure::bad_gamma: return "gamma must be positive and finite";
    }
    return "unknown";
}

HinfResult hinf_central(const PlantModel& plant, double gamma) {
    plant.validate();
    HinfResult out;
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        out.failure = HinfFailure::bad_gamma;
        out.detail = to_string(out.failure);
        return out;
    }
    const Matrix& A = plant.A;
    const Matrix& B1 = plant.B1;
    const Matrix& B2 = plant.B2;
    const Matrix& C2 = plant.C2;
    const Matrix& D12 = plant.D12;
    const Matrix& D21 = plant.D21;
    const Matrix Cz = plant.Cz();
    const Matrix R1i = spd_inverse(plant.R1(), "R1");
    const Matrix R2i = spd_inverse(plant.R2(), "R2");
    const double g2 = 1.0 / (gamma * gamma);
    const Index n = plant.n();

    auto fail = [&](HinfFailure f, const std::string& why) {
        out.failure = f;
        out.detail = to_string(f) + (why.empty() ? "" : ": " + why);
        return out;
    };

    Matrix P1, P2;
    {
        const Matrix Ac = A - B2 * R1i * D12.transpose() * Cz;
        const Matrix G = B2 * R1i * B2.transpose() - g2 * B1 * B1.transpose();
        const Matrix Q = Cz.transpose() * (Matrix::Identity(plant.p1(), plant.p1()) - D12 * R1i * D12.transpose()) * Cz;
        try {
            P1 = solve_hamiltonian_riccati(Ac, 0.5 * (G + G.transpose()), 0.5 * (Q + Q.transpose()));
        } catch (const NumericalError& e) {
            return fail(HinfFailure::control_riccati, e.what());
        }
        if (!is_psd(P1)) return fail(HinfFailure::control_indefinite, "");
    }
    {
        const Matrix Ao = (A - B1 * D21.transpose() * R2i * C2).transpose();
        const Matrix G = C2.transpose() * R2i * C2 - g2 * Cz.transpose() * Cz;
        const Matrix Q = B1 * (Matrix::Identity(plant.m1(), plant.m1()) - D21.transpose() * R2i * D21) * B1.transpose();
        try {
            P2 = solve_hamiltonian_riccati(Ao, 0.5 * (G + G.transpose()), 0.5 * (Q + Q.transpose()));
        } catch (const NumericalError& e) {
            return fail(HinfFailure::filter_riccati, e.what());
        }
        if (!is_psd(P2)) return fail(HinfFailure::filter_indefinite, "");
    }
    const Matrix P12 = P1 * P2;
    const double rho = n == 0 ? 0.0 : P12.eigenvalues().cwiseAbs().maxCoeff();
    if (!(rho < gamma * gamma * (1.0 - kCouplingMargin))) {
        return fail(HinfFailure::coupling, "rho = " + std::to_string(rho) + ", gamma^2 = " + std::to_string(gamma * gamma));
    }

    HinfDesign d;
    d.gamma = gamma;
    d.P1 = P1;
    d.P2 = P2;
    d.Cinf = -R1i * (P1 * B2 + Cz.transpose() * D12).transpose();
    d.Linf = -(C2 * P2 + D21 * B1.transpose()).transpose() * R2i;
    Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) - g2 * P2 * P1);
    if (!lu.isInvertible()) return fail(HinfFailure::coupling, "I - gamma^-2 P2 P1 is singular");
    d.Binf = -lu.solve(d.Linf);
    d.Ainf = A + g2 * B1 * B1.transpose() * P1 + B2 * d.Cinf - d.Binf * (C2 + g2 * D21 * B1.transpose() * P1);
    out.design = std::move(d);
    return out;
}

GammaSearch hinf_gamma_search(const PlantModel& plant, double tol) {
    if (!(tol > 0.0)) throw Error("hinf_gamma_min: tol must be positive");
    constexpr double cap = 1e6;
    constexpr int max_iter = 200;
    GammaSearch s;
    double hi = 1.0;
    while (!hinf_central(plant, hi).feasible()) {
        hi *= 2.0;
        if (hi > cap) throw NumericalError("hinf_gamma_min: no feasible gamma below 1e6");
    }
    double lo = std::min(tol, 0.5 * hi);
    if (hinf_central(plant, lo).feasible()) {
        s.gamma = lo;
        return s;
    }
    while (hi - lo > tol && s.iterations < max_iter) {
        const double mid = 0.5 * (lo + hi);
        if (hinf_central(plant, mid).feasible()) hi = mid; else lo = mid;
        ++s.iterations;
    }
    s.gamma = hi;
    s.infeasible = lo;
    return s;
}

double hinf_gamma_min(const PlantModel& plant, double tol) { return hinf_gamma_search(plant, tol).gamma; }

Matrix pick_observer_gain(const PlantModel& plant, const ObserverGainSpec& spec) {
    plant.validate();
    Matrix L;
    if (const Matrix* given = std::get_if<Matrix>(&spec)) {
        L = *given;
        if (L.rows() != plant.n() || L.cols() != plant.p2()) throw DimensionError("observer gain must be n x p2");
    } else {
        const auto& w = std::get<ObserverWeights>(spec);
        CareProblem p{plant.A.transpose(), plant.C2.transpose(), w.W, w.V, Matrix()};
        const Matrix P = solve_care(p);
        L = -P * plant.C2.transpose() * spd_inverse(w.V, "V");
    }
    const double abscissa = spectral_abscissa(plant.A + L * plant.C2);
    if (!(abscissa < -kStabilityMargin)) {
        throw StabilityError("observer gain: A + L C2 is not stable (spectral abscissa " + std::to_string(abscissa) + ")");
    }
    return L;
}

}  // namespace mocc
