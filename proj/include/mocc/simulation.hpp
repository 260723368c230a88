#pragma once

// Fixed-step RK4 simulation of a plant in feedback with a lowered controller.

#include <iosfwd>
#include <string>
#include <vector>

#include "mocc/controller.hpp"
#include "mocc/signals.hpp"

namespace mocc {

struct SimOptions {
    double h = 1e-3;
    double T = 100.0;
    bool record = true;  // keep per-step samples; costs are accumulated either way
};

/// Per-step samples are stored row-wise (one row per time point).
struct SimulationTrace {
    double h = 0.0;
    double T = 0.0;
    std::size_t steps = 0;
    Vector t;
    Matrix r, w, y, u, u_c, u_q, f, z, z_m;
    Matrix x;       // plant state
    Matrix x_ctrl;  // controller state
    Matrix x_dep;   // dependency filter state of w (may have zero columns)

    // Trapezoidal averages (1/T) int ||.||^2 dt, accumulated during the run.
    double cost_z = 0.0;
    double cost_zm = 0.0;
    Vector final_state;  // [x; x_ctrl; x_dep] at t = T

    bool recorded() const { return t.size() > 0; }
};

/// Closed-form evaluator of the bounded feedforward b(t) for the reference r.
class FeedforwardEvaluator {
public:
    FeedforwardEvaluator() = default;
    FeedforwardEvaluator(const AnticausalFeedforward& ff, const SignalSpec& r);

    Vector operator()(double t) const { return spectrum_.evaluate(t); }
    /// b' + Af' b - S r at t (zero up to rounding).
    Vector residual(double t, const SignalSpec& r) const;

private:
    AnticausalFeedforward ff_;
    PowerSpectrum spectrum_;
};

/// Throws Error on divergence (non-finite state) with the time of failure.
SimulationTrace simulate(const PlantModel& plant, const ControllerSystem& ctrl, const SignalSpec& r,
                         const SignalSpec& w, const SimOptions& opts = {});

struct CostReport {
    double J = 0.0;
    double T = 0.0;
    double h = 0.0;
};

/// Trapezoidal average of ||C1 (y - r) + D12 u||^2 over the recorded trace.
CostReport finite_horizon_cost(const SimulationTrace& trace, const Matrix& C1, const Matrix& D12);

/// Header t,r,w,y,u,u_c,u_q,f,z1,z2,... then z_m and states; 17 significant digits.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);
void write_trace_csv(const std::string& path, const SimulationTrace& trace);

}  // namespace mocc
