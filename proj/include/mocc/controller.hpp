#pragma once

// A single causal realization that every controller in the library is
// lowered to before it is simulated or analyzed, plus its loop with the plant.

#include <optional>
#include <string>

#include "mocc/lti.hpp"
#include "mocc/signals.hpp"

namespace mocc {

/// Bounded solution of b' = -Af' b + drive r, never integrated forward.
struct AnticausalFeedforward {
    Matrix closed_loop;  // Af, must be stable
    Matrix drive;

    Index dim() const { return closed_loop.rows(); }
    PowerSpectrum spectrum(const PowerSpectrum& r) const;
    /// (jw I + Af')^{-1} drive
    CMatrix transfer(double omega) const;
};

/// Inputs [y; r; b], outputs [u; u_c; u_q; f]. Controllers that have no
/// residual or no Q path report zeros in those channels.
struct ControllerSystem {
    std::string name;
    StateSpace sys;
    Index ny = 0;
    Index nr = 0;
    Index nb = 0;
    Index nu = 0;
    Index nf = 0;
    std::optional<AnticausalFeedforward> feedforward;

    void validate() const;
    /// y -> u with r and b removed.
    StateSpace feedback_part() const;
};

/// u = K y; u_c = u, u_q = 0, f = 0. The reference is ignored.
ControllerSystem output_feedback(const StateSpace& K, Index nr, std::string name = "K");

struct Slice {
    Index offset = 0;
    Index size = 0;
};

/// Plant in feedback with a ControllerSystem.
/// States [x; x_k], inputs [w; r; b], outputs [z; z_m; y; u; u_c; u_q; f]
/// where z = C1 (C2 x - r) + D12 u and z_m = C1 (y - r) + D12 u.
struct ClosedLoopModel {
    StateSpace sys;
    Index n_plant = 0;
    Index n_ctrl = 0;
    Slice w, r, b;
    Slice z, z_m, y, u, u_c, u_q, f;
    std::optional<AnticausalFeedforward> feedforward;

    /// Response of every output to [w; r] with b eliminated through the feedforward.
    CMatrix response(double omega) const;
    /// Steady-state line spectrum of all outputs.
    PowerSpectrum output_spectrum(const PowerSpectrum& w_spec, const PowerSpectrum& r_spec) const;
    /// Realization of the w -> z channel (the part the feedforward cannot touch).
    StateSpace w_to_z() const;
    StateSpace select(const Slice& out, const Slice& in) const;
};

ClosedLoopModel close_loop(const PlantModel& plant, const ControllerSystem& ctrl);

}  // namespace mocc
