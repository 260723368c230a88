#pragma once

// Bounded-power signals made of a constant offset plus finitely many
// sinusoids per channel, and their line spectra.

#include <functional>
#include <optional>
#include <vector>

#include "mocc/lti.hpp"

namespace mocc {

/// amplitude * sin(omega t + phase)
struct Sinusoid {
    double amplitude = 0.0;
    double omega = 0.0;
    double phase = 0.0;
};

struct ChannelSignal {
    double offset = 0.0;
    std::vector<Sinusoid> tones;
};

/// Per-channel constant + sinusoids. When `dependency` is set the full signal
/// is W(r) + (this independent part), with W an LTI filter driven by the
/// reference the signal is paired with.
struct SignalSpec {
    std::vector<ChannelSignal> channels;
    std::optional<StateSpace> dependency;

    static SignalSpec zero(Index dim);
    static SignalSpec sine(double amplitude, double omega, double phase = 0.0);

    Index dim() const { return static_cast<Index>(channels.size()); }
    bool is_zero() const;
    void validate() const;

    /// Independent part at time t; the dependency term is stateful and is
    /// produced by the simulator.
    Vector sample(double t) const;
};

/// Component Re(phasor * e^{j omega t}); at omega = 0 the phasor is real.
struct SpectralLine {
    double omega = 0.0;
    CVector phasor;
};

/// Line spectrum of a vector signal; lines sorted by frequency, distinct.
struct PowerSpectrum {
    Index dim = 0;
    std::vector<SpectralLine> lines;

    /// ||u||_P^2: sum of |p|^2 / 2 over sinusoidal lines plus |p|^2 for the constant.
    double power_squared() const;
    Vector evaluate(double t) const;
    std::vector<double> frequencies() const;
    /// Adds phasor at omega, merging with an existing line.
    void add(double omega, const CVector& phasor);
};

/// Relative tolerance under which two frequencies are the same line.
inline constexpr double kFrequencyTol = 1e-12;

bool same_frequency(double a, double b);

/// Spectrum of the independent part. Throws Error on duplicate frequencies
/// inside one channel.
PowerSpectrum to_spectrum(const SignalSpec& s);

/// Full spectrum of s when it depends on r: independent part + W(jw) r.
/// Throws NumericalError when W has a pole at a frequency of r.
PowerSpectrum to_spectrum(const SignalSpec& s, const SignalSpec& r);

/// Two-sided (bounded) steady-state response of sys to the spectrum.
PowerSpectrum respond(const StateSpace& sys, const PowerSpectrum& in);

/// Applies an arbitrary frequency-dependent matrix map line by line.
PowerSpectrum map_lines(const PowerSpectrum& in, Index out_dim,
                        const std::function<CMatrix(double)>& transfer);

/// Line-wise sum of two spectra of equal dimension.
PowerSpectrum add(const PowerSpectrum& a, const PowerSpectrum& b);

/// Stacks [a; b] (line-wise, missing lines filled with zeros).
PowerSpectrum stack(const PowerSpectrum& a, const PowerSpectrum& b);

/// No shared frequency between the two spectra (zero lines ignored).
bool orthogonal(const PowerSpectrum& a, const PowerSpectrum& b);

}  // namespace mocc
