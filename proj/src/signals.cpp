#include "mocc/signals.hpp"

#include <algorithm>
#include <cmath>

namespace mocc {

SignalSpec SignalSpec::zero(Index dim) {
    SignalSpec s;
    s.channels.resize(static_cast<std::size_t>(dim));
    return s;
}

SignalSpec SignalSpec::sine(double amplitude, double omega, double phase) {
    SignalSpec s;
    s.channels.push_back(ChannelSignal{0.0, {Sinusoid{amplitude, omega, phase}}});
    return s;
}

bool SignalSpec::is_zero() const {
    if (dependency) return false;
    for (const auto& ch : channels) {
        if (ch.offset != 0.0) return false;
        for (const auto& tone : ch.tones) {
            if (tone.amplitude != 0.0) return false;
        }
    }
    return true;
}

void SignalSpec::validate() const {
    for (const auto& ch : channels) {
        if (!std::isfinite(ch.offset)) throw Error("SignalSpec: non-finite offset");
        for (const auto& tone : ch.tones) {
            if (!std::isfinite(tone.amplitude) || !std::isfinite(tone.omega) || !std::isfinite(tone.phase)) {
                throw Error("SignalSpec: non-finite sinusoid parameter");
            }
            if (tone.omega < 0.0) throw Error("SignalSpec: frequencies must be non-negative");
        }
    }
    if (dependency) {
        dependency->validate();
        if (dependency->outputs() != dim()) {
            throw DimensionError("SignalSpec: dependency filter output must match channel count");
        }
    }
}

Vector SignalSpec::sample(double t) const {
    Vector v(dim());
    for (Index i = 0; i < dim(); ++i) {
        const auto& ch = channels[static_cast<std::size_t>(i)];
        double acc = ch.offset;
        for (const auto& tone : ch.tones) acc += tone.amplitude * std::sin(tone.omega * t + tone.phase);
        v(i) = acc;
    }
    return v;
}

bool same_frequency(double a, double b) {
    return std::abs(a - b) <= kFrequencyTol * std::max({1.0, std::abs(a), std::abs(b)});
}

double PowerSpectrum::power_squared() const {
    double acc = 0.0;
    for (const auto& line : lines) {
        const double e = line.phasor.squaredNorm();
        acc += line.omega == 0.0 ? e : 0.5 * e;
    }
    return acc;
}

Vector PowerSpectrum::evaluate(double t) const {
    Vector v = Vector::Zero(dim);
    for (const auto& line : lines) {
        const Complex rot = std::polar(1.0, line.omega * t);
        v += (line.phasor * rot).real();
    }
    return v;
}

std::vector<double> PowerSpectrum::frequencies() const {
    std::vector<double> w;
    w.reserve(lines.size());
    for (const auto& line : lines) w.push_back(line.omega);
    return w;
}

void PowerSpectrum::add(double omega, const CVector& phasor) {
    if (phasor.size() != dim) throw DimensionError("PowerSpectrum::add: phasor dimension mismatch");
    if (omega == 0.0 || same_frequency(omega, 0.0)) omega = 0.0;
    auto it = std::lower_bound(lines.begin(), lines.end(), omega,
                               [](const SpectralLine& l, double w) { return l.omega < w && !same_frequency(l.omega, w); });
    if (it != lines.end() && same_frequency(it->omega, omega)) {
        it->phasor += phasor;
    } else {
        lines.insert(it, SpectralLine{omega, phasor});
    }
}

PowerSpectrum to_spectrum(const SignalSpec& s) {
    s.validate();
    PowerSpectrum out;
    out.dim = s.dim();
    for (Index i = 0; i < s.dim(); ++i) {
        const auto& ch = s.channels[static_cast<std::size_t>(i)];
        std::vector<double> seen;
        double constant = ch.offset;
        for (const auto& tone : ch.tones) {
            if (std::any_of(seen.begin(), seen.end(), [&](double w) { return same_frequency(w, tone.omega); })) {
                throw Error("SignalSpec: duplicate frequency " + std::to_string(tone.omega) +
                            " in channel " + std::to_string(i) + "; merge the tones first");
            }
            seen.push_back(tone.omega);
            if (tone.omega == 0.0) {
                constant += tone.amplitude * std::sin(tone.phase);
                continue;
            }
            CVector p = CVector::Zero(out.dim);
            p(i) = Complex(0.0, -1.0) * std::polar(tone.amplitude, tone.phase);
            out.add(tone.omega, p);
        }
        if (constant != 0.0) {
            CVector p = CVector::Zero(out.dim);
            p(i) = constant;
            out.add(0.0, p);
        }
    }
    return out;
}

PowerSpectrum to_spectrum(const SignalSpec& s, const SignalSpec& r) {
    PowerSpectrum out = to_spectrum(s);
    if (!s.dependency) return out;
    const PowerSpectrum rs = to_spectrum(r);
    if (s.dependency->inputs() != rs.dim) {
        throw DimensionError("SignalSpec: dependency filter input must match the reference dimension");
    }
    return add(out, respond(*s.dependency, rs));
}

PowerSpectrum map_lines(const PowerSpectrum& in, Index out_dim,
                        const std::function<CMatrix(double)>& transfer) {
    PowerSpectrum out;
    out.dim = out_dim;
    for (const auto& line : in.lines) {
        const CMatrix T = transfer(line.omega);
        if (T.rows() != out_dim || T.cols() != in.dim) throw DimensionError("map_lines: transfer dimension mismatch");
        out.lines.push_back(SpectralLine{line.omega, T * line.phasor});
    }
    return out;
}

PowerSpectrum respond(const StateSpace& sys, const PowerSpectrum& in) {
    if (sys.inputs() != in.dim) throw DimensionError("respond: system input dimension mismatch");
    return map_lines(in, sys.outputs(), [&](double w) { return frequency_response(sys, w); });
}

PowerSpectrum add(const PowerSpectrum& a, const PowerSpectrum& b) {
    if (a.dim != b.dim) throw DimensionError("PowerSpectrum add: dimension mismatch");
    PowerSpectrum out = a;
    for (const auto& line : b.lines) out.add(line.omega, line.phasor);
    return out;
}

PowerSpectrum stack(const PowerSpectrum& a, const PowerSpectrum& b) {
    PowerSpectrum out;
    out.dim = a.dim + b.dim;
    for (const auto& line : a.lines) {
        CVector p = CVector::Zero(out.dim);
        p.head(a.dim) = line.phasor;
        out.add(line.omega, p);
    }
    for (const auto& line : b.lines) {
        CVector p = CVector::Zero(out.dim);
        p.tail(b.dim) = line.phasor;
        out.add(line.omega, p);
    }
    return out;
}

bool orthogonal(const PowerSpectrum& a, const PowerSpectrum& b) {
    for (const auto& la : a.lines) {
        if (la.phasor.norm() == 0.0) continue;
        for (const auto& lb : b.lines) {
            if (lb.phasor.norm() == 0.0) continue;
            if (same_frequency(la.omega, lb.omega)) return false;
        }
    }
    return true;
}

}  // namespace mocc
