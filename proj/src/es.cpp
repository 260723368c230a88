#include "mocc/es.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "mocc/types.hpp"

namespace mocc {

void EsState::validate() const {
    if (!(amplitude > 0.0)) throw Error("es: probe amplitude must be positive");
    if (!(filter > 0.0 && filter < 1.0)) throw Error("es: high-pass pole must lie in (0, 1)");
    const double turns = omega / M_PI;
    if (!std::isfinite(omega) || std::abs(turns - std::round(turns)) < 1e-12) {
        throw Error("es: probe frequency must not be an integer multiple of pi");
    }
    if (!std::isfinite(gain) || !std::isfinite(alpha_hat)) throw Error("es: non-finite state");
}

double EsState::probe() const { return alpha_hat + amplitude * std::cos(omega * k); }

EsState es_step(const EsState& s, double J) {
    EsState n = s;
    if (!n.primed) {
        // Seed the filter with the first cost so the step response of the
        // high-pass does not kick the estimate.
        n.eta = J;
        n.primed = true;
    }
    const double zeta = J - n.eta;
    n.eta += n.filter * zeta;
    n.alpha_hat -= n.gain * n.amplitude * std::cos(n.omega * n.k) * zeta;
    ++n.k;
    return n;
}

double TuneTrace::trailing_mean(std::size_t window) const {
    if (samples.empty()) throw Error("trailing_mean: empty trace");
    const std::size_t w = std::min(window, samples.size());
    double acc = 0.0;
    for (std::size_t i = samples.size() - w; i < samples.size(); ++i) acc += samples[i].alpha_hat;
    return acc / static_cast<double>(w);
}

TuneTrace tune_alpha(const std::function<double(double)>& cost, EsState s, int iterations) {
    s.validate();
    TuneTrace trace;
    trace.samples.reserve(static_cast<std::size_t>(std::max(iterations, 0)));
    for (int i = 0; i < iterations; ++i) {
        const double alpha = s.probe();
        const double J = cost(alpha);
        if (!std::isfinite(J)) throw Error("tune_alpha: non-finite cost at alpha = " + std::to_string(alpha));
        const int k = s.k;
        s = es_step(s, J);
        trace.samples.push_back({k, alpha, J, s.alpha_hat});
    }
    return trace;
}

void write_tune_csv(std::ostream& os, const TuneTrace& trace) {
    os << "k,alpha_probe,J,alpha_hat\n" << std::setprecision(17);
    for (const auto& s : trace.samples) os << s.k << ',' << s.alpha_probe << ',' << s.J << ',' << s.alpha_hat << '\n';
}

void write_tune_csv(const std::string& path, const TuneTrace& trace) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_tune_csv(os, trace);
}

}  // namespace mocc
