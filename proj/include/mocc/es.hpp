#pragma once

// Iteration-domain extremum seeking on the scalar gain alpha of Q.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mocc {

struct EsState {
    int k = 0;
    double alpha_hat = 1.0;
    double eta = 0.0;        // high-pass filter memory
    double amplitude = 0.1;  // probe amplitude a
    double omega = 1.8;      // probe frequency, rad / iteration
    double gain = 5.0;       // adaptation gain g
    double filter = 0.5;     // high-pass pole h_f
    bool primed = false;     // eta seeded with the first cost

    void validate() const;
    double probe() const;  // alpha_hat + a cos(omega k)
};

/// One update with the cost J measured at probe(). Returns the next state;
/// its probe() is the next alpha to run.
EsState es_step(const EsState& s, double J);

struct TuneSample {
    int k = 0;
    double alpha_probe = 0.0;
    double J = 0.0;
    double alpha_hat = 0.0;  // estimate after the update
};

struct TuneTrace {
    std::vector<TuneSample> samples;

    /// Mean of alpha_hat over the last `window` samples.
    double trailing_mean(std::size_t window) const;
};

/// Runs N iterations; `cost` maps a probed alpha to the measured J.
TuneTrace tune_alpha(const std::function<double(double)>& cost, EsState s, int iterations);

void write_tune_csv(std::ostream& os, const TuneTrace& trace);
void write_tune_csv(const std::string& path, const TuneTrace& trace);

}  // namespace mocc
