#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace voc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Oscillator amplitude fell below the floor where the phase dynamics are ill-posed.
class OscillatorCollapse : public Error {
public:
    OscillatorCollapse(const std::string& what, double amplitude)
        : Error(what), amplitude_(amplitude) {}
    double amplitude() const noexcept { return amplitude_; }

private:
    double amplitude_;
};

/// Linear network solve failed (degenerate parameters or topology).
class SingularNetwork : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// A power setpoint admits no real positive control gains.
class InfeasibleSetpoint : public Error {
public:
    using Error::Error;
};

/// Malformed scenario or configuration document.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A simulation aborted mid-run. Carries the simulated time and the last finite state.
class SimulationAborted : public Error {
public:
    SimulationAborted(const std::string& what, double time, std::vector<double> last_state)
        : Error(what), time_(time), last_state_(std::move(last_state)) {}
    double time() const noexcept { return time_; }
    const std::vector<double>& last_state() const noexcept { return last_state_; }

private:
    double time_;
    std::vector<double> last_state_;
};

}  // namespace voc
