#pragma once

#include <stdexcept>
#include <string>

namespace saw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SAW_DEFINE_ERROR(name)                                                \
    class name : public Error {                                               \
    public:                                                                   \
        using Error::Error;                                                   \
    }

SAW_DEFINE_ERROR(NumericalUnderflow);
SAW_DEFINE_ERROR(NonGenerativeVariant);
SAW_DEFINE_ERROR(ConfigError);
SAW_DEFINE_ERROR(InsufficientSamples);
SAW_DEFINE_ERROR(TrialTooShort);
SAW_DEFINE_ERROR(DegenerateScale);
SAW_DEFINE_ERROR(TrajectoryTooShort);
SAW_DEFINE_ERROR(NoMovement);
SAW_DEFINE_ERROR(LagTooLarge);
SAW_DEFINE_ERROR(NonPositiveMsd);
SAW_DEFINE_ERROR(NoEvents);
SAW_DEFINE_ERROR(ParseError);
SAW_DEFINE_ERROR(SchemaError);
SAW_DEFINE_ERROR(TooFewTrials);
SAW_DEFINE_ERROR(MissingFit);

#undef SAW_DEFINE_ERROR

// An observed displacement fell outside the configured selection window.
class StepOutOfWindow : public Error {
public:
    StepOutOfWindow(long step, const std::string& msg) : Error(msg), step(step) {}
    long step;
};

// A discretized sample does not fit on the lattice; L or the scale factor
// must be adjusted.
class OffLattice : public Error {
public:
    OffLattice(std::size_t sample, const std::string& msg) : Error(msg), sample(sample) {}
    std::size_t sample;
};

}  // namespace saw
