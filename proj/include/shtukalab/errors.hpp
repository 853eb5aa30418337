#pragma once

#include <stdexcept>
#include <string>

namespace shtukalab {

// Failure modes are exceptions; each one corresponds to a documented error
// condition of some library operation.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SHTUKALAB_ERROR(Name)                                        \
    struct Name : Error {                                            \
        explicit Name(const std::string& msg = #Name) : Error(msg) {} \
    }

SHTUKALAB_ERROR(PrecisionExhausted);
SHTUKALAB_ERROR(NotAUnit);
SHTUKALAB_ERROR(ExtensionBudgetExceeded);
SHTUKALAB_ERROR(DegenerateInput);
SHTUKALAB_ERROR(NoSlope);
SHTUKALAB_ERROR(DivergentReexpansion);
SHTUKALAB_ERROR(DivergentEvaluation);
SHTUKALAB_ERROR(CharacteristicMismatch);
SHTUKALAB_ERROR(NotAnIsogeny);
SHTUKALAB_ERROR(NotEffective);
SHTUKALAB_ERROR(IncompatibleAmbient);
SHTUKALAB_ERROR(NotGaloisConsistent);
SHTUKALAB_ERROR(NotFrobeniusFixed);
SHTUKALAB_ERROR(RootDepthInsufficient);
SHTUKALAB_ERROR(HypothesisViolated);
SHTUKALAB_ERROR(UnverifiableSubobjects);
SHTUKALAB_ERROR(InputError);

#undef SHTUKALAB_ERROR

}  // namespace shtukalab
