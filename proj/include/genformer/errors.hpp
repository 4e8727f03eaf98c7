#pragma once

#include <stdexcept>
#include <string>

namespace genformer {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define GENFORMER_ERROR_TYPE(Name) \
  struct Name : Error {            \
    using Error::Error;            \
  }

GENFORMER_ERROR_TYPE(ShapeMismatch);
GENFORMER_ERROR_TYPE(DomainError);
GENFORMER_ERROR_TYPE(SpaceTagMismatch);
GENFORMER_ERROR_TYPE(InsufficientData);
GENFORMER_ERROR_TYPE(SeriesTooShort);
GENFORMER_ERROR_TYPE(DegenerateSplit);
GENFORMER_ERROR_TYPE(NonFiniteResult);
GENFORMER_ERROR_TYPE(EmptyInput);
GENFORMER_ERROR_TYPE(KTooLarge);
GENFORMER_ERROR_TYPE(RegionEmpty);
GENFORMER_ERROR_TYPE(NoTransitions);
GENFORMER_ERROR_TYPE(StateSpaceTooLarge);
GENFORMER_ERROR_TYPE(InvalidState);
GENFORMER_ERROR_TYPE(UnknownState);
GENFORMER_ERROR_TYPE(DegenerateProbability);
GENFORMER_ERROR_TYPE(NonScalarLoss);
GENFORMER_ERROR_TYPE(NoWindows);
GENFORMER_ERROR_TYPE(EmptySeries);
GENFORMER_ERROR_TYPE(NotPsd);
GENFORMER_ERROR_TYPE(SingularSampleCorrelation);
GENFORMER_ERROR_TYPE(CovarianceTooLarge);
GENFORMER_ERROR_TYPE(RepairFailed);
GENFORMER_ERROR_TYPE(ZeroTarget);
GENFORMER_ERROR_TYPE(EmptyTailGrid);
GENFORMER_ERROR_TYPE(MisalignedStations);
GENFORMER_ERROR_TYPE(IoError);
GENFORMER_ERROR_TYPE(ConfigError);

#undef GENFORMER_ERROR_TYPE

}  // namespace genformer
