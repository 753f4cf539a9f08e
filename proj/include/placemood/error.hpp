#pragma once

#include <stdexcept>
#include <string>

namespace placemood {

/// Errors caused by malformed or insufficient input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors raised when an analysis cannot produce a result from valid input.
class StudyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PLACEMOOD_ERROR(Name, Base)                  \
  class Name : public Base {                         \
   public:                                           \
    explicit Name(const std::string& what)           \
        : Base(std::string(#Name ": ") + what) {}    \
  }

PLACEMOOD_ERROR(SchemaError, DataError);
PLACEMOOD_ERROR(IngestAborted, DataError);
PLACEMOOD_ERROR(ScoringAborted, DataError);
PLACEMOOD_ERROR(FileError, DataError);

PLACEMOOD_ERROR(DegenerateGeometry, StudyError);
PLACEMOOD_ERROR(EmptyPlace, StudyError);
PLACEMOOD_ERROR(NoFaces, StudyError);
PLACEMOOD_ERROR(NoData, StudyError);
PLACEMOOD_ERROR(InsufficientData, StudyError);
PLACEMOOD_ERROR(UndefinedCorrelation, StudyError);
PLACEMOOD_ERROR(SingularDesign, StudyError);
PLACEMOOD_ERROR(StudyFailed, StudyError);

#undef PLACEMOOD_ERROR

}  // namespace placemood
