#include "biorec/error.hpp"

namespace biorec {

void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::config: throw ConfigError(what);
    case ErrorKind::data: throw DataError(what);
    case ErrorKind::training_divergence: throw TrainingDivergence(what);
    case ErrorKind::format: throw FormatError(what);
    case ErrorKind::invalid_argument: throw InvalidArgument(what);
  }
  throw Error(kind, what);
}

}  // namespace biorec
