#include "hbo/error.hpp"

namespace hbo {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidHyperparameter: return "invalid hyperparameter";
    case ErrorKind::Spec: return "kernel spec error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Input: return "input error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Domain: return "domain error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hbo
