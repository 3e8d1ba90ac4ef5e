#include "hartree/errors.hpp"

namespace hartree {

std::string_view error_tag(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Usage: return "usage-error";
    case ErrorKind::Domain: return "domain-error";
    case ErrorKind::Truncation: return "truncation-error";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::ScaleOverflow: return "scale-overflow";
    case ErrorKind::FitRefused: return "fit-refused";
    case ErrorKind::KernelTooWeak: return "kernel-too-weak";
    case ErrorKind::ExperimentRefused: return "experiment-refused";
    case ErrorKind::ConfigNotFound: return "config-not-found";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::AlreadyExists: return "already-exists";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::Runtime: return "runtime-error";
  }
  return "error";
}

}  // namespace hartree
