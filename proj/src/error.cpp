#include "mlgd/error.hpp"

namespace mlgd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSymmetryViolation: return "symmetry-violation";
    case ErrorKind::kNotSpd: return "not-spd";
    case ErrorKind::kManifoldViolation: return "manifold-violation";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kDegenerateInput: return "degenerate-input";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kDegeneratePatch: return "degenerate-patch";
    case ErrorKind::kDegenerateRegion: return "degenerate-region";
    case ErrorKind::kDegenerateDescriptor: return "degenerate-descriptor";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace mlgd
