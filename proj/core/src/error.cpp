#include "kslab/error.hpp"

namespace kslab {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::grid_incompatible: return "GridIncompatible";
    case Errc::unsupported_spec: return "UnsupportedSpec";
    case Errc::unsupported_order: return "UnsupportedOrder";
    case Errc::negative_density: return "NegativeDensity";
    case Errc::negative_input: return "NegativeInput";
    case Errc::blowup_detected: return "BlowupDetected";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::marginal_mismatch: return "MarginalMismatch";
    case Errc::mass_mismatch: return "MassMismatch";
    case Errc::history_gap: return "HistoryGap";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::problem_too_large: return "ProblemTooLarge";
    case Errc::insufficient_sweep: return "InsufficientSweep";
    case Errc::degenerate_sweep: return "DegenerateSweep";
    case Errc::coupling_degenerate: return "CouplingDegenerate";
    case Errc::empty_series: return "EmptySeries";
    case Errc::unknown_key: return "UnknownKey";
    case Errc::type_error: return "TypeError";
    case Errc::compatibility_error: return "CompatibilityError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace kslab
