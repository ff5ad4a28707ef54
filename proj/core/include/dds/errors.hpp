#ifndef DDS_ERRORS_HPP
#define DDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dds {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Views passed to the teacher builder disagree on channel count.
struct MismatchedChannels : Error {
  using Error::Error;
};

/// No mask survived the minimum-size filter when forming prototypes.
struct EmptyPrototypeSet : Error {
  using Error::Error;
};

/// A vector that must be normalized has norm below 1e-12.
struct DegenerateNorm : Error {
  using Error::Error;
};

/// The dense linear solve for the diffusion fixed point failed.
struct SingularSystem : Error {
  using Error::Error;
};

/// Symmetric eigendecomposition did not converge.
struct EigFailure : Error {
  using Error::Error;
};

/// Fewer rows than requested clusters.
struct DegenerateData : Error {
  using Error::Error;
};

/// Prediction and ground-truth arrays have different lengths.
struct LengthMismatch : Error {
  using Error::Error;
};

/// Malformed or unreadable file.
struct IoError : Error {
  using Error::Error;
};

/// Invalid pipeline configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// A pipeline stage failed; carries the stage name and an input digest.
struct StageError : Error {
  StageError(const std::string& stage, const std::string& digest, const std::string& what)
      : Error("stage '" + stage + "' (input digest " + digest + "): " + what),
        stage_name(stage),
        input_digest(digest) {}
  std::string stage_name;
  std::string input_digest;
};

}  // namespace dds

#endif
