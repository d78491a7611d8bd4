#ifndef MGL_ERROR_HPP
#define MGL_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgl {

enum class Errc {
  InvalidArgument,
  NonPositiveWeight,
  BadNormalization,
  BadKernel,
  NotInvariant,
  NotReversible,
  NotErgodic,
  MethodDisagreement,
  BadPartition,
  EmptySet,
  EmptyTuple,
  OrderTooLarge,
  StateCapExceeded,
  RTooSmall,
  ZeroFunction,
  UncertifiedConstants,
  UncertifiedTail,
  EpsilonTooLarge,
  BadWeights,
  Disconnected,
  ParseError,
  ConfigError,
};

inline constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonPositiveWeight: return "NonPositiveWeight";
    case Errc::BadNormalization: return "BadNormalization";
    case Errc::BadKernel: return "BadKernel";
    case Errc::NotInvariant: return "NotInvariant";
    case Errc::NotReversible: return "NotReversible";
    case Errc::NotErgodic: return "NotErgodic";
    case Errc::MethodDisagreement: return "MethodDisagreement";
    case Errc::BadPartition: return "BadPartition";
    case Errc::EmptySet: return "EmptySet";
    case Errc::EmptyTuple: return "EmptyTuple";
    case Errc::OrderTooLarge: return "OrderTooLarge";
    case Errc::StateCapExceeded: return "StateCapExceeded";
    case Errc::RTooSmall: return "RTooSmall";
    case Errc::ZeroFunction: return "ZeroFunction";
    case Errc::UncertifiedConstants: return "UncertifiedConstants";
    case Errc::UncertifiedTail: return "UncertifiedTail";
    case Errc::EpsilonTooLarge: return "EpsilonTooLarge";
    case Errc::BadWeights: return "BadWeights";
    case Errc::Disconnected: return "Disconnected";
    case Errc::ParseError: return "ParseError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mgl

#endif  // MGL_ERROR_HPP
