#pragma once

// Machine-readable verdicts produced by the trajectory verification layer.

#include <array>
#include <string>

namespace icurv {

enum class CheckId {
  Monotone,
  SignLaw,
  IdentityQ,
  PreInflectionConvex,
  LowerBoundC,
  UpperBoundK,
  DomainLow,
  DomainHigh,
  UniqueInflection,
  TailDecayLeft,
  TailDecayRight,
  ResidualBound,
  DistinctRadii,
};

inline constexpr std::array<CheckId, 13> kAllChecks = {
    CheckId::Monotone,       CheckId::SignLaw,       CheckId::IdentityQ,
    CheckId::PreInflectionConvex, CheckId::LowerBoundC, CheckId::UpperBoundK,
    CheckId::DomainLow,      CheckId::DomainHigh,    CheckId::UniqueInflection,
    CheckId::TailDecayLeft,  CheckId::TailDecayRight, CheckId::ResidualBound,
    CheckId::DistinctRadii,
};

inline const char* to_string(CheckId id) {
  switch (id) {
    case CheckId::Monotone: return "Monotone";
    case CheckId::SignLaw: return "SignLaw";
    case CheckId::IdentityQ: return "IdentityQ";
    case CheckId::PreInflectionConvex: return "PreInflectionConvex";
    case CheckId::LowerBoundC: return "LowerBoundC";
    case CheckId::UpperBoundK: return "UpperBoundK";
    case CheckId::DomainLow: return "DomainLow";
    case CheckId::DomainHigh: return "DomainHigh";
    case CheckId::UniqueInflection: return "UniqueInflection";
    case CheckId::TailDecayLeft: return "TailDecayLeft";
    case CheckId::TailDecayRight: return "TailDecayRight";
    case CheckId::ResidualBound: return "ResidualBound";
    case CheckId::DistinctRadii: return "DistinctRadii";
  }
  return "?";
}

/// Outcome of one lemma-level check. worst_margin is the signed distance to
/// violation (positive = safe) so that margins are comparable across runs.
struct CheckVerdict {
  CheckId check_id{};
  bool pass = false;
  double worst_margin = 0.0;
  double worst_location_h = 0.0;
  std::string note;
};

}  // namespace icurv
