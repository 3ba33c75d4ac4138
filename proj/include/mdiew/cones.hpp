#pragma once

// Constraint blocks realizing (omega, rho) in the cone of an entanglement
// measure, E(rho) <= omega, and membership in (approximations of) the
// separable cone.

#include <string>
#include <vector>

#include "mdiew/conic.hpp"
#include "mdiew/linalg.hpp"
#include "mdiew/model.hpp"

namespace mdiew {

enum class MeasureTag { Negativity, RandomRobustness, AbsoluteRobustness, GeneralizedRobustness, Dub };
enum class SepApprox { ExactPpt, Dps2 };

struct MeasureKind {
  MeasureTag tag = MeasureTag::Negativity;
  SepApprox sep = SepApprox::ExactPpt;
  friend bool operator==(const MeasureKind&, const MeasureKind&) = default;
};

inline constexpr MeasureTag kAllMeasures[] = {MeasureTag::Negativity, MeasureTag::RandomRobustness,
                                              MeasureTag::AbsoluteRobustness, MeasureTag::GeneralizedRobustness,
                                              MeasureTag::Dub};

std::string to_string(MeasureTag tag);
std::string to_string(SepApprox sep);
// Throw SchemaError on unknown tags.
MeasureTag parse_measure_tag(const std::string& tag);
SepApprox parse_sep_approx(const std::string& tag);

// Random robustness depends on the local dimensions and should not be
// compared across them.
bool dimension_independent(MeasureTag tag);

// ExactPpt when dA dB <= 6, Dps2 otherwise.
SepApprox default_sep_approx(DimPair dims);

enum class VariableKind { Scalar, Nonneg, Psd };

struct VariableDescriptor {
  std::string name;
  VariableKind kind = VariableKind::Psd;
  int dim = 1;
};

// What a block added to the model: its auxiliary variables, the number of
// equality rows, and the coupled pair it constrains.
struct ConeBlock {
  std::vector<VariableDescriptor> new_variables;
  int equality_rows = 0;
  ScalarExpr omega;
  HermExpr rho;
};

// sigma with sigma in Sep: a PSD variable whose partial transpose is PSD.
// Throws DimensionTooLarge when dA dB > 6.
ConeBlock sep_cone_exact(Model& model, DimPair dims, const std::string& tag);
// sigma = tr_B' tau with tau PSD on A (x) B (x) B', swap-symmetric in B <-> B',
// and tau^{T_B}, tau^{T_B T_B'} PSD.
ConeBlock sep_cone_dps2(Model& model, DimPair dims, const std::string& tag);
ConeBlock sep_cone(Model& model, DimPair dims, SepApprox sep, const std::string& tag);

// Each block adds the constraints (omega, rho) in E-hat for the given
// expressions.
ConeBlock negativity_block(Model& model, DimPair dims, const ScalarExpr& omega, const HermExpr& rho,
                           const std::string& tag);
ConeBlock random_robustness_block(Model& model, DimPair dims, SepApprox sep, const ScalarExpr& omega,
                                  const HermExpr& rho, const std::string& tag);
ConeBlock absolute_robustness_block(Model& model, DimPair dims, SepApprox sep, const ScalarExpr& omega,
                                    const HermExpr& rho, const std::string& tag);
ConeBlock generalized_robustness_block(Model& model, DimPair dims, SepApprox sep, const ScalarExpr& omega,
                                       const HermExpr& rho, const std::string& tag);
ConeBlock dub_block(Model& model, DimPair dims, const ScalarExpr& omega, const HermExpr& rho,
                    const std::string& tag);
ConeBlock measure_block(Model& model, DimPair dims, MeasureKind kind, const ScalarExpr& omega, const HermExpr& rho,
                        const std::string& tag);

struct MeasureValue {
  MeasureTag tag = MeasureTag::Negativity;
  double omega = 0.0;
  double log2_omega = 0.0;

  // log2(omega) for DUB, omega otherwise.
  double reported() const { return tag == MeasureTag::Dub ? log2_omega : omega; }
};

// log2 of a DUB omega; -infinity when omega <= 0.
double dub_log2(double omega);

// min omega s.t. (omega, rho) in E-hat, solved as a one-state program.
// rho must be Hermitian; the zero matrix gives 0. Throws SolverFailed when
// the solve does not certify optimality.
MeasureValue evaluate_measure(const ComplexMatrix& rho, DimPair dims, MeasureKind kind,
                              const SolverSettings& settings = {});

// |sum of negative eigenvalues of rho^{T_A}|.
double negativity_formula(const ComplexMatrix& rho, DimPair dims);

}  // namespace mdiew
