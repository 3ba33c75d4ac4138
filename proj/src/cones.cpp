#include "mdiew/cones.hpp"

#include <cmath>
#include <limits>

#include "mdiew/errors.hpp"

namespace mdiew {

std::string to_string(MeasureTag tag) {
  switch (tag) {
    case MeasureTag::Negativity: return "negativity";
    case MeasureTag::RandomRobustness: return "random-robustness";
    case MeasureTag::AbsoluteRobustness: return "absolute-robustness";
    case MeasureTag::GeneralizedRobustness: return "generalized-robustness";
    case MeasureTag::Dub: return "dub";
  }
  return "?";
}

std::string to_string(SepApprox sep) { return sep == SepApprox::ExactPpt ? "ppt" : "dps2"; }

MeasureTag parse_measure_tag(const std::string& tag) {
  for (MeasureTag t : kAllMeasures)
    if (to_string(t) == tag) return t;
  throw SchemaError("unknown measure tag '" + tag + "'");
}

SepApprox parse_sep_approx(const std::string& tag) {
  if (tag == "ppt") return SepApprox::ExactPpt;
  if (tag == "dps2") return SepApprox::Dps2;
  throw SchemaError("unknown separable-cone approximation '" + tag + "'");
}

bool dimension_independent(MeasureTag tag) { return tag != MeasureTag::RandomRobustness; }

SepApprox default_sep_approx(DimPair dims) { return dims.total() <= 6 ? SepApprox::ExactPpt : SepApprox::Dps2; }

namespace {

void require_dim(const HermExpr& rho, DimPair dims, const char* what) {
  if (rho.dim() != dims.total())
    throw DimensionError(std::string(what) + ": rho is " + std::to_string(rho.dim()) + "-dimensional, dims give " +
                         std::to_string(dims.total()));
}

int equate(Model& model, const HermExpr& lhs, const std::string& tag) {
  const int before = model.num_rows();
  model.add_hermitian_equality(lhs, tag);
  return model.num_rows() - before;
}

int equate(Model& model, const ScalarExpr& lhs, const std::string& tag) {
  model.add_equality(lhs, tag);
  return 1;
}

}  // namespace

ConeBlock sep_cone_exact(Model& model, DimPair dims, const std::string& tag) {
  if (dims.total() > 6)
    throw DimensionTooLarge("sep_cone_exact: PPT equals separability only for dA dB <= 6, got " +
                            std::to_string(dims.dA) + "x" + std::to_string(dims.dB));
  ConeBlock block;
  const int d = dims.total();
  HermExpr sigma = model.add_psd(d);
  HermExpr sigma_pt = model.add_psd(d);
  block.new_variables.push_back({tag + ".sigma", VariableKind::Psd, d});
  block.new_variables.push_back({tag + ".sigma_TA", VariableKind::Psd, d});
  block.equality_rows = equate(model, sigma.partial_transpose(dims, Subsystem::A) - sigma_pt, tag + ".ppt");
  block.rho = std::move(sigma);
  return block;
}

ConeBlock sep_cone_dps2(Model& model, DimPair dims, const std::string& tag) {
  ConeBlock block;
  const int dA = dims.dA, dB = dims.dB;
  const int n = dA * dB * dB;
  const int ext[3] = {dA, dB, dB};
  HermExpr tau = model.add_psd(n);
  block.new_variables.push_back({tag + ".tau", VariableKind::Psd, n});

  // Swap symmetry tau = P tau P, one equation per orbit of (i, j) under the
  // swap and Hermitian conjugation.
  std::vector<int> swap(n);
  for (int a = 0; a < dA; ++a)
    for (int b = 0; b < dB; ++b)
      for (int c = 0; c < dB; ++c) swap[(a * dB + b) * dB + c] = (a * dB + c) * dB + b;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      int k = swap[i], l = swap[j];
      double conj = 1.0;
      if (k > l) {
        std::swap(k, l);
        conj = -1.0;
      }
      if (std::pair(k, l) < std::pair(i, j)) continue;
      const std::string at = tag + ".swap[" + std::to_string(i) + "," + std::to_string(j) + "]";
      const ScalarExpr re = tau.re(i, j) - tau.re(k, l);
      const ScalarExpr im = tau.im(i, j) - conj * tau.im(k, l);
      if (!re.is_constant()) block.equality_rows += equate(model, re, at + "re");
      if (!im.is_constant()) block.equality_rows += equate(model, im, at + "im");
    }

  const int t_b[1] = {1};
  const int t_bb[2] = {1, 2};
  HermExpr s1 = model.add_psd(n);
  HermExpr s2 = model.add_psd(n);
  block.new_variables.push_back({tag + ".sigma1", VariableKind::Psd, n});
  block.new_variables.push_back({tag + ".sigma2", VariableKind::Psd, n});
  block.equality_rows += equate(model, tau.partial_transpose(ext, t_b) - s1, tag + ".ptB");
  block.equality_rows += equate(model, tau.partial_transpose(ext, t_bb) - s2, tag + ".ptBB");

  const int traced[1] = {2};
  block.rho = tau.partial_trace(ext, traced);
  return block;
}

ConeBlock sep_cone(Model& model, DimPair dims, SepApprox sep, const std::string& tag) {
  return sep == SepApprox::ExactPpt ? sep_cone_exact(model, dims, tag) : sep_cone_dps2(model, dims, tag);
}

namespace {

void absorb(ConeBlock& into, const ConeBlock& from) {
  into.new_variables.insert(into.new_variables.end(), from.new_variables.begin(), from.new_variables.end());
  into.equality_rows += from.equality_rows;
}

}  // namespace

ConeBlock negativity_block(Model& model, DimPair dims, const ScalarExpr& omega, const HermExpr& rho,
                           const std::string& tag) {
  require_dim(rho, dims, "negativity_block");
  ConeBlock block;
  const int d = dims.total();
  HermExpr plus = model.add_psd(d);
  HermExpr minus = model.add_psd(d);
  block.new_variables.push_back({tag + ".sigma+", VariableKind::Psd, d});
  block.new_variables.push_back({tag + ".sigma-", VariableKind::Psd, d});
  block.equality_rows += equate(model, omega - minus.trace(), tag + ".omega");
  block.equality_rows += equate(model, rho.partial_transpose(dims, Subsystem::A) - plus + minus, tag + ".pt");
  block.omega = omega;
  block.rho = rho;
  return block;
}

ConeBlock random_robustness_block(Model& model, DimPair dims, SepApprox sep, const ScalarExpr& omega,
                                  const HermExpr& rho, const std::string& tag) {
  require_dim(rho, dims, "random_robustness_block");
  ConeBlock block;
  const ConeBlock sigma = sep_cone(model, dims, sep, tag + ".sep");
  absorb(block, sigma);
  const double d = dims.total();
  block.equality_rows += equate(model, (d * rho).plus_identity(omega) - sigma.rho, tag + ".mix");
  block.omega = omega;
  block.rho = rho;
  return block;
}

ConeBlock absolute_robustness_block(Model& model, DimPair dims, SepApprox sep, const ScalarExpr& omega,
                                    const HermExpr& rho, const std::string& tag) {
  require_dim(rho, dims, "absolute_robustness_block");
  ConeBlock block;
  const ConeBlock sigma = sep_cone(model, dims, sep, tag + ".sep");
  const ConeBlock tau = sep_cone(model, dims, sep, tag + ".noise");
  absorb(block, sigma);
  absorb(block, tau);
  block.equality_rows += equate(model, omega - tau.rho.trace(), tag + ".omega");
  block.equality_rows += equate(model, rho + tau.rho - sigma.rho, tag + ".mix");
  block.omega = omega;
  block.rho = rho;
  return block;
}

ConeBlock generalized_robustness_block(Model& model, DimPair dims, SepApprox sep, const ScalarExpr& omega,
                                       const HermExpr& rho, const std::string& tag) {
  require_dim(rho, dims, "generalized_robustness_block");
  ConeBlock block;
  const ConeBlock sigma = sep_cone(model, dims, sep, tag + ".sep");
  absorb(block, sigma);
  const int d = dims.total();
  HermExpr tau = model.add_psd(d);
  block.new_variables.push_back({tag + ".tau", VariableKind::Psd, d});
  block.equality_rows += equate(model, omega - tau.trace(), tag + ".omega");
  block.equality_rows += equate(model, rho + tau - sigma.rho, tag + ".mix");
  block.omega = omega;
  block.rho = rho;
  return block;
}

ConeBlock dub_block(Model& model, DimPair dims, const ScalarExpr& omega, const HermExpr& rho,
                    const std::string& tag) {
  require_dim(rho, dims, "dub_block");
  ConeBlock block;
  const int d = dims.total();
  HermExpr u = model.add_psd(d);
  HermExpr v = model.add_psd(d);
  HermExpr sigma = model.add_psd(d);
  block.new_variables.push_back({tag + ".U", VariableKind::Psd, d});
  block.new_variables.push_back({tag + ".V", VariableKind::Psd, d});
  block.new_variables.push_back({tag + ".sigma", VariableKind::Psd, d});
  block.equality_rows += equate(model, omega - (u + v).trace(), tag + ".omega");
  block.equality_rows += equate(model, (u - v).partial_transpose(dims, Subsystem::B) - rho - sigma, tag + ".pt");
  block.omega = omega;
  block.rho = rho;
  return block;
}

ConeBlock measure_block(Model& model, DimPair dims, MeasureKind kind, const ScalarExpr& omega, const HermExpr& rho,
                        const std::string& tag) {
  switch (kind.tag) {
    case MeasureTag::Negativity: return negativity_block(model, dims, omega, rho, tag);
    case MeasureTag::RandomRobustness: return random_robustness_block(model, dims, kind.sep, omega, rho, tag);
    case MeasureTag::AbsoluteRobustness: return absolute_robustness_block(model, dims, kind.sep, omega, rho, tag);
    case MeasureTag::GeneralizedRobustness:
      return generalized_robustness_block(model, dims, kind.sep, omega, rho, tag);
    case MeasureTag::Dub: return dub_block(model, dims, omega, rho, tag);
  }
  throw InvalidArgument("measure_block: unknown measure");
}

double dub_log2(double omega) {
  return omega > 0.0 ? std::log2(omega) : -std::numeric_limits<double>::infinity();
}

MeasureValue evaluate_measure(const ComplexMatrix& rho, DimPair dims, MeasureKind kind,
                              const SolverSettings& settings) {
  detail::require_square(rho, dims.total(), "evaluate_measure");
  if (!is_hermitian(rho, 1e-9)) throw NotHermitian("evaluate_measure: rho is not Hermitian");
  MeasureValue out;
  out.tag = kind.tag;
  if (rho.cwiseAbs().maxCoeff() == 0.0) {
    out.omega = 0.0;
    out.log2_omega = dub_log2(0.0);
    return out;
  }
  Model model;
  const ScalarExpr omega = model.add_nonneg();
  measure_block(model, dims, kind, omega, HermExpr::constant(symmetrize(rho)), "E");
  model.minimize(omega);
  const SolveResult result = solve(model.compile(), settings);
  if (!result.optimal())
    throw SolverFailed("evaluate_measure(" + to_string(kind.tag) + "): " + to_string(result.status));
  out.omega = result.p_star;
  out.log2_omega = dub_log2(out.omega);
  return out;
}

double negativity_formula(const ComplexMatrix& rho, DimPair dims) {
  const RealVector ev = eigvals_hermitian(partial_transpose(symmetrize(rho), dims, Subsystem::A));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) < 0.0) sum -= ev(i);
  return sum;
}

}  // namespace mdiew
