#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frechet_tree/error.hpp"

namespace frechet_tree {

struct LossFlags {
  bool strictly_convex = false;
  bool increasing = false;
  bool differentiable = false;
};

enum class LossKind { Power, Huber, PseudoHuber, Custom };

/// Parameters for make_loss(). `parameter` is p for Power and c for the Huber
/// families; the callables are only read for Custom.
struct LossSpec {
  LossKind kind = LossKind::Power;
  double parameter = 1.0;
  std::function<double(double)> value;
  std::function<double(double)> dminus;
  std::function<double(double)> dplus;
  LossFlags flags;

  static LossSpec power(double p) { return {LossKind::Power, p, {}, {}, {}, {}}; }
  static LossSpec huber(double c) { return {LossKind::Huber, c, {}, {}, {}, {}}; }
  static LossSpec pseudo_huber(double c) { return {LossKind::PseudoHuber, c, {}, {}, {}, {}}; }
  static LossSpec custom(std::function<double(double)> value, std::function<double(double)> dminus,
                         std::function<double(double)> dplus, LossFlags flags) {
    return {LossKind::Custom, 0.0, std::move(value), std::move(dminus), std::move(dplus), flags};
  }
};

/// Convex nondecreasing loss on [0, inf) with explicit one-sided derivatives.
/// Immutable; all callables are pure.
class LossFunction {
 public:
  double value(double z) const { return value_(z); }
  double dminus(double z) const { return dminus_(z); }
  double dplus(double z) const { return dplus_(z); }

  /// z -> integral of the loss over [0, z], when a closed form exists.
  const std::optional<std::function<double(double)>>& primitive() const { return primitive_; }

  const LossFlags& flags() const noexcept { return flags_; }
  LossKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return parameter_; }
  bool is_median() const noexcept { return kind_ == LossKind::Power && parameter_ == 1.0; }

  /// Canonical CLI spelling, e.g. "power:p=1". Custom losses give "custom".
  std::string describe() const;

 private:
  friend LossFunction make_loss(const LossSpec& spec);
  LossFunction() = default;

  LossKind kind_ = LossKind::Power;
  double parameter_ = 1.0;
  std::function<double(double)> value_;
  std::function<double(double)> dminus_;
  std::function<double(double)> dplus_;
  std::optional<std::function<double(double)>> primitive_;
  LossFlags flags_;
};

LossFunction make_loss(const LossSpec& spec);

/// Parses "power:p=1", "huber:c=0.5", "pseudohuber:c=1".
LossFunction parse_loss(const std::string& text);

struct LossProbeReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Probes derivative ordering, monotonicity, the slope inequalities and the
/// integral reconstruction of the loss on a geometric grid over (0, max_argument].
LossProbeReport validate_loss(const LossFunction& loss, std::size_t resolution,
                              double max_argument = 10.0);

}  // namespace frechet_tree
