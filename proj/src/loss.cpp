#include "frechet_tree/loss.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "frechet_tree/quadrature.hpp"

namespace frechet_tree {

namespace {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

bool close_or_below(double a, double b) {
  return a <= b + 1e-12 * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace

std::string LossFunction::describe() const {
  switch (kind_) {
    case LossKind::Power: return "power:p=" + format_number(parameter_);
    case LossKind::Huber: return "huber:c=" + format_number(parameter_);
    case LossKind::PseudoHuber: return "pseudohuber:c=" + format_number(parameter_);
    case LossKind::Custom: return "custom";
  }
  return "custom";
}

LossFunction make_loss(const LossSpec& spec) {
  LossFunction loss;
  loss.kind_ = spec.kind;
  loss.parameter_ = spec.parameter;
  const double q = spec.parameter;

  switch (spec.kind) {
    case LossKind::Power: {
      if (!std::isfinite(q) || q < 1.0) {
        throw Error(ErrorCode::InvalidParameter, "power loss needs p >= 1, got " + format_number(q));
      }
      loss.value_ = [q](double z) { return q == 1.0 ? z : std::pow(z, q); };
      // l'_+(0) = 1 for the median so that atoms at the evaluation point
      // contribute their full weight to the derivative.
      loss.dplus_ = [q](double z) {
        if (q == 1.0) return 1.0;
        return z == 0.0 ? 0.0 : q * std::pow(z, q - 1.0);
      };
      loss.dminus_ = loss.dplus_;
      loss.primitive_ = [q](double z) { return std::pow(z, q + 1.0) / (q + 1.0); };
      loss.flags_ = {q > 1.0, true, true};
      break;
    }
    case LossKind::Huber: {
      if (!std::isfinite(q) || q < 0.0) {
        throw Error(ErrorCode::InvalidParameter, "huber loss needs c >= 0, got " + format_number(q));
      }
      loss.value_ = [q](double z) { return z <= q ? z * z : 2.0 * q * z - q * q; };
      loss.dplus_ = [q](double z) { return z <= q ? 2.0 * z : 2.0 * q; };
      loss.dminus_ = loss.dplus_;
      loss.primitive_ = [q](double z) {
        if (z <= q) return z * z * z / 3.0;
        return q * q * q / 3.0 + q * (z * z - q * q) - q * q * (z - q);
      };
      loss.flags_ = {false, q > 0.0, true};
      break;
    }
    case LossKind::PseudoHuber: {
      if (!std::isfinite(q) || q <= 0.0) {
        throw Error(ErrorCode::InvalidParameter,
                    "pseudo-huber loss needs c > 0, got " + format_number(q));
      }
      // 2c^2 (sqrt(1 + z^2/c^2) - 1), rewritten to avoid cancellation near 0.
      loss.value_ = [q](double z) {
        const double r = std::sqrt(1.0 + (z / q) * (z / q));
        return 2.0 * z * z / (r + 1.0);
      };
      loss.dplus_ = [q](double z) { return 2.0 * z / std::sqrt(1.0 + (z / q) * (z / q)); };
      loss.dminus_ = loss.dplus_;
      loss.flags_ = {true, true, true};
      break;
    }
    case LossKind::Custom: {
      if (!spec.value || !spec.dminus || !spec.dplus) {
        throw Error(ErrorCode::InvalidParameter, "custom loss needs value, dminus and dplus");
      }
      loss.value_ = spec.value;
      loss.dminus_ = spec.dminus;
      loss.dplus_ = spec.dplus;
      loss.flags_ = spec.flags;
      const auto report = validate_loss(loss, 64);
      if (!report.ok()) {
        std::string joined;
        for (const auto& v : report.violations) joined += (joined.empty() ? "" : "; ") + v;
        throw Error(ErrorCode::CustomValidationFailed, joined);
      }
      break;
    }
  }
  return loss;
}

LossFunction parse_loss(const std::string& text) {
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  std::string key;
  double value = 0.0;
  if (colon != std::string::npos) {
    const std::string rest = text.substr(colon + 1);
    const auto eq = rest.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidParameter, "loss spec '" + text + "' lacks key=value");
    }
    key = rest.substr(0, eq);
    const std::string number = rest.substr(eq + 1);
    const auto res = std::from_chars(number.data(), number.data() + number.size(), value);
    if (res.ec != std::errc() || res.ptr != number.data() + number.size()) {
      throw Error(ErrorCode::InvalidParameter, "bad number in loss spec '" + text + "'");
    }
  }
  if (family == "power" && key == "p") return make_loss(LossSpec::power(value));
  if (family == "huber" && key == "c") return make_loss(LossSpec::huber(value));
  if (family == "pseudohuber" && key == "c") return make_loss(LossSpec::pseudo_huber(value));
  throw Error(ErrorCode::InvalidParameter, "unknown loss spec '" + text + "'");
}

LossProbeReport validate_loss(const LossFunction& loss, std::size_t resolution,
                              double max_argument) {
  if (resolution < 2 || !(max_argument > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "probe grid needs >= 2 points on (0, max]");
  }
  std::vector<double> grid(resolution);
  const double ratio = std::pow(1e-6, 1.0 / static_cast<double>(resolution - 1));
  for (std::size_t k = 0; k < resolution; ++k) {
    grid[resolution - 1 - k] = max_argument * std::pow(ratio, static_cast<double>(k));
  }
  grid.back() = max_argument;

  LossProbeReport report;
  auto flag = [&](const std::string& category, double z) {
    const std::string prefix = category + ":";
    const bool seen = std::any_of(report.violations.begin(), report.violations.end(),
                                  [&](const std::string& v) { return v.rfind(prefix, 0) == 0; });
    if (!seen) report.violations.push_back(category + ": first failure at z=" + format_number(z));
  };

  const double l0 = loss.value(0.0);
  if (!close_or_below(0.0, loss.dplus(0.0))) flag("negative derivative", 0.0);
  double prev_z = 0.0;
  double prev_value = l0;
  double prev_dplus = loss.dplus(0.0);
  double prev_dminus = 0.0;
  double integral = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double z = grid[k];
    const double v = loss.value(z);
    const double dm = loss.dminus(z);
    const double dp = loss.dplus(z);
    if (!std::isfinite(v) || !std::isfinite(dm) || !std::isfinite(dp)) {
      flag("non-finite value", z);
      continue;
    }
    if (!close_or_below(prev_value, v)) flag("monotonicity", z);
    if (!close_or_below(0.0, dm) || !close_or_below(0.0, dp)) flag("negative derivative", z);
    if (!close_or_below(dm, dp)) flag("derivative order", z);
    if (!close_or_below(prev_dplus, dp) || (k > 0 && !close_or_below(prev_dminus, dm)) ||
        !close_or_below(prev_dplus, dm)) {
      flag("derivative monotonicity", z);
    }
    const double h = z - prev_z;
    if (!close_or_below(prev_dplus * h, v - prev_value) || !close_or_below(v - prev_value, dm * h)) {
      flag("slope inequality", z);
    }
    integral += integrate_adaptive([&loss](double t) { return loss.dplus(t); }, prev_z, z, 1e-13);
    const double rise = v - l0;
    if (std::abs(rise - integral) > 1e-9 * std::abs(rise) + 1e-13) flag("integral reconstruction", z);

    prev_z = z;
    prev_value = v;
    prev_dplus = dp;
    prev_dminus = dm;
  }
  return report;
}

}  // namespace frechet_tree
