#include "forgeline/control/voltage.hpp"

#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "forgeline/common/error.hpp"

namespace forgeline::control {

namespace {

// 256 mantissa bits hold every product of three doubles exactly.
using Exact = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

// c >= v * sqrt(pn / po)  <=>  c^2 * po >= v^2 * pn  for c >= 0.
bool covers(double c, const Exact& lhs_po, const Exact& rhs) {
  const Exact ce(c);
  return ce * ce * lhs_po >= rhs;
}

}  // namespace

double voltage_for_power_change(double v_old, double p_old, double p_new) {
  if (!std::isfinite(v_old) || !std::isfinite(p_old) || !std::isfinite(p_new)) {
    throw ConfigError("voltage conversion needs finite inputs");
  }
  if (v_old <= 0.0 || p_old < 0.0 || p_new < 0.0) {
    throw ConfigError("voltage conversion needs v_old > 0, p_old >= 0 and p_new >= 0");
  }
  if (p_old == 0.0) {
    if (p_new == 0.0) return std::ceil(v_old);
    throw UndefinedRatioError("old power is zero; the voltage ratio is undefined");
  }
  if (p_new == p_old) return std::ceil(v_old);

  const Exact po(p_old);
  const Exact v(v_old);
  const Exact rhs = v * v * Exact(p_new);
  double c = std::ceil(v_old * std::sqrt(p_new / p_old));
  while (c > 0.0 && covers(c - 1.0, po, rhs)) c -= 1.0;
  while (!covers(c, po, rhs)) c += 1.0;
  return c;
}

bool VoltageVector::any_undefined() const {
  for (bool u : undefined) {
    if (u) return true;
  }
  return false;
}

VoltageVector power_to_voltage(const ZoneVector& v_old, const ZoneVector& p_old, const ZoneVector& p_new) {
  VoltageVector out;
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    try {
      out.voltages[z] = voltage_for_power_change(v_old[z], p_old[z], p_new[z]);
    } catch (const UndefinedRatioError&) {
      out.voltages[z] = v_old[z];
      out.undefined[z] = true;
    }
  }
  return out;
}

}  // namespace forgeline::control
