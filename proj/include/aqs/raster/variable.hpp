#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "aqs/core/error.hpp"

namespace aqs::raster {

enum class Variable {
  tvcd,
  rainfall,
  temperature,
  wind_speed,
  population,
  elevation,
  night_lights,
  ground_pollutant,
};

enum class Cadence { daily, monthly, static_, point };
enum class Role { input, output };

struct VariableInfo {
  Variable id;
  std::string_view name;
  std::string_view unit;
  Cadence cadence;
  Role role;
};

// Catalog of driving factors and the output variable.
inline constexpr std::array<VariableInfo, 8> kVariables{{
    {Variable::tvcd, "tvcd", "mol/m²", Cadence::daily, Role::input},
    {Variable::rainfall, "rainfall", "mm/month", Cadence::monthly, Role::input},
    {Variable::temperature, "temperature", "K", Cadence::monthly, Role::input},
    {Variable::wind_speed, "wind_speed", "m/s", Cadence::monthly, Role::input},
    {Variable::population, "population", "persons/km²", Cadence::static_, Role::input},
    {Variable::elevation, "elevation", "m", Cadence::static_, Role::input},
    {Variable::night_lights, "night_lights", "nW/cm²/sr", Cadence::monthly, Role::input},
    {Variable::ground_pollutant, "ground_pollutant", "µg/m³", Cadence::point, Role::output},
}};

inline const VariableInfo& info(Variable v) {
  return kVariables[static_cast<std::size_t>(v)];
}
inline std::string_view name_of(Variable v) { return info(v).name; }
inline std::string_view unit_of(Variable v) { return info(v).unit; }

// Static layers are reused for every month of a year.
inline bool is_static(Variable v) { return info(v).cadence == Cadence::static_; }

inline std::vector<Variable> input_variables() {
  std::vector<Variable> out;
  for (const auto& vi : kVariables)
    if (vi.role == Role::input) out.push_back(vi.id);
  return out;
}

inline Variable parse_variable(std::string_view s) {
  for (const auto& vi : kVariables)
    if (vi.name == s) return vi.id;
  throw DataError("unknown variable '" + std::string(s) + "'");
}

inline Variable parse_input_variable(std::string_view s) {
  const Variable v = parse_variable(s);
  if (info(v).role != Role::input)
    throw DataError("variable '" + std::string(s) + "' is not an input driving factor");
  return v;
}

}  // namespace aqs::raster
