#pragma once

#include <stdexcept>
#include <string>

namespace robust_gait
{

/// A model parameter, configuration value or input dimension violates its contract.
class InvalidParameter : public std::invalid_argument
{
public:
  explicit InvalidParameter(const std::string & what) : std::invalid_argument(what) {}
};

/// A numerical routine could not produce a usable result.
class NumericalFailure : public std::runtime_error
{
public:
  explicit NumericalFailure(const std::string & what) : std::runtime_error(what) {}
};

} // namespace robust_gait
