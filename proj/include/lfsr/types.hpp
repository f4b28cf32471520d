#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lfsr {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

using Point3 = Vec3<double>;
using Vector3 = Vec3<double>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// bad files, bad flags, empty or degenerate clouds
class InputError : public Error {
public:
  using Error::Error;
};

class DegenerateInputError : public InputError {
public:
  using InputError::InputError;
};

class DegenerateFitError : public Error {
public:
  using Error::Error;
};

class SearchFailure : public Error {
public:
  using Error::Error;
};

// violated pre/post condition inside the library
class ContractError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

class NoSurfaceError : public Error {
public:
  using Error::Error;
};

class BudgetExceeded : public Error {
public:
  using Error::Error;
};

// query outside the domain of a field
class DomainError : public Error {
public:
  using Error::Error;
};

// output failed a validity check (non-manifold, self-intersecting, ...)
class ValidityError : public Error {
public:
  using Error::Error;
};

// splitmix64 step, used to derive independent seeds
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (b + 0x632BE59BD9B4E019ull));
}

// uniform double in [0,1) from 53 random bits; platform independent
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace lfsr
