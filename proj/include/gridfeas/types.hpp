#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace gridfeas {

// Constant power demanded at each load, in watts. Sign is unrestricted:
// a negative entry is a load feeding power into the grid.
class DemandVector {
 public:
  DemandVector() = default;
  // Throws InvalidArgument on non-finite entries.
  explicit DemandVector(Eigen::VectorXd watts);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  DemandVector scaled(double factor) const { return DemandVector(values_ * factor); }

 private:
  Eigen::VectorXd values_;
};

enum class StabilityClass { Stable, SemiStableBoundary, Unstable };

std::string_view to_string(StabilityClass c);

struct OperatingPoint {
  Eigen::VectorXd voltages;
  DemandVector demand;
  StabilityClass stability = StabilityClass::Stable;
};

}  // namespace gridfeas
