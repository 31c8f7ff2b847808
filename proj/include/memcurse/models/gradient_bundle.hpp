#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace memcurse::models {

struct ParameterGroup {
  std::string label;
  Eigen::MatrixXd values;
};

/// Ordered, labeled real arrays. Used both for parameters and for their
/// gradients; flattening is group by group, row-major inside a group.
class GradientBundle {
 public:
  void add(std::string label, Eigen::MatrixXd values);

  const std::vector<ParameterGroup>& groups() const { return groups_; }
  std::vector<ParameterGroup>& groups() { return groups_; }
  bool contains(std::string_view label) const;
  Eigen::MatrixXd& operator[](std::string_view label);
  const Eigen::MatrixXd& operator[](std::string_view label) const;

  std::size_t size() const;
  Eigen::VectorXd flatten() const;
  /// Inverse of flatten for a bundle of identical layout.
  void unflatten(const Eigen::VectorXd& flat);
  /// "label[i]" for column vectors, "label[r,c]" otherwise.
  std::vector<std::string> element_labels() const;
  double squared_norm() const;
  std::vector<std::string> nonfinite_labels() const;

  GradientBundle& operator+=(const GradientBundle& other);
  GradientBundle& operator*=(double s);
  /// Same layout, all zeros.
  GradientBundle zeros_like() const;

 private:
  std::vector<ParameterGroup> groups_;
};

}  // namespace memcurse::models
