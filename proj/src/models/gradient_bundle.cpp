#include "memcurse/models/gradient_bundle.hpp"

#include <cmath>

#include "memcurse/errors.hpp"

namespace memcurse::models {

void GradientBundle::add(std::string label, Eigen::MatrixXd values) {
  if (contains(label)) throw ContractError("duplicate parameter group: " + label);
  groups_.push_back({std::move(label), std::move(values)});
}

bool GradientBundle::contains(std::string_view label) const {
  for (const auto& g : groups_)
    if (g.label == label) return true;
  return false;
}

Eigen::MatrixXd& GradientBundle::operator[](std::string_view label) {
  for (auto& g : groups_)
    if (g.label == label) return g.values;
  throw ContractError("unknown parameter group: " + std::string(label));
}

const Eigen::MatrixXd& GradientBundle::operator[](std::string_view label) const {
  for (const auto& g : groups_)
    if (g.label == label) return g.values;
  throw ContractError("unknown parameter group: " + std::string(label));
}

std::size_t GradientBundle::size() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += static_cast<std::size_t>(g.values.size());
  return n;
}

Eigen::VectorXd GradientBundle::flatten() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  Eigen::Index k = 0;
  for (const auto& g : groups_)
    for (Eigen::Index r = 0; r < g.values.rows(); ++r)
      for (Eigen::Index c = 0; c < g.values.cols(); ++c) out(k++) = g.values(r, c);
  return out;
}

void GradientBundle::unflatten(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != size())
    throw DimensionError("unflatten: expected " + std::to_string(size()) + " values, got " +
                         std::to_string(flat.size()));
  Eigen::Index k = 0;
  for (auto& g : groups_)
    for (Eigen::Index r = 0; r < g.values.rows(); ++r)
      for (Eigen::Index c = 0; c < g.values.cols(); ++c) g.values(r, c) = flat(k++);
}

std::vector<std::string> GradientBundle::element_labels() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (const auto& g : groups_)
    for (Eigen::Index r = 0; r < g.values.rows(); ++r)
      for (Eigen::Index c = 0; c < g.values.cols(); ++c) {
        if (g.values.cols() == 1)
          out.push_back(g.label + "[" + std::to_string(r) + "]");
        else
          out.push_back(g.label + "[" + std::to_string(r) + "," + std::to_string(c) + "]");
      }
  return out;
}

double GradientBundle::squared_norm() const {
  double s = 0.0;
  for (const auto& g : groups_) s += g.values.squaredNorm();
  return s;
}

std::vector<std::string> GradientBundle::nonfinite_labels() const {
  std::vector<std::string> out;
  const auto labels = element_labels();
  const Eigen::VectorXd flat = flatten();
  for (Eigen::Index k = 0; k < flat.size(); ++k)
    if (!std::isfinite(flat(k))) out.push_back(labels[static_cast<std::size_t>(k)]);
  return out;
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
  if (other.groups_.size() != groups_.size()) throw DimensionError("bundle layouts differ");
  for (std::size_t i = 0; i < groups_.size(); ++i) groups_[i].values += other.groups_[i].values;
  return *this;
}

GradientBundle& GradientBundle::operator*=(double s) {
  for (auto& g : groups_) g.values *= s;
  return *this;
}

GradientBundle GradientBundle::zeros_like() const {
  GradientBundle z;
  for (const auto& g : groups_)
    z.add(g.label, Eigen::MatrixXd::Zero(g.values.rows(), g.values.cols()));
  return z;
}

}  // namespace memcurse::models
