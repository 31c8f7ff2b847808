#include "memcurse/models/serialization.hpp"

#include "memcurse/errors.hpp"

namespace memcurse::models {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw DimensionError("matrix JSON must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      throw DimensionError("matrix JSON rows have different lengths");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json cell_to_json(const RecurrentCell& cell) {
  json j;
  j["kind"] = cell_kind(cell);
  const GradientBundle params = parameters(cell);
  for (const auto& g : params.groups()) j[g.label] = matrix_to_json(g.values);
  if (const auto* dc = std::get_if<DiagonalComplexCell>(&cell)) {
    if (dc->norm.kind == analytic::NormalizationSpec::Kind::Custom)
      throw ContractError("custom normalization cannot be serialized");
    j["coordinates"] =
        dc->coords == DiagonalComplexCell::Coordinates::Cartesian ? "cartesian" : "polar";
    j["magnitude"] = std::string(analytic::to_string(dc->magnitude.kind()));
    j["angle"] = std::string(analytic::to_string(dc->angle.kind()));
    j["normalization"] = {
        {"kind", dc->norm.kind == analytic::NormalizationSpec::Kind::None ? "none"
                                                                          : "sqrt_one_minus_nu_sq"},
        {"stop_gradient", dc->norm.stop_gradient}};
  }
  return j;
}

RecurrentCell cell_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dense") {
    DenseLinearSSM c{matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                     matrix_from_json(j.at("C")), matrix_from_json(j.at("D"))};
    c.validate();
    return c;
  }
  if (kind == "block_diagonal") {
    BlockDiagonalCell c{matrix_from_json(j.at("blocks")), matrix_from_json(j.at("B")),
                        matrix_from_json(j.at("C")), matrix_from_json(j.at("D"))};
    c.validate();
    return c;
  }
  if (kind == "lstm") {
    LSTMCell c{matrix_from_json(j.at("W")), matrix_from_json(j.at("U")),
               matrix_from_json(j.at("bias")).col(0)};
    c.validate();
    return c;
  }
  if (kind == "complex_diagonal" || kind == "lru") {
    DiagonalComplexCell c;
    const bool cart = j.at("coordinates").get<std::string>() == "cartesian";
    c.coords = cart ? DiagonalComplexCell::Coordinates::Cartesian
                    : DiagonalComplexCell::Coordinates::Polar;
    c.magnitude = analytic::Parametrization(
        analytic::param_kind_from_string(j.at("magnitude").get<std::string>()));
    c.angle = analytic::Parametrization(
        analytic::param_kind_from_string(j.at("angle").get<std::string>()));
    const auto& nj = j.at("normalization");
    c.norm = nj.at("kind").get<std::string>() == "none"
                 ? analytic::NormalizationSpec::none()
                 : analytic::NormalizationSpec::sqrt_one_minus_nu_sq(
                       nj.at("stop_gradient").get<bool>());
    c.p1 = matrix_from_json(j.at(cart ? "lambda.re" : "omega_nu")).col(0);
    c.p2 = matrix_from_json(j.at(cart ? "lambda.im" : "omega_theta")).col(0);
    const Eigen::MatrixXd bre = matrix_from_json(j.at("b.re")), bim = matrix_from_json(j.at("b.im"));
    const Eigen::MatrixXd cre = matrix_from_json(j.at("c.re")), cim = matrix_from_json(j.at("c.im"));
    c.b.resize(bre.rows(), bre.cols());
    c.b.real() = bre;
    c.b.imag() = bim;
    c.c.resize(cre.rows(), cre.cols());
    c.c.real() = cre;
    c.c.imag() = cim;
    c.d = matrix_from_json(j.at("d"));
    c.validate();
    return c;
  }
  throw DomainError("unknown cell kind: " + kind);
}

}  // namespace memcurse::models
