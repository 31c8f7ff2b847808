#pragma once

#include <json.hpp>

#include "memcurse/models/cells.hpp"

namespace memcurse::models {

/// {"kind": ..., "<group label>": [[...], ...], ...}; complex-diagonal cells
/// also carry "coordinates", "magnitude", "angle" and "normalization".
nlohmann::json cell_to_json(const RecurrentCell& cell);
RecurrentCell cell_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace memcurse::models
