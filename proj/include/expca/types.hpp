#ifndef EXPCA_TYPES_HPP
#define EXPCA_TYPES_HPP

#include <Eigen/Dense>
#include <set>
#include <string>

namespace expca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Set of variable identifiers; std::set keeps iteration deterministic.
using VariableSet = std::set<std::string>;

}  // namespace expca

#endif
