// This file is part of the igacoh project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace igacoh {

using Index = std::int32_t;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

using SpMatI = Eigen::SparseMatrix<Index>;
using SpMatD = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<Complex>;
using VecXd = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using VecXi = Eigen::Matrix<Index, Eigen::Dynamic, 1>;

using TripI = Eigen::Triplet<Index>;
using TripD = Eigen::Triplet<double>;
using TripC = Eigen::Triplet<Complex>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid argument to a library operation (index range, shape mismatch, ...).
struct ArgumentError : Error {
  using Error::Error;
};

/// Geometry map with non-positive Jacobian determinant.
struct DegenerateGeometryError : Error {
  using Error::Error;
};

/// Non-conforming multipatch interface.
struct GluingError : Error {
  using Error::Error;
};

/// Inconsistent cell data, non-manifold surfaces, disconnected graphs.
struct TopologyError : Error {
  using Error::Error;
};

/// Linear solver failure (singular or ungauged system).
struct SolverError : Error {
  using Error::Error;
};

/// Requested physical point not found inside the geometry.
struct NotFoundError : Error {
  using Error::Error;
};

/// Problem file syntax or validation failure, with position information.
struct ParseError : Error {
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line = 0;
  int column = 0;
};

enum class Subdomain : std::uint8_t { conductor, insulator };

}  // namespace igacoh
