// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace quadpool {

// Quadrilateral, homography or affine map with (near-)zero area/determinant.
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Manifest parse failures and annotation invariant violations.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable, missing or corrupt files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quadpool
