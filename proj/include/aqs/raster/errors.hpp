#pragma once

#include <string>

#include "aqs/core/error.hpp"

namespace aqs::raster {

// File missing, truncated, or not in the declared format.
class RasterReadError : public DataError {
 public:
  RasterReadError(const std::string& path, const std::string& what)
      : DataError(path + ": " + what) {}
};

class UnsupportedBandCount : public DataError {
 public:
  UnsupportedBandCount(const std::string& path, unsigned bands)
      : DataError(path + ": SamplesPerPixel=" + std::to_string(bands) +
                  ", only single-band rasters are supported") {}
};

class MissingGeoreference : public DataError {
 public:
  MissingGeoreference(const std::string& path, const std::string& field)
      : DataError(path + ": missing georeferencing (" + field + ")") {}
};

// Point query outside a layer's bounds.
class OutOfBounds : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace aqs::raster
